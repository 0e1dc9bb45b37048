"""Training loops for every method, with exact loss-call accounting.

A run produces a RunRecord: per-evaluation metric rows, per-refresh probe
diagnostics, and a summary. Records deliberately do not name the method
that produced them — the single-group controller run and the dedicated
``hiulr`` method are required to produce identical records, and anything
method-specific in the output would break that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..controller import (
    HiDlrConfig,
    RefreshRecord,
    forward_pass_budget,
    hidlr_step,
    initial_lr_state,
)
from ..errors import HidlrError, ValidationError
from ..linalg import spawn_rngs
from ..optim import (
    OptimizerState,
    apply_update,
    default_toy_grid,
    direction,
    grid_search,
    scheduler_lr,
)
from ..problems import build_problem, group_params
from ..problems.base import GroupLayout, LossProblem
from .config import ExperimentConfig


class CountingProblem:
    """Transparent wrapper that counts loss/grad calls by channel.

    Calls made while ``eval_mode`` is active (test-set evaluation) land in
    a separate counter so the training-path budget can be audited exactly.
    """

    def __init__(self, inner: LossProblem):
        self.inner = inner
        self.train_loss_calls = 0
        self.eval_loss_calls = 0
        self.grad_calls = 0
        self._in_eval = False

    def __getattr__(self, name):
        return getattr(self.inner, name)

    def loss(self, w, batch=None):
        if self._in_eval:
            self.eval_loss_calls += 1
        else:
            self.train_loss_calls += 1
        return self.inner.loss(w, batch)

    def grad(self, w, batch=None):
        self.grad_calls += 1
        return self.inner.grad(w, batch)

    def test_metrics(self, w):
        self._in_eval = True
        try:
            return self.inner.test_metrics(w)
        finally:
            self._in_eval = False


@dataclass
class RunRecord:
    """Everything a run emits; all values JSON-serializable."""

    rows: list = field(default_factory=list)
    probes: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)


def _clean(value):
    """Make numpy values JSON-friendly; NaN becomes None."""
    if isinstance(value, np.ndarray):
        return [_clean(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def refresh_rows(refresh: RefreshRecord, layout: GroupLayout) -> list:
    """Serialize one refresh into probe rows plus a decision row."""
    rows = []
    fit = refresh.fit
    if fit is not None:
        for j in range(fit.xi.shape[0]):
            g = j // 4
            rows.append(
                {
                    "kind": "probe",
                    "t": refresh.t,
                    "group": g,
                    "group_name": layout.names[g],
                    "xi": _clean(fit.xi[j]),
                    "delta_l": _clean(fit.delta_l[j]),
                    "predicted": _clean(fit.predicted[j]),
                }
            )
    rows.append(
        {
            "kind": "refresh",
            "t": refresh.t,
            "accepted": bool(refresh.accepted),
            "reason": refresh.reason,
            "a": _clean(fit.a) if fit else None,
            "b": _clean(fit.b) if fit else None,
            "r2_group": _clean(fit.r2_group) if fit else None,
            "r2_pooled": _clean(fit.r2_pooled) if fit else None,
            "eta_star": _clean(refresh.eta_star),
            "eta_before": _clean(refresh.eta_before),
            "eta_after": _clean(refresh.eta_after),
            "floored": _clean(refresh.floored),
        }
    )
    return rows


class _Schedule:
    """Per-step batches: seeded shuffle each epoch, full batch for toys."""

    def __init__(self, problem, cfg: ExperimentConfig, rng):
        self.rng = rng
        if problem.train is None:
            self.n = 0
            self.batch_size = None
            self.steps_per_epoch = 1
            self.total_steps = cfg.iterations or 100
            if cfg.epochs is not None:
                self.total_steps = cfg.epochs  # toys: epochs == iterations
        else:
            self.n = problem.train.n
            self.batch_size = cfg.batch_size or self.n
            if self.batch_size > self.n:
                raise ValidationError(
                    f"batch_size {self.batch_size} exceeds train size {self.n}"
                )
            self.steps_per_epoch = self.n // self.batch_size
            if cfg.iterations is not None:
                self.total_steps = cfg.iterations
            else:
                self.total_steps = (cfg.epochs or 10) * self.steps_per_epoch
        self._epoch_batches = []

    def batch(self, t: int) -> Optional[np.ndarray]:
        if self.n == 0:
            return None
        i = t % self.steps_per_epoch
        if i == 0:
            perm = self.rng.permutation(self.n)
            b = self.batch_size
            self._epoch_batches = [
                perm[j * b : (j + 1) * b] for j in range(self.steps_per_epoch)
            ]
        return self._epoch_batches[i]

    def fresh_batch(self) -> Optional[np.ndarray]:
        if self.n == 0:
            return None
        return self.rng.choice(self.n, size=self.batch_size, replace=False)

    def is_eval_point(self, t: int) -> bool:
        return (t + 1) % self.steps_per_epoch == 0 or (t + 1) == self.total_steps


def _eval_row(problem, w, t, schedule, epoch_losses, eta, record):
    row = {
        "iteration": t + 1,
        "epoch": (t + 1 + schedule.steps_per_epoch - 1) // schedule.steps_per_epoch,
        "train_loss": float(np.mean(epoch_losses)),
        "train_loss_last": float(epoch_losses[-1]),
        "eta": _clean(np.asarray(eta)),
        "loss_calls": problem.train_loss_calls,
        "eval_loss_calls": problem.eval_loss_calls,
    }
    metrics = problem.test_metrics(w)
    if metrics:
        row.update({k: _clean(v) for k, v in metrics.items()})
    record.rows.append(row)


def _run_hidlr(problem, w, layout, cfg: ExperimentConfig, schedule, record):
    hcfg = cfg.hidlr
    lr_state = initial_lr_state(hcfg, layout.k)
    opt = OptimizerState.create(cfg.optimizer, problem.dim, **cfg.optimizer_params)
    epoch_losses = []
    any_probe_failure = False
    for t in range(schedule.total_steps):
        batch = schedule.batch(t)
        probe_batch = None
        if hcfg.fresh_probe_batch and batch is not None and t % hcfg.phi == 0:
            probe_batch = schedule.fresh_batch()
        res = hidlr_step(
            problem, w, lr_state, opt, hcfg, layout, batch, t, probe_batch
        )
        w, lr_state = res.w, res.lr_state
        epoch_losses.append(res.l0)
        if res.refresh is not None:
            record.probes.extend(refresh_rows(res.refresh, layout))
            if res.refresh.reason.startswith("non-finite probe"):
                any_probe_failure = True
        if schedule.is_eval_point(t):
            _eval_row(problem, w, t, schedule, epoch_losses, lr_state.eta, record)
            epoch_losses = []

    expected = forward_pass_budget(schedule.total_steps, layout.k, hcfg.phi)
    audited = not hcfg.fresh_probe_batch and not any_probe_failure
    actual = problem.train_loss_calls
    record.summary["loss_calls"] = {
        "train": actual,
        "eval": problem.eval_loss_calls,
        "grad": problem.grad_calls,
        "expected_train": expected if audited else None,
        "budget_exact": (actual == expected) if audited else None,
    }
    if audited and actual != expected:
        raise HidlrError(
            f"budget audit failed: {actual} training loss calls, "
            f"expected {expected} (T={schedule.total_steps}, K={layout.k}, "
            f"phi={hcfg.phi})"
        )
    return w, _clean(lr_state.eta)


def _run_scheduled(problem, w, layout, cfg: ExperimentConfig, schedule, record,
                   kind: str, base_lr: float):
    opt = OptimizerState.create(cfg.optimizer, problem.dim, **cfg.optimizer_params)
    epoch_losses = []
    eta = None
    for t in range(schedule.total_steps):
        batch = schedule.batch(t)
        lr = scheduler_lr(kind, t, schedule.total_steps, base_lr)
        l0 = problem.loss(w, batch)
        g = problem.grad(w, batch)
        d = direction(opt, g, w)
        eta = np.full(layout.k, lr)
        w = apply_update(w, layout, eta, d)
        epoch_losses.append(l0)
        if schedule.is_eval_point(t):
            _eval_row(problem, w, t, schedule, epoch_losses, eta, record)
            epoch_losses = []
    record.summary["loss_calls"] = {
        "train": problem.train_loss_calls,
        "eval": problem.eval_loss_calls,
        "grad": problem.grad_calls,
        "expected_train": None,
        "budget_exact": None,
    }
    return w, _clean(eta)


def run_experiment(cfg: ExperimentConfig) -> RunRecord:
    """Run one configured experiment deterministically."""
    data_rng, init_rng, shuffle_rng = spawn_rngs(cfg.seed, 3)
    problem = CountingProblem(build_problem(cfg.problem, data_rng, cfg.problem_params))

    method = cfg.method
    grouping = cfg.grouping
    if method == "hiulr":  # single-group controller by definition
        method, grouping = "hidlr", "single"
    layout = group_params(problem.inner, grouping, cfg.grouping_names)

    w = problem.init_params(init_rng)
    schedule = _Schedule(problem, cfg, shuffle_rng)
    record = RunRecord()
    record.summary = {
        "problem": cfg.problem,
        "seed": cfg.seed,
        "problem_dim": int(problem.dim),
        "n_groups": layout.k,
        "group_names": list(layout.names),
        "total_steps": schedule.total_steps,
        "steps_per_epoch": schedule.steps_per_epoch,
        "batch_size": schedule.batch_size,
    }

    try:
        if method == "hidlr":
            w, eta_final = _run_hidlr(problem, w, layout, cfg, schedule, record)
        elif method in ("constant", "linear", "cosine"):
            w, eta_final = _run_scheduled(
                problem, w, layout, cfg, schedule, record, method, cfg.base_lr
            )
        elif method == "grid":
            grid = list(cfg.grid) if cfg.grid else default_toy_grid()
            best_lr, best_loss = grid_search(
                problem,
                cfg.optimizer,
                grid,
                schedule.total_steps,
                seed=cfg.seed,
                opt_hyper=cfg.optimizer_params,
            )
            record.summary["grid"] = {
                "grid": sorted(float(x) for x in grid),
                "best_lr": float(best_lr),
                "best_loss": _clean(best_loss),
            }
            w, eta_final = _run_scheduled(
                problem, w, layout, cfg, schedule, record, "constant", best_lr
            )
        else:  # pragma: no cover - config validation owns this
            raise ValidationError(f"unhandled method {method!r}")
    except HidlrError as exc:
        raise type(exc)(
            f"run problem={cfg.problem} seed={cfg.seed}: {exc}"
        ) from exc

    final_row = record.rows[-1] if record.rows else {}
    record.summary["final"] = {
        k: final_row.get(k)
        for k in ("train_loss", "train_loss_last", "test_loss", "test_accuracy")
        if k in final_row
    }
    record.summary["eta_final"] = eta_final
    return record
