"""Base optimizers, grouped updates, baseline schedulers, and grid search.

The optimizers here produce an update *direction* only; step sizes are
applied separately (per parameter group) by ``apply_update``. This split is
what lets the rate controller probe the loss along the exact direction the
optimizer is about to take.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import LengthMismatch, UnknownStrategy
from .linalg import make_rng
from .problems.base import GroupLayout, LossProblem

OPTIMIZER_KINDS = ("sgd", "momentum", "adamw")
SCHEDULER_KINDS = ("constant", "linear", "cosine")


@dataclass
class OptimizerState:
    """Mutable per-run optimizer state; ``t`` counts direction() calls."""

    kind: str
    dim: int
    t: int = 0
    m: Optional[np.ndarray] = None  # first moment / momentum buffer
    v: Optional[np.ndarray] = None  # second moment (adamw only)
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    mu: float = 0.9
    weight_decay: float = 0.0
    decay_in_direction: bool = True

    @staticmethod
    def create(kind: str, dim: int, **hyper) -> "OptimizerState":
        if kind not in OPTIMIZER_KINDS:
            raise UnknownStrategy(
                f"unknown optimizer {kind!r}; known: {', '.join(OPTIMIZER_KINDS)}"
            )
        state = OptimizerState(kind=kind, dim=dim, **hyper)
        if kind == "momentum":
            state.m = np.zeros(dim)
        elif kind == "adamw":
            state.m = np.zeros(dim)
            state.v = np.zeros(dim)
        return state


def direction(state: OptimizerState, g: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Preconditioned update direction; mutates ``state`` exactly once."""
    g = np.asarray(g, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if g.shape != (state.dim,) or w.shape != (state.dim,):
        raise LengthMismatch(
            f"gradient {g.shape} / params {w.shape} vs dimension {state.dim}"
        )
    state.t += 1
    if state.kind == "sgd":
        return g.copy()
    if state.kind == "momentum":
        state.m = state.mu * state.m + g
        return state.m.copy()
    # adamw
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * g
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * g * g
    m_hat = state.m / (1.0 - state.beta1**state.t)
    v_hat = state.v / (1.0 - state.beta2**state.t)
    d = m_hat / (np.sqrt(v_hat) + state.eps)
    if state.decay_in_direction and state.weight_decay != 0.0:
        d = d + state.weight_decay * w
    return d


def apply_update(
    w: np.ndarray,
    layout: GroupLayout,
    lr: np.ndarray,
    dir_vec: np.ndarray,
) -> np.ndarray:
    """w - [eta_1 * d_(1), ..., eta_K * d_(K)], one rate per group."""
    w = np.asarray(w, dtype=np.float64)
    dir_vec = np.asarray(dir_vec, dtype=np.float64)
    if w.shape != (layout.dim,) or dir_vec.shape != (layout.dim,):
        raise LengthMismatch(
            f"params {w.shape} / direction {dir_vec.shape} vs layout dim {layout.dim}"
        )
    return w - layout.expand(lr) * dir_vec


def scheduler_lr(kind: str, t: int, total: int, eta0: float) -> float:
    """Baseline learning-rate schedules evaluated at step t of `total`."""
    if not 0 <= t < total:
        raise LengthMismatch(f"step {t} outside [0, {total})")
    if kind == "constant":
        return eta0
    if kind == "linear":
        return eta0 * (1.0 - t / total)
    if kind == "cosine":
        return eta0 * (1.0 + np.cos(np.pi * t / total)) / 2.0
    raise UnknownStrategy(
        f"unknown scheduler {kind!r}; known: {', '.join(SCHEDULER_KINDS)}"
    )


def default_toy_grid() -> list[float]:
    """12-point half-decade grid 1e-5 * 10^(k/2), k = 0..11."""
    return [1e-5 * 10 ** (k / 2) for k in range(12)]


def _constant_lr_run(
    problem: LossProblem,
    optimizer_kind: str,
    lr: float,
    iters: int,
    seed: int,
    opt_hyper: Optional[dict] = None,
) -> float:
    """Final full-batch training loss after `iters` constant-rate steps."""
    w = problem.init_params(make_rng(seed))
    state = OptimizerState.create(optimizer_kind, problem.dim, **(opt_hyper or {}))
    layout = GroupLayout.from_sizes([("all", problem.dim)])
    lr_vec = np.array([lr])
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(iters):
            g = problem.grad(w)
            if not np.all(np.isfinite(g)):
                return np.inf
            w = apply_update(w, layout, lr_vec, direction(state, g, w))
            if not np.all(np.isfinite(w)):
                return np.inf
        final = problem.loss(w)
    return final if np.isfinite(final) else np.inf


def grid_search(
    problem: LossProblem,
    optimizer_kind: str,
    grid: Sequence[float],
    iters: int,
    seed: int = 0,
    opt_hyper: Optional[dict] = None,
) -> tuple[float, float]:
    """Best constant uniform rate on `grid` by final training loss.

    Every candidate starts from the same seeded initialization. Diverged
    runs score +inf; ties break toward the smaller rate, and the result
    does not depend on the order of `grid`.
    """
    if len(grid) == 0:
        raise LengthMismatch("grid must be nonempty")
    best_lr, best_loss = None, np.inf
    for lr in sorted(float(x) for x in grid):
        loss = _constant_lr_run(problem, optimizer_kind, lr, iters, seed, opt_hyper)
        if loss < best_loss:
            best_lr, best_loss = lr, loss
    if best_lr is None:  # every candidate diverged; take the smallest rate
        best_lr = min(float(x) for x in grid)
    return best_lr, best_loss
