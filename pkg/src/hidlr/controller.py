"""Curvature-probed per-group learning rates.

Every ``phi`` steps the controller perturbs the parameters along the
current update direction, one group at a time, at four scaled rates
(-2, -1, 1, 2 times the group's current rate), measures the loss change,
and fits dL = 0.5*a*xi^2 - b*xi per group. When every fitted curvature and
slope is positive and the fit explains the probes well (R^2 above a
threshold), each group's rate moves toward its parabola minimum b/a via an
exponential moving average; otherwise the rates stay exactly as they were.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import NonFiniteLoss, SingularFit, ValidationError
from .linalg import r2_score, solve_least_squares
from .optim import OptimizerState, apply_update, direction
from .problems.base import GroupLayout, LossProblem

PROBE_MULTIPLIERS = np.array([-2.0, -1.0, 1.0, 2.0])
GATING_MODES = ("global", "per-group")

# a_k must exceed this fraction of |b_k| to count as a positive curvature;
# guards against astronomically large b/a from noise-level curvature.
CURVATURE_REL_FLOOR = 1e-12


@dataclass
class HiDlrConfig:
    """Controller knobs; defaults favor stochastic problems."""

    phi: int = 1  # steps between rate refreshes
    gamma: float = 0.9  # EMA factor for accepted refreshes
    r2_threshold: float = 0.95
    eta0: Union[float, Sequence[float]] = 1e-3
    eta_min: float = 1e-10
    eta_max: float = 1e2
    probe_floor: float = 1e-12
    gating: str = "global"
    fresh_probe_batch: bool = False

    def __post_init__(self):
        if int(self.phi) != self.phi or self.phi < 1:
            raise ValidationError(f"phi must be a positive integer, got {self.phi}")
        self.phi = int(self.phi)
        if not 0.0 <= self.gamma < 1.0:
            raise ValidationError(f"gamma must be in [0, 1), got {self.gamma}")
        if not 0.0 < self.r2_threshold <= 1.0:
            raise ValidationError(
                f"r2_threshold must be in (0, 1], got {self.r2_threshold}"
            )
        if not 0.0 < self.eta_min < self.eta_max:
            raise ValidationError(
                f"need 0 < eta_min < eta_max, got [{self.eta_min}, {self.eta_max}]"
            )
        if self.probe_floor <= 0.0:
            raise ValidationError(f"probe_floor must be positive, got {self.probe_floor}")
        if self.gating not in GATING_MODES:
            raise ValidationError(
                f"gating must be one of {GATING_MODES}, got {self.gating!r}"
            )

    def initial_lr(self, k: int) -> np.ndarray:
        eta0 = np.asarray(self.eta0, dtype=np.float64)
        if eta0.ndim == 0:
            eta0 = np.full(k, float(eta0))
        if eta0.shape != (k,):
            raise ValidationError(f"eta0 has shape {eta0.shape}, expected ({k},)")
        if np.any(eta0 <= 0):
            raise ValidationError("eta0 entries must be positive")
        return np.clip(eta0, self.eta_min, self.eta_max)


@dataclass
class LrState:
    """Per-group rates plus the outcome of the most recent refresh."""

    eta: np.ndarray
    accepted: Optional[bool] = None  # None until the first refresh
    reason: str = "init"


def initial_lr_state(cfg: HiDlrConfig, k: int) -> LrState:
    return LrState(eta=cfg.initial_lr(k))


@dataclass
class ProbeMatrix:
    """4K one-group-at-a-time rate perturbations, group-major, v-ordered."""

    matrix: np.ndarray  # (4K, K); row j is a per-group rate vector
    eta_base: np.ndarray  # (K,) rates the probes were scaled by (after floor)
    floored: np.ndarray  # (K,) bool: group rate was raised to the probe floor

    @property
    def k(self) -> int:
        return self.eta_base.shape[0]

    def group_of_row(self, j: int) -> int:
        return j // len(PROBE_MULTIPLIERS)

    def xi(self) -> np.ndarray:
        """Signed step scale of each row: xi_j = v_j * eta_base[group(j)]."""
        return (PROBE_MULTIPLIERS[None, :] * self.eta_base[:, None]).ravel()


@dataclass
class QuadraticFit:
    """Per-group parabola coefficients for dL = 0.5*a*xi^2 - b*xi."""

    a: np.ndarray  # (K,) curvature estimates g_(k)^T H_kk g_(k)
    b: np.ndarray  # (K,) slope estimates G_(k)^T g_(k)
    r2_group: np.ndarray  # (K,) fit quality over each group's four probes
    r2_pooled: float  # fit quality over all 4K probes
    xi: np.ndarray  # (4K,) probe scales
    delta_l: np.ndarray  # (4K,) measured loss changes
    predicted: np.ndarray  # (4K,) model's loss changes at xi


@dataclass
class RefreshRecord:
    """Everything one refresh measured and decided; serialized by the harness."""

    t: int
    fit: QuadraticFit
    eta_star: np.ndarray
    eta_before: np.ndarray
    eta_after: np.ndarray
    accepted: bool
    reason: str
    floored: np.ndarray


def build_probe_matrix(
    eta_prev: np.ndarray, probe_floor: float = 1e-12
) -> ProbeMatrix:
    """Rows e_k (x) v scaled by the previous rates, floored at probe_floor."""
    eta_prev = np.asarray(eta_prev, dtype=np.float64)
    k = eta_prev.shape[0]
    floored = eta_prev < probe_floor
    eta_base = np.where(floored, probe_floor, eta_prev)
    matrix = np.zeros((4 * k, k))
    for g in range(k):
        matrix[4 * g : 4 * g + 4, g] = PROBE_MULTIPLIERS * eta_base[g]
    return ProbeMatrix(matrix=matrix, eta_base=eta_base, floored=floored)


def evaluate_probes(
    problem: LossProblem,
    w: np.ndarray,
    dir_vec: np.ndarray,
    layout: GroupLayout,
    probe: ProbeMatrix,
    batch: Optional[np.ndarray],
    l0: float,
) -> np.ndarray:
    """Loss change at each probed displacement; 4K loss calls, w untouched.

    ``l0`` is the already-computed loss at ``w`` on the same batch.
    """
    deltas = np.empty(probe.matrix.shape[0])
    for j, row in enumerate(probe.matrix):
        lj = problem.loss(apply_update(w, layout, row, dir_vec), batch)
        if not math.isfinite(lj):
            exc = NonFiniteLoss(
                f"probe row {j} (group {probe.group_of_row(j)}) gave loss {lj}"
            )
            exc.calls_made = j + 1  # for exact budget accounting upstream
            raise exc
        deltas[j] = lj - l0
    return deltas


def fit_diag_quadratic(probe: ProbeMatrix, delta_l: np.ndarray) -> QuadraticFit:
    """Independent 2-parameter least squares per group, origin included.

    Each group's five points (its four probes plus the exact (0, 0)) are
    fitted in the normalized coordinate u = xi/eta, where the design is
    orthogonal, then rescaled; this keeps the solve well-conditioned for
    any rate magnitude.
    """
    k = probe.k
    delta_l = np.asarray(delta_l, dtype=np.float64)
    if delta_l.shape != (4 * k,):
        raise SingularFit(f"expected {4 * k} probe responses, got {delta_l.shape}")
    if not np.all(np.isfinite(delta_l)):
        raise NonFiniteLoss("probe responses contain NaN/Inf")

    u = np.append(PROBE_MULTIPLIERS, 0.0)
    design = np.column_stack([0.5 * u**2, -u])  # orthogonal columns
    a = np.empty(k)
    b = np.empty(k)
    r2_group = np.empty(k)
    predicted = np.empty(4 * k)
    for g in range(k):
        eta = probe.eta_base[g]
        if not (np.isfinite(eta) and eta > 0):
            raise SingularFit(f"group {g} probe scale {eta} is unusable")
        responses = np.append(delta_l[4 * g : 4 * g + 4], 0.0)
        coef = solve_least_squares(design, responses)
        # coef fits dL = 0.5*a'*u^2 - b'*u with u = xi/eta
        a[g] = coef[0] / eta**2
        b[g] = coef[1] / eta
        pred = design[:4] @ coef
        predicted[4 * g : 4 * g + 4] = pred
        r2_group[g] = r2_score(delta_l[4 * g : 4 * g + 4], pred)
    r2_pooled = r2_score(delta_l, predicted)
    return QuadraticFit(
        a=a,
        b=b,
        r2_group=r2_group,
        r2_pooled=float(r2_pooled),
        xi=probe.xi(),
        delta_l=delta_l,
        predicted=predicted,
    )


def optimal_lr(fit: QuadraticFit) -> np.ndarray:
    """Parabola minimum b/a per group; NaN marks entries with unusable a."""
    valid = fit.a > np.maximum(0.0, CURVATURE_REL_FLOOR * np.abs(fit.b))
    eta_star = np.full(fit.a.shape, np.nan)
    eta_star[valid] = fit.b[valid] / fit.a[valid]
    return eta_star


def _group_ok(fit: QuadraticFit) -> np.ndarray:
    a_ok = fit.a > np.maximum(0.0, CURVATURE_REL_FLOOR * np.abs(fit.b))
    return a_ok & (fit.b > 0.0)


def gate_and_update(
    state: LrState,
    fit: QuadraticFit,
    eta_star: np.ndarray,
    cfg: HiDlrConfig,
) -> LrState:
    """Accept the refresh (EMA + clamp) or keep the rates bit-identical."""
    if cfg.gating == "global":
        failures = []
        if not np.all(fit.a > np.maximum(0.0, CURVATURE_REL_FLOOR * np.abs(fit.b))):
            failures.append("curvature a not positive for all groups")
        if not np.all(fit.b > 0.0):
            failures.append("slope b not positive for all groups")
        if not fit.r2_pooled > cfg.r2_threshold:
            failures.append(
                f"pooled R2 {fit.r2_pooled:.6g} <= {cfg.r2_threshold:.6g}"
            )
        if failures:
            return LrState(
                eta=state.eta, accepted=False, reason="; ".join(failures)
            )
        eta = np.clip(
            cfg.gamma * state.eta + (1.0 - cfg.gamma) * eta_star,
            cfg.eta_min,
            cfg.eta_max,
        )
        return LrState(eta=eta, accepted=True, reason="ok")

    # per-group: each group gates on its own (a, b, R2)
    ok = _group_ok(fit) & (fit.r2_group > cfg.r2_threshold)
    if not np.any(ok):
        return LrState(eta=state.eta, accepted=False, reason="no group passed")
    eta = state.eta.copy()
    eta[ok] = np.clip(
        cfg.gamma * state.eta[ok] + (1.0 - cfg.gamma) * eta_star[ok],
        cfg.eta_min,
        cfg.eta_max,
    )
    n_ok = int(ok.sum())
    reason = "ok" if n_ok == len(ok) else f"accepted {n_ok}/{len(ok)} groups"
    return LrState(eta=eta, accepted=True, reason=reason)


@dataclass
class StepResult:
    """One training step's outputs; ``loss_calls`` counts loss() invocations."""

    w: np.ndarray
    lr_state: LrState
    l0: float
    refresh: Optional[RefreshRecord]
    loss_calls: int


def hidlr_step(
    problem: LossProblem,
    w: np.ndarray,
    lr_state: LrState,
    opt_state: OptimizerState,
    cfg: HiDlrConfig,
    layout: GroupLayout,
    batch: Optional[np.ndarray],
    t: int,
    probe_batch: Optional[np.ndarray] = None,
) -> StepResult:
    """One full training step: loss, gradient, optional refresh, update.

    A refresh happens when ``t % cfg.phi == 0`` (so always at t = 0). A
    probe or fit failure rejects the refresh and training continues with
    the previous rates. ``probe_batch`` (when given) replaces the step's
    batch for probing only; this costs one extra loss call to re-anchor
    the baseline.
    """
    l0 = problem.loss(w, batch)
    if not math.isfinite(l0):
        raise NonFiniteLoss(f"training loss at step {t} is {l0}")
    g = problem.grad(w, batch)
    d = direction(opt_state, g, w)

    refresh = None
    loss_calls = 1
    if t % cfg.phi == 0:
        probe = build_probe_matrix(lr_state.eta, cfg.probe_floor)
        if probe_batch is None:
            pb, lp = batch, l0
        else:
            pb = probe_batch
            lp = problem.loss(w, pb)
            loss_calls += 1
        eta_before = lr_state.eta
        try:
            deltas = evaluate_probes(problem, w, d, layout, probe, pb, lp)
        except NonFiniteLoss as exc:
            loss_calls += getattr(exc, "calls_made", probe.matrix.shape[0])
            fit = None
            eta_star = np.full(probe.k, np.nan)
            lr_state = LrState(
                eta=lr_state.eta, accepted=False, reason=f"non-finite probe: {exc}"
            )
        else:
            loss_calls += probe.matrix.shape[0]
            fit = fit_diag_quadratic(probe, deltas)
            eta_star = optimal_lr(fit)
            lr_state = gate_and_update(lr_state, fit, eta_star, cfg)
        refresh = RefreshRecord(
            t=t,
            fit=fit,
            eta_star=eta_star,
            eta_before=eta_before,
            eta_after=lr_state.eta,
            accepted=bool(lr_state.accepted),
            reason=lr_state.reason,
            floored=probe.floored,
        )
    w_next = apply_update(w, layout, lr_state.eta, d)
    return StepResult(
        w=w_next, lr_state=lr_state, l0=l0, refresh=refresh, loss_calls=loss_calls
    )


def forward_pass_budget(total_steps: int, k: int, phi: int) -> int:
    """Training-loss evaluations for T steps with refreshes at t % phi == 0.

    Each step costs one loss call; each refresh (steps 0, phi, 2*phi, ...)
    adds 4K probe calls, giving T + 4K * ceil(T / phi). Gradient passes and
    test-set evaluations are not included.
    """
    if total_steps < 1 or k < 1 or phi < 1:
        raise ValidationError(
            f"need T, K, phi >= 1, got ({total_steps}, {k}, {phi})"
        )
    refreshes = -(-total_steps // phi)
    return total_steps + 4 * k * refreshes
