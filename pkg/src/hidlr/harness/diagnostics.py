"""Truth-versus-prediction tables for the fitted per-group quadratics.

For each group the fit is anchored by the standard four probes, then the
measured loss change at every requested scale is tabulated next to the
model's prediction 0.5*a*xi^2 - b*xi. On a quadratic loss the two columns
agree to rounding error; on real problems their agreement (pooled R^2) is
the evidence that the second-order model is trustworthy at probe scale.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from ..controller import build_probe_matrix, evaluate_probes, fit_diag_quadratic
from ..errors import ValidationError
from ..linalg import r2_score
from ..optim import apply_update
from ..problems.base import GroupLayout, LossProblem


def taylor_diagnostics(
    problem: LossProblem,
    w: np.ndarray,
    dir_vec: np.ndarray,
    layout: GroupLayout,
    eta_grid: Sequence[float],
    batch: Optional[np.ndarray] = None,
) -> list:
    """Rows of (group, xi, measured dL, predicted dL) over ``eta_grid``.

    The reference parabola per group comes from the standard probe set
    scaled so its widest probe (2x) reaches the largest grid magnitude;
    a grid equal to the four standard multiples of some rate therefore
    reproduces the fit's own residuals.
    """
    eta_grid = [float(x) for x in eta_grid]
    if not eta_grid:
        raise ValidationError("eta_grid must be nonempty")
    eta_ref = max(abs(x) for x in eta_grid) / 2.0

    probe = build_probe_matrix(np.full(layout.k, eta_ref))
    l0 = problem.loss(w, batch)
    deltas = evaluate_probes(problem, w, dir_vec, layout, probe, batch, l0)
    fit = fit_diag_quadratic(probe, deltas)

    rows = []
    for g in range(layout.k):
        for xi in eta_grid:
            rate = np.zeros(layout.k)
            rate[g] = xi
            measured = problem.loss(apply_update(w, layout, rate, dir_vec), batch) - l0
            predicted = 0.5 * fit.a[g] * xi**2 - fit.b[g] * xi
            rows.append(
                {
                    "group": g,
                    "group_name": layout.names[g],
                    "xi": xi,
                    "measured": float(measured),
                    "predicted": float(predicted),
                }
            )
    return rows


def pooled_r2_from_rows(rows: Sequence[dict]) -> float:
    """R^2 of predicted against measured over a diagnostics table."""
    measured = np.array([r["measured"] for r in rows])
    predicted = np.array([r["predicted"] for r in rows])
    return float(r2_score(measured, predicted))
