"""Low-rank teacher-student regression with a two-group (A, B) factorisation.

The student predicts through a rank-r product B @ A added to a frozen zero
base matrix; the teacher is a dense random matrix. B starts at zero, so at
initialisation the prediction ignores A entirely, and the loss curvature of
the two factors is markedly different, which is exactly what per-group
learning rates exploit.
"""

from __future__ import annotations

import numpy as np

from .base import Dataset, GroupLayout, LossProblem


class LoraRegressionProblem(LossProblem):
    """Half squared error, averaged over the batch, of (B @ A) x against W* x."""

    def __init__(
        self,
        rng: np.random.Generator,
        width: int = 64,
        rank: int = 4,
        n_train: int = 1000,
        n_test: int = 200,
    ):
        if not 1 <= rank <= width:
            raise ValueError(f"rank {rank} outside [1, {width}]")
        self.width = width
        self.rank = rank
        self.teacher = rng.standard_normal((width, width)) / np.sqrt(width)
        x_tr = rng.standard_normal((n_train, width))
        x_te = rng.standard_normal((n_test, width))
        self.train = Dataset(x_tr, x_tr @ self.teacher.T, split="train")
        self.test = Dataset(x_te, x_te @ self.teacher.T, split="test")
        self.dim = 2 * rank * width
        self.default_layout = GroupLayout.from_sizes(
            [("A", rank * width), ("B", width * rank)]
        )
        self.name = "lora"

    def init_params(self, rng: np.random.Generator) -> np.ndarray:
        w = np.zeros(self.dim)
        n_a = self.rank * self.width
        w[:n_a] = rng.standard_normal(n_a) / np.sqrt(self.width)  # A Gaussian
        return w  # B stays zero

    def _unpack(self, w: np.ndarray):
        n_a = self.rank * self.width
        a = w[:n_a].reshape(self.rank, self.width)
        b = w[n_a:].reshape(self.width, self.rank)
        return a, b

    def predict(self, w: np.ndarray, x: np.ndarray) -> np.ndarray:
        a, b = self._unpack(self.check_w(w))
        return (x @ a.T) @ b.T

    def loss(self, w, batch=None) -> float:
        w = self.check_w(w)
        x, y = self.resolve_batch(batch)
        a, b = self._unpack(w)
        r = (x @ a.T) @ b.T - y
        return float(0.5 * np.sum(r * r) / x.shape[0])

    def grad(self, w, batch=None) -> np.ndarray:
        w = self.check_w(w)
        x, y = self.resolve_batch(batch)
        a, b = self._unpack(w)
        xa = x @ a.T  # (B, r)
        r = (xa @ b.T - y) / x.shape[0]  # (B, width)
        ga = (b.T @ r.T) @ x  # (r, width)
        gb = r.T @ xa  # (width, r)
        return np.concatenate([ga.ravel(), gb.ravel()])

    def test_metrics(self, w) -> dict:
        x, y = self.test.features, self.test.targets
        r = self.predict(w, x) - y
        return {"test_loss": float(0.5 * np.sum(r * r) / x.shape[0])}


def lora_regression_problem(
    rng: np.random.Generator,
    width: int = 64,
    rank: int = 4,
    n_train: int = 1000,
) -> LoraRegressionProblem:
    return LoraRegressionProblem(rng, width=width, rank=rank, n_train=n_train)
