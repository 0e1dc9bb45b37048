"""Synthetic multi-task classification head on frozen random features.

A frozen random tanh feature map lifts inputs to 512 dimensions; the only
trainable parameters are the columns of a 512 x n_tasks linear head, one
binary classification task per column. Task difficulty ramps up across
tasks: labels come from a linear score plus Gaussian noise whose scale
grows linearly from 0.1 (first task) to 2.0 (last), so later tasks are
intrinsically harder to learn. Each head column is its own parameter
group, named ``task0`` .. ``task{K-1}``.
"""

from __future__ import annotations

import numpy as np

from ..errors import ValidationError
from .base import Dataset, GroupLayout, LossProblem, bce_with_logits, sigmoid

FEATURE_DIM = 512
INPUT_DIM = 16
NOISE_MIN = 0.1
NOISE_MAX = 2.0


class MultitaskHeadProblem(LossProblem):
    """Mean binary cross-entropy over tasks and batch for the linear head."""

    def __init__(
        self,
        rng: np.random.Generator,
        n_tasks: int,
        n_train: int = 2048,
        n_test: int = 512,
    ):
        if n_tasks < 2:
            raise ValidationError(f"n_tasks must be >= 2, got {n_tasks}")
        self.n_tasks = n_tasks
        self.noise_scales = np.linspace(NOISE_MIN, NOISE_MAX, n_tasks)

        # frozen feature map and per-task label directions
        self._fmap = rng.standard_normal((INPUT_DIM, FEATURE_DIM)) / np.sqrt(INPUT_DIM)
        self._label_dirs = rng.standard_normal((FEATURE_DIM, n_tasks)) / np.sqrt(
            FEATURE_DIM
        )
        self.train = self._make_split(rng, n_train, "train")
        self.test = self._make_split(rng, n_test, "test")
        # the feature map is frozen, so activations never change across steps
        self._z_train = self.features(self.train.features)
        self._z_test = self.features(self.test.features)

        self.dim = FEATURE_DIM * n_tasks
        self.default_layout = GroupLayout.from_sizes(
            [(f"task{k}", FEATURE_DIM) for k in range(n_tasks)]
        )
        self.name = "multitask"

    def _make_split(self, rng: np.random.Generator, n: int, split: str) -> Dataset:
        x = rng.standard_normal((n, INPUT_DIM))
        z = self.features(x)
        score = z @ self._label_dirs  # (n, K)
        noise = rng.standard_normal(score.shape) * self.noise_scales[None, :]
        y = (score + noise > 0).astype(np.float64)
        return Dataset(x, y, split=split)

    def features(self, x: np.ndarray) -> np.ndarray:
        return np.tanh(x @ self._fmap)

    def init_params(self, rng: np.random.Generator) -> np.ndarray:
        return np.zeros(self.dim)

    def _head(self, w: np.ndarray) -> np.ndarray:
        # row k of the (K, 512) view is head column k == parameter group k
        return w.reshape(self.n_tasks, FEATURE_DIM)

    def _resolve_z(self, batch):
        """Cached feature rows and targets for a train batch (None = all)."""
        if batch is None:
            return self._z_train, self.train.targets
        batch = np.asarray(batch)
        return self._z_train[batch], self.train.targets[batch]

    def loss(self, w, batch=None) -> float:
        w = self.check_w(w)
        z, y = self._resolve_z(batch)
        logits = z @ self._head(w).T  # (B, K)
        return float(np.mean(bce_with_logits(logits, y)))

    def grad(self, w, batch=None) -> np.ndarray:
        w = self.check_w(w)
        z, y = self._resolve_z(batch)
        logits = z @ self._head(w).T
        dlogits = (sigmoid(logits) - y) / logits.size
        return (dlogits.T @ z).ravel()

    def per_task_losses(self, w, split: str = "test") -> np.ndarray:
        z, y = (
            (self._z_test, self.test.targets)
            if split == "test"
            else (self._z_train, self.train.targets)
        )
        logits = z @ self._head(self.check_w(w)).T
        return bce_with_logits(logits, y).mean(axis=0)

    def test_metrics(self, w) -> dict:
        logits = self._z_test @ self._head(self.check_w(w)).T
        y = self.test.targets
        return {
            "test_loss": float(np.mean(bce_with_logits(logits, y))),
            "test_accuracy": float(np.mean((logits > 0) == (y > 0.5))),
        }


def multitask_head_problem(
    rng: np.random.Generator,
    n_tasks: int,
    n_train: int = 2048,
    n_test: int = 512,
) -> MultitaskHeadProblem:
    return MultitaskHeadProblem(rng, n_tasks, n_train=n_train, n_test=n_test)
