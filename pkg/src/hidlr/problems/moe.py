"""Mixture-of-experts binary classifier on a noisy 2-D synthetic task.

Labels follow sin(x1) + cos(x2) > 0 with a fraction of labels flipped at
random. A softmax gating network mixes the logits of six small expert MLPs
(dense soft routing, so the loss stays smooth); parameters form two groups,
``gate`` and ``experts``.
"""

from __future__ import annotations

import numpy as np

from .base import Dataset, GroupLayout, LossProblem, bce_with_logits, sigmoid

N_EXPERTS = 6
GATE_HIDDEN = 32
EXPERT_HIDDEN = 64
INPUT_RANGE = (-3.0, 3.0)


def moe_label_rule(x: np.ndarray) -> np.ndarray:
    """Noise-free class rule: 1 where sin(x1) + cos(x2) > 0."""
    return (np.sin(x[:, 0]) + np.cos(x[:, 1]) > 0).astype(np.float64)


def _make_split(rng, n, flip_fraction, split):
    lo, hi = INPUT_RANGE
    x = rng.uniform(lo, hi, size=(n, 2))
    y = moe_label_rule(x)
    flips = rng.random(n) < flip_fraction
    y[flips] = 1.0 - y[flips]
    return Dataset(x, y, split=split)


class MoeProblem(LossProblem):
    """Binary cross-entropy of the gate-weighted expert logit."""

    def __init__(
        self,
        rng: np.random.Generator,
        n_train: int = 1000,
        n_test: int = 200,
        flip_fraction: float = 0.10,
    ):
        self.train = _make_split(rng, n_train, flip_fraction, "train")
        self.test = _make_split(rng, n_test, flip_fraction, "test")

        # gate: 2 -> GATE_HIDDEN -> N_EXPERTS; experts: 2 -> EXPERT_HIDDEN -> 1 each
        self.gate_size = 2 * GATE_HIDDEN + GATE_HIDDEN + GATE_HIDDEN * N_EXPERTS + N_EXPERTS
        self.expert_size = 2 * EXPERT_HIDDEN + EXPERT_HIDDEN + EXPERT_HIDDEN + 1
        self.dim = self.gate_size + N_EXPERTS * self.expert_size
        self.default_layout = GroupLayout.from_sizes(
            [("gate", self.gate_size), ("experts", N_EXPERTS * self.expert_size)]
        )
        self.name = "moe"

    def init_params(self, rng: np.random.Generator) -> np.ndarray:
        h, e = GATE_HIDDEN, EXPERT_HIDDEN
        w = np.zeros(self.dim)
        w[: 2 * h] = rng.standard_normal(2 * h) * np.sqrt(2.0 / 2)
        o = 3 * h
        w[o : o + h * N_EXPERTS] = rng.standard_normal(h * N_EXPERTS) * np.sqrt(2.0 / h)
        ex = w[self.gate_size :].reshape(N_EXPERTS, self.expert_size)
        ex[:, : 2 * e] = rng.standard_normal((N_EXPERTS, 2 * e)) * np.sqrt(2.0 / 2)
        ex[:, 3 * e : 4 * e] = rng.standard_normal((N_EXPERTS, e)) * np.sqrt(2.0 / e)
        return w

    def _views(self, w: np.ndarray):
        h, e = GATE_HIDDEN, EXPERT_HIDDEN
        o = 0
        g1 = w[o : o + 2 * h].reshape(2, h)
        o += 2 * h
        gb1 = w[o : o + h]
        o += h
        g2 = w[o : o + h * N_EXPERTS].reshape(h, N_EXPERTS)
        o += h * N_EXPERTS
        gb2 = w[o : o + N_EXPERTS]
        o += N_EXPERTS
        ex = w[o:].reshape(N_EXPERTS, self.expert_size)
        e1 = ex[:, : 2 * e].reshape(N_EXPERTS, 2, e)
        eb1 = ex[:, 2 * e : 3 * e]
        e2 = ex[:, 3 * e : 4 * e].reshape(N_EXPERTS, e, 1)
        eb2 = ex[:, 4 * e]
        return g1, gb1, g2, gb2, e1, eb1, e2, eb2

    def _forward(self, w: np.ndarray, x: np.ndarray):
        g1, gb1, g2, gb2, e1, eb1, e2, eb2 = self._views(w)
        gz1 = x @ g1 + gb1  # (B, h)
        ga1 = np.maximum(gz1, 0.0)
        gate_logits = ga1 @ g2 + gb2  # (B, E)
        shifted = gate_logits - gate_logits.max(axis=1, keepdims=True)
        expg = np.exp(shifted)
        p = expg / expg.sum(axis=1, keepdims=True)  # softmax gate weights

        ez1 = np.einsum("bd,edh->beh", x, e1, optimize=True) + eb1[None]  # (B, E, h)
        ea1 = np.maximum(ez1, 0.0)
        expert_logits = np.einsum("beh,eho->be", ea1, e2, optimize=True) + eb2[None]

        z = (p * expert_logits).sum(axis=1)  # mixture logit (B,)
        return z, (gz1, ga1, p, ez1, ea1, expert_logits)

    def predict_logit(self, w: np.ndarray, x: np.ndarray) -> np.ndarray:
        return self._forward(self.check_w(w), x)[0]

    def loss(self, w, batch=None) -> float:
        w = self.check_w(w)
        x, y = self.resolve_batch(batch)
        z, _ = self._forward(w, x)
        return float(np.mean(bce_with_logits(z, y)))

    def grad(self, w, batch=None) -> np.ndarray:
        w = self.check_w(w)
        x, y = self.resolve_batch(batch)
        z, (gz1, ga1, p, ez1, ea1, expert_logits) = self._forward(w, x)
        _, _, g2, _, _, _, e2, _ = self._views(w)

        g = np.zeros(self.dim)
        h, e = GATE_HIDDEN, EXPERT_HIDDEN

        dz = (sigmoid(z) - y) / y.shape[0]  # (B,)
        dp = dz[:, None] * expert_logits  # (B, E)
        dlogits = dz[:, None] * p  # (B, E)

        # expert branch; write through a 2-D view of the stacked expert block
        # (assigning into chained reshaped views is not write-safe in numpy)
        dex = g[self.gate_size :].reshape(N_EXPERTS, self.expert_size)
        dex[:, 4 * e] = dlogits.sum(axis=0)
        dex[:, 3 * e : 4 * e] = np.einsum("beh,be->eh", ea1, dlogits, optimize=True)
        dea1 = dlogits[:, :, None] * e2[None, :, :, 0]  # (B, E, h)
        dez1 = dea1 * (ez1 > 0)
        dex[:, : 2 * e] = np.einsum("bd,beh->edh", x, dez1, optimize=True).reshape(
            N_EXPERTS, 2 * e
        )
        dex[:, 2 * e : 3 * e] = dez1.sum(axis=0)

        # softmax backward, then the gate MLP
        dgate_logits = p * (dp - (dp * p).sum(axis=1, keepdims=True))
        dgz1 = (dgate_logits @ g2.T) * (gz1 > 0)
        o = 0
        g[o : o + 2 * h] = (x.T @ dgz1).ravel()
        o += 2 * h
        g[o : o + h] = dgz1.sum(axis=0)
        o += h
        g[o : o + h * N_EXPERTS] = (ga1.T @ dgate_logits).ravel()
        o += h * N_EXPERTS
        g[o : o + N_EXPERTS] = dgate_logits.sum(axis=0)
        return g

    def test_metrics(self, w) -> dict:
        x, y = self.test.features, self.test.targets
        z = self.predict_logit(w, x)
        return {
            "test_loss": float(np.mean(bce_with_logits(z, y))),
            "test_accuracy": float(np.mean((z > 0) == (y > 0.5))),
        }


def moe_problem(
    rng: np.random.Generator,
    n_train: int = 1000,
    n_test: int = 200,
    flip_fraction: float = 0.10,
) -> MoeProblem:
    return MoeProblem(rng, n_train=n_train, n_test=n_test, flip_fraction=flip_fraction)
