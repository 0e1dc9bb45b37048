"""Core data model for loss problems: parameter grouping, datasets, contract.

A problem owns a flat float64 parameter vector of dimension D partitioned
into K named, contiguous, disjoint groups. ``loss`` and ``grad`` are pure
functions of (w, batch); batches index into the training split, ``None``
means full batch (and is the only mode for the 2-D toy functions, which have
no dataset at all).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import LengthMismatch


@dataclass(frozen=True)
class GroupLayout:
    """Partition of a D-dimensional parameter vector into K named segments.

    Segments are contiguous, disjoint, listed in order, and cover [0, D).
    """

    names: tuple[str, ...]
    offsets: tuple[int, ...]
    lengths: tuple[int, ...]

    @staticmethod
    def from_sizes(named_sizes: Sequence[tuple[str, int]]) -> "GroupLayout":
        names, offsets, lengths = [], [], []
        cursor = 0
        for name, size in named_sizes:
            names.append(name)
            offsets.append(cursor)
            lengths.append(int(size))
            cursor += int(size)
        layout = GroupLayout(tuple(names), tuple(offsets), tuple(lengths))
        layout.validate()
        return layout

    @property
    def k(self) -> int:
        return len(self.names)

    @property
    def dim(self) -> int:
        return sum(self.lengths)

    def slice(self, group: int) -> slice:
        return slice(self.offsets[group], self.offsets[group] + self.lengths[group])

    def slices(self) -> list[slice]:
        return [self.slice(i) for i in range(self.k)]

    def index_of(self, name: str) -> int:
        return self.names.index(name)

    def validate(self) -> None:
        """Check the partition invariants; raises LengthMismatch otherwise."""
        if self.k < 1:
            raise LengthMismatch("layout needs at least one group")
        if not (len(self.names) == len(self.offsets) == len(self.lengths)):
            raise LengthMismatch("names/offsets/lengths lengths differ")
        cursor = 0
        for name, off, length in zip(self.names, self.offsets, self.lengths):
            if length < 1:
                raise LengthMismatch(f"group {name!r} has length {length} < 1")
            if off != cursor:
                raise LengthMismatch(
                    f"group {name!r} starts at {off}, expected {cursor} "
                    "(segments must be contiguous and in order)"
                )
            cursor += length
        if len(set(self.names)) != self.k:
            raise LengthMismatch("group names must be unique")

    def expand(self, per_group: np.ndarray) -> np.ndarray:
        """Broadcast one value per group to a length-D per-coordinate vector."""
        per_group = np.asarray(per_group, dtype=np.float64)
        if per_group.shape != (self.k,):
            raise LengthMismatch(f"expected {self.k} per-group values, got {per_group.shape}")
        return np.repeat(per_group, self.lengths)

    def group_norms(self, vec: np.ndarray) -> np.ndarray:
        if vec.shape != (self.dim,):
            raise LengthMismatch(f"vector shape {vec.shape} != ({self.dim},)")
        return np.array([np.linalg.norm(vec[s]) for s in self.slices()])


@dataclass
class Dataset:
    """Feature/target matrices for one split."""

    features: np.ndarray  # (n, d)
    targets: np.ndarray  # (n,) or (n, m)
    split: str = "full"

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.targets = np.asarray(self.targets, dtype=np.float64)
        if self.features.shape[0] != self.targets.shape[0]:
            raise LengthMismatch(
                f"{self.features.shape[0]} feature rows vs {self.targets.shape[0]} target rows"
            )

    @property
    def n(self) -> int:
        return self.features.shape[0]

    def take(self, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.features[idx], self.targets[idx]


def split_dataset(ds: Dataset, train_fraction: float = 0.8) -> tuple[Dataset, Dataset]:
    """Deterministic head/tail split (rows assumed already in random order)."""
    n_train = int(round(ds.n * train_fraction))
    tr = Dataset(ds.features[:n_train], ds.targets[:n_train], split="train")
    te = Dataset(ds.features[n_train:], ds.targets[n_train:], split="test")
    return tr, te


class LossProblem:
    """Contract every problem in the zoo implements.

    Subclasses set ``dim``, ``default_layout``, ``train``/``test`` (None for
    pure functions) and implement ``loss``/``grad``/``init_params``.
    """

    dim: int
    default_layout: GroupLayout
    train: Optional[Dataset] = None
    test: Optional[Dataset] = None
    name: str = "problem"

    def init_params(self, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def loss(self, w: np.ndarray, batch: Optional[np.ndarray] = None) -> float:
        raise NotImplementedError

    def grad(self, w: np.ndarray, batch: Optional[np.ndarray] = None) -> np.ndarray:
        raise NotImplementedError

    def test_metrics(self, w: np.ndarray) -> Optional[dict]:
        """Loss (and accuracy, where classification) on the test split."""
        return None

    def check_w(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=np.float64)
        if w.shape != (self.dim,):
            raise LengthMismatch(f"parameter shape {w.shape} != ({self.dim},)")
        return w

    def resolve_batch(self, batch: Optional[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
        """Feature/target rows for a batch of train indices (None = all)."""
        if self.train is None:
            raise LengthMismatch(f"problem {self.name!r} has no dataset")
        if batch is None:
            return self.train.features, self.train.targets
        batch = np.asarray(batch)
        if batch.size == 0:
            raise LengthMismatch("batch must be nonempty")
        return self.train.take(batch)


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def bce_with_logits(z: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Elementwise binary cross-entropy, numerically stable in the logit."""
    return np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))
