"""Problem zoo: registry plus re-exports of the individual constructors."""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..errors import ValidationError
from .base import (
    Dataset,
    GroupLayout,
    LossProblem,
    bce_with_logits,
    sigmoid,
    split_dataset,
)
from .grouping import STRATEGIES, group_params
from .lora import LoraRegressionProblem, lora_regression_problem
from .moe import MoeProblem, moe_label_rule, moe_problem
from .multitask import MultitaskHeadProblem, multitask_head_problem
from .nam import (
    NAM_FEATURE_FNS,
    NamProblem,
    make_nam_synthetic,
    nam_problem,
)
from .tabular import load_csv_tabular
from .toy2d import (
    FunctionProblem,
    beale,
    beale_grad,
    beale_rosenbrock_problem,
    ellipse_problem,
    quadratic_problem,
    rosenbrock,
    rosenbrock_grad,
)

__all__ = [
    "Dataset",
    "GroupLayout",
    "LossProblem",
    "FunctionProblem",
    "NamProblem",
    "LoraRegressionProblem",
    "MoeProblem",
    "MultitaskHeadProblem",
    "PROBLEM_NAMES",
    "STRATEGIES",
    "bce_with_logits",
    "beale",
    "beale_grad",
    "beale_rosenbrock_problem",
    "build_problem",
    "ellipse_problem",
    "group_params",
    "load_csv_tabular",
    "lora_regression_problem",
    "make_nam_synthetic",
    "moe_label_rule",
    "moe_problem",
    "multitask_head_problem",
    "nam_problem",
    "NAM_FEATURE_FNS",
    "quadratic_problem",
    "rosenbrock",
    "rosenbrock_grad",
    "sigmoid",
    "split_dataset",
    "group_params",
]


def _build_ellipse(rng, **kw):
    return ellipse_problem()


def _build_beale_rosenbrock(rng, **kw):
    return beale_rosenbrock_problem()


def _build_nam_synthetic(rng, hidden_sizes=(32, 32)):
    return NamProblem(make_nam_synthetic(rng), hidden_sizes=tuple(hidden_sizes))


def _build_california(rng, csv_path, target_column="MedHouseVal", split_seed=0,
                      hidden_sizes=(32, 32)):
    splits = load_csv_tabular(csv_path, target_column, seed=split_seed)
    return NamProblem(splits, hidden_sizes=tuple(hidden_sizes))


def _build_lora(rng, width=64, rank=4, n_train=1000):
    return lora_regression_problem(rng, width=width, rank=rank, n_train=n_train)


def _build_moe(rng, n_train=1000, n_test=200, flip_fraction=0.10):
    return moe_problem(rng, n_train=n_train, n_test=n_test, flip_fraction=flip_fraction)


def _build_multitask(rng, n_tasks=8, n_train=2048, n_test=512):
    return multitask_head_problem(rng, n_tasks, n_train=n_train, n_test=n_test)


# name -> (builder, parameter names it accepts, parameter names it requires)
_REGISTRY = {
    "ellipse": (_build_ellipse, set(), set()),
    "beale-rosenbrock": (_build_beale_rosenbrock, set(), set()),
    "nam-synthetic": (_build_nam_synthetic, {"hidden_sizes"}, set()),
    "california-housing": (
        _build_california,
        {"csv_path", "target_column", "split_seed", "hidden_sizes"},
        {"csv_path"},
    ),
    "lora-synthetic": (_build_lora, {"width", "rank", "n_train"}, set()),
    "moe": (_build_moe, {"n_train", "n_test", "flip_fraction"}, set()),
    "multitask": (_build_multitask, {"n_tasks", "n_train", "n_test"}, set()),
}

PROBLEM_NAMES = tuple(sorted(_REGISTRY))


def build_problem(
    name: str,
    rng: np.random.Generator,
    params: Optional[dict] = None,
) -> LossProblem:
    """Instantiate a zoo problem by name.

    ``params`` supplies problem-specific keyword arguments; unknown names
    and unknown parameter keys are rejected rather than ignored.
    """
    if name not in _REGISTRY:
        raise ValidationError(
            f"unknown problem {name!r}; known: {', '.join(PROBLEM_NAMES)}"
        )
    builder, allowed, required = _REGISTRY[name]
    params = dict(params or {})
    unknown = sorted(set(params) - allowed)
    if unknown:
        raise ValidationError(
            f"problem {name!r} does not accept parameter(s) {unknown}; "
            f"allowed: {sorted(allowed) or 'none'}"
        )
    missing = sorted(required - set(params))
    if missing:
        raise ValidationError(f"problem {name!r} requires parameter(s) {missing}")
    return builder(rng, **params)
