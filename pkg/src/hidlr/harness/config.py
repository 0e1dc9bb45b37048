"""Experiment configuration: YAML schema, defaulting, strict validation.

Unknown keys anywhere in the file are errors — a typo like ``lerning_rate``
should fail loudly rather than be silently ignored. Every run must name a
seed; there is no implicit entropy anywhere in the harness.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import yaml

from ..controller import HiDlrConfig
from ..errors import ParseError, ValidationError
from ..optim import OPTIMIZER_KINDS
from ..problems import PROBLEM_NAMES, STRATEGIES

METHODS = ("hidlr", "hiulr", "constant", "linear", "cosine", "grid")

_TOP_KEYS = {
    "problem",
    "problem_params",
    "grouping",
    "grouping_names",
    "method",
    "optimizer",
    "optimizer_params",
    "hidlr",
    "epochs",
    "iterations",
    "batch_size",
    "base_lr",
    "grid",
    "seed",
    "out_dir",
}
_HIDLR_KEYS = {
    "phi",
    "gamma",
    "r2_threshold",
    "eta0",
    "eta_min",
    "eta_max",
    "probe_floor",
    "gating",
    "fresh_probe_batch",
}
_OPT_KEYS = {"beta1", "beta2", "eps", "mu", "weight_decay", "decay_in_direction"}


@dataclass
class ExperimentConfig:
    """One training run, fully specified."""

    problem: str
    method: str
    seed: int
    problem_params: dict = field(default_factory=dict)
    grouping: str = "default"
    grouping_names: tuple = ()
    optimizer: str = "sgd"
    optimizer_params: dict = field(default_factory=dict)
    hidlr: HiDlrConfig = field(default_factory=HiDlrConfig)
    epochs: Optional[int] = None
    iterations: Optional[int] = None
    batch_size: Optional[int] = None
    base_lr: float = 1e-3
    grid: Optional[tuple] = None
    out_dir: Optional[str] = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError(
                f"method must be one of {METHODS}, got {self.method!r}"
            )
        if self.optimizer not in OPTIMIZER_KINDS:
            raise ValidationError(
                f"optimizer must be one of {OPTIMIZER_KINDS}, got {self.optimizer!r}"
            )
        if self.grouping not in STRATEGIES:
            raise ValidationError(
                f"grouping must be one of {STRATEGIES}, got {self.grouping!r}"
            )
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ValidationError(f"seed must be an integer, got {self.seed!r}")
        if self.epochs is not None and self.iterations is not None:
            raise ValidationError("give epochs or iterations, not both")
        for name in ("epochs", "iterations", "batch_size"):
            value = getattr(self, name)
            if value is not None and (not isinstance(value, int) or value < 1):
                raise ValidationError(f"{name} must be a positive integer, got {value!r}")
        if not self.base_lr > 0:
            raise ValidationError(f"base_lr must be positive, got {self.base_lr}")
        if self.grid is not None:
            self.grid = tuple(float(x) for x in self.grid)
            if not self.grid or any(x <= 0 for x in self.grid):
                raise ValidationError("grid must be a nonempty list of positive rates")
        self.grouping_names = tuple(self.grouping_names)
        if not isinstance(self.problem_params, dict):
            raise ValidationError("problem_params must be a mapping")


def _require_mapping(value, path: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ParseError(f"{path}: expected a mapping, got {type(value).__name__}")
    return value


def _check_keys(mapping: dict, allowed: set, path: str) -> None:
    unknown = sorted(set(mapping) - allowed)
    if unknown:
        where = f"{path}." if path else ""
        raise ParseError(
            f"unknown key(s) {', '.join(where + k for k in unknown)}; "
            f"allowed: {', '.join(sorted(allowed))}"
        )


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Validate a raw mapping (from YAML or overrides) into a config."""
    raw = _require_mapping(raw, "config")
    _check_keys(raw, _TOP_KEYS, "")
    for required in ("problem", "method", "seed"):
        if required not in raw:
            raise ValidationError(f"config is missing required key {required!r}")
    if raw["problem"] not in PROBLEM_NAMES:
        raise ValidationError(
            f"unknown problem {raw['problem']!r}; known: {', '.join(PROBLEM_NAMES)}"
        )

    hidlr_raw = _require_mapping(raw.get("hidlr"), "hidlr")
    _check_keys(hidlr_raw, _HIDLR_KEYS, "hidlr")
    opt_raw = _require_mapping(raw.get("optimizer_params"), "optimizer_params")
    _check_keys(opt_raw, _OPT_KEYS, "optimizer_params")
    problem_params = _require_mapping(raw.get("problem_params"), "problem_params")

    try:
        hidlr_cfg = HiDlrConfig(**hidlr_raw)
    except TypeError as exc:  # pragma: no cover - guarded by _check_keys
        raise ParseError(f"hidlr: {exc}") from None

    return ExperimentConfig(
        problem=raw["problem"],
        method=raw["method"],
        seed=raw["seed"],
        problem_params=dict(problem_params),
        grouping=raw.get("grouping", "default"),
        grouping_names=tuple(raw.get("grouping_names") or ()),
        optimizer=raw.get("optimizer", "sgd"),
        optimizer_params=dict(opt_raw),
        hidlr=hidlr_cfg,
        epochs=raw.get("epochs"),
        iterations=raw.get("iterations"),
        batch_size=raw.get("batch_size"),
        base_lr=float(raw.get("base_lr", 1e-3)),
        grid=raw.get("grid"),
        out_dir=raw.get("out_dir"),
    )


def load_config_dict(path) -> dict:
    """Read the YAML file into a raw mapping (no validation yet)."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"{path}: {exc}") from None
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ParseError(f"{path}: top level must be a mapping")
    return raw


def parse_config(path) -> ExperimentConfig:
    return config_from_dict(load_config_dict(path))


def apply_overrides(raw: dict, overrides: Sequence[str]) -> dict:
    """Apply ``dotted.key=value`` pairs; values are parsed as YAML scalars."""
    out = copy.deepcopy(raw)
    for item in overrides:
        if "=" not in item:
            raise ParseError(f"override {item!r} is not of the form key=value")
        key_path, _, value_text = item.partition("=")
        try:
            value = yaml.safe_load(value_text)
        except yaml.YAMLError:
            raise ParseError(f"override {item!r}: unparseable value") from None
        keys = key_path.split(".")
        target = out
        for k in keys[:-1]:
            nxt = target.get(k)
            if nxt is None:
                nxt = target[k] = {}
            elif not isinstance(nxt, dict):
                raise ParseError(f"override {item!r}: {k} is not a mapping")
            target = nxt
        target[keys[-1]] = value
    return out
