"""Run configuration shared by the command-line subcommands.

A config file is a JSON object whose keys are the fields of
:class:`RunConfig`; unknown keys are rejected. The ``fhn`` entry is an object
of :class:`~kernel_koopman.fhn.FhnConfig` overrides.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .fhn import FhnConfig
from .kernels import parse_kernel
from .numerics import TruncationPolicy

__all__ = ["RunConfig", "load_config"]


@dataclass
class RunConfig:
    data: str | None = None  # snapshot file for fit
    states: str | None = None  # states file for eval
    out: str = "out"
    kernel: str = "polynomial:20"
    rank: int | None = 150
    threshold: float | None = None
    normalize: bool = True
    seed: int = 0
    select: str = "slowest-decay"
    top: int = 10
    tol: float = 1e-6
    format: str = "kdmd"  # snapshot format written by simulate: kdmd or csv
    fhn: dict = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        try:
            parse_kernel(self.kernel)
            self.policy()
            self.fhn_config()
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from None
        if self.select not in ("slowest-decay", "largest-magnitude", "top-n"):
            raise ConfigError(f"unknown selection criterion {self.select!r}")
        if self.format not in ("kdmd", "csv"):
            raise ConfigError(f"unknown snapshot format {self.format!r}")
        if self.top < 0 or self.tol < 0:
            raise ConfigError("top and tol must be non-negative")
        return self

    def policy(self) -> TruncationPolicy:
        if self.threshold is not None:
            return TruncationPolicy.relative(self.threshold)
        if self.rank is None:
            raise ConfigError("either rank or threshold must be set")
        return TruncationPolicy.fixed_rank(self.rank)

    def fhn_config(self) -> FhnConfig:
        known = {f.name for f in dataclasses.fields(FhnConfig)}
        bad = set(self.fhn) - known
        if bad:
            raise ConfigError(f"unknown fhn keys: {sorted(bad)}")
        opts = dict(self.fhn)
        opts.setdefault("rng_seed", self.seed)
        if "forcing_centers" in opts:
            opts["forcing_centers"] = tuple(opts["forcing_centers"])
        return FhnConfig(**opts)


def load_config(path: str | Path | None, **overrides) -> RunConfig:
    """Build a config from an optional JSON file plus non-``None`` overrides."""
    values = {}
    if path is not None:
        try:
            values = json.loads(Path(path).read_text())
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(values, dict):
            raise ConfigError("config must be a JSON object")
    known = {f.name for f in dataclasses.fields(RunConfig)}
    bad = set(values) - known
    if bad:
        raise ConfigError(f"unknown config keys: {sorted(bad)}")
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    return cfg.validate()
