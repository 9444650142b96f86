"""Tolerance configuration threaded through every numerical routine."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError


@dataclass(frozen=True)
class ToleranceConfig:
    """All numerical thresholds used by hslab, with their defaults.

    Relative thresholds are scaled by the operator norm of the matrix
    under study where the owning routine says so.
    """

    # singular values below rank_rel * sigma_max count as zero
    rank_rel: float = 1e-10
    # eigenvalues closer than cluster_rel * (1 + ||t||) merge into one atom
    cluster_rel: float = 1e-7
    # default capture radius of PointSet regions
    match_tol: float = 1e-7
    unitary: float = 1e-10
    schur_residual: float = 1e-10
    swap_sep: float = 1e-12
    hermitian: float = 1e-10
    invariance: float = 1e-8
    idempotent: float = 1e-9
    decomposition: float = 1e-7
    commute: float = 1e-8
    angle_zero: float = 1e-10
    # minimal |log(|lambda| / r)| accepted by the power-limit route
    gap_min: float = 0.05
    growth_slack: float = 0.1
    power_n: int = 256

    def cluster_tol(self, norm):
        return self.cluster_rel * (1.0 + norm)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name: f for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise ConfigError(f"unknown tolerance keys: {', '.join(unknown)}")
        values = {}
        for key, value in data.items():
            kind = int if known[key].type in ("int", int) else float
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"tolerance {key!r} must be a number, got {value!r}")
            if value < 0:
                raise ConfigError(f"tolerance {key!r} must be nonnegative")
            values[key] = kind(value)
        return cls(**values)

    @classmethod
    def from_json(cls, path):
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: tolerance file must hold a JSON object")
        return cls.from_dict(data)


DEFAULT_TOLS = ToleranceConfig()
