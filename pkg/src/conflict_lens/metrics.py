"""Distances between step CDFs and the pairwise conflict report.

Both distances are evaluated exactly on the union of the two supports: the
CDFs are constant between consecutive union points, so the K-S maximum is
attained on the grid and the area is a finite sum of rectangles.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .ecdf import StepFunction, build_ecdf, evaluate, union_support
from .errors import EmptyInput, MissingKey
from .profile import Key, Profile, extract_series

THROUGHPUT = "tx_brate_dl_mbps"
BUFFER = "dl_buffer_bytes"
PRB = "slice_prb"
VARIABLES = (PRB, BUFFER, THROUGHPUT)


def _gaps(a: StepFunction, b: StepFunction) -> tuple[np.ndarray, np.ndarray]:
    # the union grid covers both supports by construction, so skip the superset check
    grid = union_support([a, b])
    return grid, np.abs(evaluate(a, grid) - evaluate(b, grid))


def ks_distance(a: StepFunction, b: StepFunction) -> float:
    """Largest vertical gap between the two step functions."""
    _, gap = _gaps(a, b)
    return float(gap.max())


def int_distance(a: StepFunction, b: StepFunction) -> float:
    """Area between the two CDFs divided by the span of their joint support.

    Equals the Wasserstein-1 distance divided by the span.  Two identical
    point masses have zero span; they are reported as 0 (see
    :func:`is_degenerate`).
    """
    grid, gap = _gaps(a, b)
    if grid.size < 2:
        return 0.0
    span = grid[-1] - grid[0]
    area = float(np.dot(gap[:-1], np.diff(grid)))
    # mathematically area/span <= max gap; clamp away last-ulp rounding
    return min(area / span, float(gap.max()))


def is_degenerate(a: StepFunction, b: StepFunction) -> bool:
    """True when both inputs are the same single point mass (0/0 INT distance)."""
    return a.support.size == 1 and b.support.size == 1 and a.support[0] == b.support[0]


@dataclass(frozen=True)
class DistancePair:
    ks: float
    integral: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {"ks": self.ks, "int": self.integral}


def distance_pair(a: StepFunction, b: StepFunction) -> DistancePair:
    return DistancePair(ks_distance(a, b), int_distance(a, b), is_degenerate(a, b))


def severity_index(pairs: Mapping[Key, DistancePair], kpm_keys: Sequence[Key]) -> float:
    """Mean INT distance over the KPM keys."""
    if not kpm_keys:
        raise EmptyInput("severity index needs at least one KPM key")
    total = 0.0
    for key in kpm_keys:
        key = tuple(key)
        if key not in pairs:
            raise MissingKey(f"no distance computed for KPM key {key[0]}:{key[1]}")
        total += pairs[key].integral
    return total / len(kpm_keys)


def default_kpm_keys(slices: Sequence[str]) -> list[Key]:
    """Throughput and buffer occupancy for every slice."""
    return [(var, s) for s in slices for var in (THROUGHPUT, BUFFER)]


@dataclass(frozen=True)
class ConflictReport:
    app_a: str
    app_b: str
    per_variable: dict[Key, DistancePair]
    severity: float
    severity_kpms: list[Key] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "app_a": self.app_a,
            "app_b": self.app_b,
            "per_variable": [
                {"variable": var, "slice": s, **pair.to_dict()}
                for (var, s), pair in self.per_variable.items()
            ],
            "severity": self.severity,
            "severity_kpms": [{"variable": var, "slice": s} for var, s in self.severity_kpms],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ConflictReport":
        per_variable = {
            (row["variable"], row["slice"]): DistancePair(row["ks"], row["int"])
            for row in data["per_variable"]
        }
        kpms = [(row["variable"], row["slice"]) for row in data["severity_kpms"]]
        return cls(data["app_a"], data["app_b"], per_variable, data["severity"], kpms)

    def write(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")


def conflict_report(
    profile_a: Profile,
    profile_b: Profile,
    variables: Sequence[Key],
    kpm_keys: Sequence[Key],
) -> ConflictReport:
    """Per-variable distances between two individual profiles plus the severity index."""
    per_variable: dict[Key, DistancePair] = {}
    for var, s in variables:
        ea = build_ecdf(extract_series(profile_a, var, s))
        eb = build_ecdf(extract_series(profile_b, var, s))
        per_variable[(var, s)] = distance_pair(ea, eb)
    kpms = [tuple(k) for k in kpm_keys]
    sigma = severity_index(per_variable, kpms)
    return ConflictReport(profile_a.app_id, profile_b.app_id, per_variable, sigma, kpms)
