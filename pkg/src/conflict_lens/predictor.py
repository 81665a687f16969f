"""Weighted ECDF average: predict the distribution of each RAN variable when
several apps share it under last-writer-wins.

Each app's individual ECDF is step-interpolated onto the merged support and
the results are mixed with one weight per app.  Weights come either from the
message rates alone (``RATE``) or from the share of time each app's action is
actually in force (``EFFECTIVE``), which also accounts for phase offsets
between apps.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .ecdf import Ecdf, StepFunction, build_ecdf, step_interpolate, union_support
from .errors import (
    ConfigMismatch,
    EmptyInput,
    HoldExceedsPeriod,
    InconsistentTiming,
    LengthMismatch,
    NonPositivePeriod,
)
from .metrics import DistancePair, distance_pair
from .profile import Key, Profile, extract_series

# upper bound on firings enumerated over one hyperperiod
MAX_TIMELINE_EVENTS = 1_000_000


def _exact(x: float) -> Fraction:
    return Fraction(repr(float(x)))


@dataclass(frozen=True)
class TimingSpec:
    """When an app acts: every ``period`` seconds starting at ``offset``.

    ``hold`` is how long each action stays in force before another app
    overwrites it.  Leave it ``None`` to derive it from the schedule.
    """

    period: float
    offset: float = 0.0
    hold: Optional[float] = None

    def __post_init__(self) -> None:
        if not (self.period > 0 and math.isfinite(self.period)):
            raise NonPositivePeriod(f"period must be > 0, got {self.period!r}")
        if not (0 <= self.offset < self.period):
            raise InconsistentTiming(
                f"offset must satisfy 0 <= offset < period, got {self.offset!r}"
            )
        if self.hold is not None:
            if not self.hold > 0:
                raise InconsistentTiming(f"hold must be > 0, got {self.hold!r}")
            if self.hold > self.period:
                raise HoldExceedsPeriod(f"hold {self.hold!r} exceeds period {self.period!r}")


class WeightMode(str, enum.Enum):
    RATE = "RATE"
    EFFECTIVE = "EFFECTIVE"
    # 1/hold substituted into the rate formula; kept for comparison only
    EFFECTIVE_LITERAL = "EFFECTIVE_LITERAL"


@dataclass(frozen=True)
class WeightVector:
    weights: tuple[float, ...]
    mode: WeightMode = WeightMode.RATE

    def __post_init__(self) -> None:
        w = tuple(float(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        if not w:
            raise EmptyInput("weight vector is empty")
        if any(not x > 0 for x in w):
            raise ValueError(f"weights must be positive, got {w}")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {math.fsum(w)!r}")

    def __len__(self) -> int:
        return len(self.weights)


def _normalize(raw: Sequence[Fraction], mode: WeightMode) -> WeightVector:
    total = sum(raw)
    return WeightVector(tuple(float(r / total) for r in raw), mode)


def rate_weights(periods: Sequence[float]) -> WeightVector:
    """w_i = (1/tau_i) / sum_j (1/tau_j), in exact rational arithmetic."""
    if len(periods) == 0:
        raise EmptyInput("need at least one period")
    for p in periods:
        if not (p > 0 and math.isfinite(p)):
            raise NonPositivePeriod(f"period must be > 0, got {p!r}")
    return _normalize([1 / _exact(p) for p in periods], WeightMode.RATE)


def _hyperperiod(periods: Sequence[Fraction]) -> Fraction:
    den = math.lcm(*(p.denominator for p in periods))
    num = math.lcm(*(p.numerator * (den // p.denominator) for p in periods))
    return Fraction(num, den)


def timeline_holds(timings: Sequence[TimingSpec]) -> list[float]:
    """Mean time each app's action stays in force, from the firing schedule.

    Walks one hyperperiod of the periodic schedule.  Simultaneous firings are
    ordered by list position, so the later-listed app overwrites the earlier
    one immediately (a zero hold for the earlier one).
    """
    if not timings:
        raise EmptyInput("need at least one timing")
    periods = [_exact(t.period) for t in timings]
    offsets = [_exact(t.offset) for t in timings]
    horizon = _hyperperiod(periods)
    counts = [int(horizon / p) for p in periods]
    if sum(counts) > MAX_TIMELINE_EVENTS:
        raise InconsistentTiming(
            f"schedule repeats only every {float(horizon)} s; supply holds explicitly"
        )
    events = sorted(
        (off + k * p, i)
        for i, (p, off, n) in enumerate(zip(periods, offsets, counts))
        for k in range(n)
    )
    active = [Fraction(0)] * len(timings)
    for (t, i), (t_next, _) in zip(events, events[1:] + [(events[0][0] + horizon, -1)]):
        active[i] += t_next - t
    return [float(a / n) for a, n in zip(active, counts)]


def effective_weights(
    timings: Sequence[TimingSpec], literal: bool = False
) -> WeightVector:
    """Weights proportional to the fraction of time each app's action is in force.

    With explicit holds the fraction is ``hold / period``.  Without holds all
    apps must share one period and have distinct offsets; holds then follow
    from the gaps between consecutive offsets.

    ``literal=True`` instead plugs the hold into the rate formula as an
    effective period (w_i proportional to 1/hold_i).
    """
    if not timings:
        raise EmptyInput("need at least one timing")
    have = [t.hold is not None for t in timings]
    if all(have):
        holds = [t.hold for t in timings]
    elif any(have):
        raise InconsistentTiming("either every timing carries a hold or none does")
    else:
        if len({t.period for t in timings}) != 1:
            raise InconsistentTiming("holds are required when periods differ")
        if len({t.offset for t in timings}) != len(timings):
            raise InconsistentTiming("offsets must be distinct to derive holds")
        holds = timeline_holds(timings)
    for t, h in zip(timings, holds):
        if not h > 0:
            raise InconsistentTiming(f"hold must be > 0, got {h!r}")
        if h > t.period:
            raise HoldExceedsPeriod(f"hold {h!r} exceeds period {t.period!r}")
    if literal:
        return _normalize([1 / _exact(h) for h in holds], WeightMode.EFFECTIVE_LITERAL)
    return _normalize(
        [_exact(h) / _exact(t.period) for t, h in zip(timings, holds)], WeightMode.EFFECTIVE
    )


def choose_weights(timings: Sequence[TimingSpec]) -> WeightVector:
    """EFFECTIVE when holds or distinguishing offsets are known, else RATE."""
    if any(t.hold is not None for t in timings):
        return effective_weights(timings)
    if len(timings) > 1 and len({t.offset for t in timings}) == len(timings):
        holds = timeline_holds(timings)
        if all(h > 0 for h in holds):
            return effective_weights(
                [TimingSpec(t.period, t.offset, h) for t, h in zip(timings, holds)]
            )
    return rate_weights([t.period for t in timings])


@dataclass(frozen=True, eq=False)
class PredictedCdf:
    support: np.ndarray
    probs: np.ndarray
    weights: WeightVector
    inputs: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        support = np.asarray(self.support, dtype=float)
        probs = np.asarray(self.probs, dtype=float)
        if support.size == 0 or probs.shape != support.shape:
            raise ValueError("support and probs must be non-empty and equally long")
        if support.size > 1 and not (
            np.all(np.diff(support) > 0) and np.all(np.diff(probs) >= 0)
        ):
            raise ValueError("predicted CDF must have increasing support and monotone probs")
        if not (probs[0] >= 0 and probs[-1] == 1.0):
            raise ValueError("predicted CDF must lie in [0, 1] and end at 1")
        support.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "inputs", tuple(self.inputs))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PredictedCdf):
            return NotImplemented
        return (
            np.array_equal(self.support, other.support)
            and np.array_equal(self.probs, other.probs)
            and self.weights == other.weights
            and self.inputs == other.inputs
        )

    def as_ecdf(self) -> Ecdf:
        return Ecdf(self.support, self.probs)


def weighted_ecdf_average(
    ecdfs: Sequence[StepFunction],
    weights: WeightVector,
    inputs: Sequence[str] = (),
) -> PredictedCdf:
    if len(ecdfs) == 0:
        raise EmptyInput("need at least one ECDF")
    if len(ecdfs) != len(weights):
        raise LengthMismatch(f"{len(ecdfs)} ECDFs but {len(weights)} weights")
    grid = union_support(ecdfs)
    probs = np.zeros_like(grid)
    for e, w in zip(ecdfs, weights.weights):
        probs += w * step_interpolate(e, grid)
    np.minimum(probs, 1.0, out=probs)
    probs[-1] = 1.0
    return PredictedCdf(grid, probs, weights, tuple(inputs))


@dataclass(frozen=True)
class PredictionReport:
    per_variable: dict[Key, PredictedCdf]
    comparison: Optional[dict[Key, DistancePair]] = None
    config_label: str = ""

    def to_dict(self) -> dict:
        out: dict = {
            "config_label": self.config_label,
            "per_variable": [
                {
                    "variable": var,
                    "slice": s,
                    "support": cdf.support.tolist(),
                    "probs": cdf.probs.tolist(),
                    "weights": list(cdf.weights.weights),
                    "mode": cdf.weights.mode.value,
                    "inputs": list(cdf.inputs),
                }
                for (var, s), cdf in self.per_variable.items()
            ],
            "comparison": [],
        }
        if self.comparison:
            out["comparison"] = [
                {"variable": var, "slice": s, **pair.to_dict()}
                for (var, s), pair in self.comparison.items()
            ]
        return out

    def write(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")


def predict(
    profiles: Sequence[Profile],
    timings: Sequence[TimingSpec],
    variables: Sequence[Key],
    measured: Optional[Profile] = None,
    config_label: str = "",
    weights: Optional[WeightVector] = None,
) -> PredictionReport:
    """Predicted CDF for every requested variable, optionally scored against a measurement.

    ``weights`` overrides the automatic choice (see :func:`choose_weights`).
    """
    if len(profiles) != len(timings):
        raise ConfigMismatch(f"{len(profiles)} profiles but {len(timings)} timings")
    if not profiles:
        raise EmptyInput("need at least one profile")
    w = weights if weights is not None else choose_weights(timings)
    app_ids = tuple(p.app_id for p in profiles)
    per_variable: dict[Key, PredictedCdf] = {}
    comparison: Optional[dict[Key, DistancePair]] = {} if measured is not None else None
    for var, s in variables:
        ecdfs = [build_ecdf(extract_series(p, var, s)) for p in profiles]
        cdf = weighted_ecdf_average(ecdfs, w, app_ids)
        per_variable[(var, s)] = cdf
        if measured is not None:
            comparison[(var, s)] = distance_pair(cdf, build_ecdf(extract_series(measured, var, s)))
    return PredictionReport(per_variable, comparison, config_label)
