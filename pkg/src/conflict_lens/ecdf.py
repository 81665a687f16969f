"""Empirical CDFs and the support-vector algebra shared by every other module.

An ECDF is stored as a right-continuous step function: a strictly increasing
``support`` and the cumulative probability reached at each support point.
Anything exposing ``support`` and ``probs`` arrays (for instance a predicted
CDF) can be passed where a step function is expected.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Protocol, Sequence

import numpy as np

from .errors import EmptyInput, NonFiniteSample, ProfileFormatError, SupportNotCovered
from .profile import format_number, parse_number

ECDF_HEADER = ("x", "y")


class StepFunction(Protocol):
    support: np.ndarray
    probs: np.ndarray


def _validate_step(support: np.ndarray, probs: np.ndarray) -> None:
    if support.ndim != 1 or probs.shape != support.shape:
        raise ValueError("support and probs must be 1-D arrays of equal length")
    if support.size == 0:
        raise EmptyInput("an ECDF needs at least one support point")
    if not np.all(np.isfinite(support)):
        raise NonFiniteSample("support contains non-finite values")
    if support.size > 1 and not np.all(np.diff(support) > 0):
        raise ValueError("support must be strictly increasing")
    if probs.size > 1 and not np.all(np.diff(probs) >= 0):
        raise ValueError("probs must be non-decreasing")
    if not (probs[0] > 0 and probs[-1] == 1.0):
        raise ValueError("probs must lie in (0, 1] and end at exactly 1")


@dataclass(frozen=True, eq=False)
class Ecdf:
    """Right-continuous empirical CDF.

    ``sample_count`` is informational and does not take part in equality: two
    ECDFs are equal when they are the same step function.
    """

    support: np.ndarray
    probs: np.ndarray
    sample_count: Optional[int] = None

    def __post_init__(self) -> None:
        support = np.array(self.support, dtype=float)
        probs = np.array(self.probs, dtype=float)
        _validate_step(support, probs)
        support.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Ecdf):
            return NotImplemented
        return np.array_equal(self.support, other.support) and np.array_equal(
            self.probs, other.probs
        )

    def __len__(self) -> int:
        return int(self.support.size)

    def __call__(self, x: float | np.ndarray) -> np.ndarray:
        """Evaluate the step function at arbitrary points."""
        return evaluate(self, x)


def build_ecdf(samples: Sequence[float] | np.ndarray) -> Ecdf:
    """ECDF of ``samples``; duplicate values collapse into one support point.

    >>> e = build_ecdf([1, 2, 2, 3])
    >>> e.support.tolist(), e.probs.tolist()
    ([1.0, 2.0, 3.0], [0.25, 0.75, 1.0])
    """
    arr = np.asarray(samples, dtype=float).ravel()
    if arr.size == 0:
        raise EmptyInput("cannot build an ECDF from zero samples")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteSample("samples contain NaN or infinity")
    support, counts = np.unique(arr, return_counts=True)
    probs = np.cumsum(counts) / arr.size
    return Ecdf(support, probs, sample_count=int(arr.size))


def union_support(ecdfs: Iterable[StepFunction]) -> np.ndarray:
    """Sorted, de-duplicated union of the supports."""
    supports = [np.asarray(e.support, dtype=float) for e in ecdfs]
    if not supports:
        raise EmptyInput("union_support needs at least one ECDF")
    if len(supports) == 1:
        return supports[0].copy()
    return np.unique(np.concatenate(supports))


def evaluate(step: StepFunction, x: float | np.ndarray) -> np.ndarray:
    """F(x) = probs at the largest support point <= x, and 0 left of the support."""
    pos = np.searchsorted(step.support, np.asarray(x, dtype=float), side="right") - 1
    padded = np.concatenate(([0.0], step.probs))
    return padded[pos + 1]


def step_interpolate(ecdf: StepFunction, common: np.ndarray) -> np.ndarray:
    """Values of ``ecdf`` on ``common``, which must contain every support point."""
    common = np.asarray(common, dtype=float)
    support = ecdf.support
    idx = np.searchsorted(common, support)
    inside = idx < common.size
    if not (np.all(inside) and np.array_equal(common[idx], support)):
        missing = support[~inside] if not np.all(inside) else support[common[idx] != support]
        raise SupportNotCovered(
            f"common grid omits {missing.size} support point(s), first {missing[0]!r}"
        )
    if common.size > 1 and not np.all(np.diff(common) > 0):
        raise ValueError("common grid must be strictly increasing")
    return evaluate(ecdf, common)


def write_ecdf(step: StepFunction, path: str | Path) -> None:
    lines = ["\t".join(ECDF_HEADER)]
    lines += [
        f"{format_number(x)}\t{format_number(y)}" for x, y in zip(step.support, step.probs)
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_ecdf(path: str | Path) -> Ecdf:
    xs: list[float] = []
    ys: list[float] = []
    with Path(path).open(encoding="utf-8") as fh:
        rows = [line.rstrip("\r\n") for line in fh if line.strip()]
    if not rows or tuple(rows[0].split("\t")) != ECDF_HEADER:
        raise ProfileFormatError(f"{path}: expected header 'x<TAB>y'")
    for lineno, row in enumerate(rows[1:], start=2):
        cols = row.split("\t")
        if len(cols) != 2:
            raise ProfileFormatError(f"{path}:{lineno}: expected 2 columns")
        xs.append(parse_number(cols[0]))
        ys.append(parse_number(cols[1]))
    return Ecdf(np.array(xs), np.array(ys))
