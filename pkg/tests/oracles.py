"""Brute-force reference computations, deliberately independent of the package code paths."""
from __future__ import annotations

from fractions import Fraction


def count_cdf(samples, x):
    """Fraction of samples <= x, by direct counting."""
    return sum(1 for s in samples if s <= x) / len(samples)


def brute_ks(xs, ys):
    """Max CDF gap over every sample value (the step functions only jump there)."""
    points = set(xs) | set(ys)
    return max(abs(count_cdf(xs, p) - count_cdf(ys, p)) for p in points)


def sorted_matching_w1(xs, ys):
    """Wasserstein-1 for equal-size samples: mean |x_(k) - y_(k)| after sorting both."""
    assert len(xs) == len(ys)
    return sum(abs(a - b) for a, b in zip(sorted(xs), sorted(ys))) / len(xs)


def step_cdf(support, probs, x):
    """Evaluate a step CDF by linear scan."""
    value = 0.0
    for s, p in zip(support, probs):
        if s <= x:
            value = p
    return value


def grid_occupancy(periods, offsets, horizon, resolution):
    """Time share each app is last writer, by walking a fine time grid.

    Uses exact fractions; at equal instants the later-listed app wins.
    Time before the first write is excluded.
    """
    periods = [Fraction(str(p)) for p in periods]
    offsets = [Fraction(str(o)) for o in offsets]
    step = Fraction(str(resolution))
    counts = [0] * len(periods)
    t = Fraction(0)
    end = Fraction(str(horizon))
    while t < end:
        best = None
        for i, (p, o) in enumerate(zip(periods, offsets)):
            if t < o:
                continue
            last = o + ((t - o) // p) * p
            if best is None or last >= best[0]:
                best = (last, i)
        if best is not None:
            counts[best[1]] += 1
        t += step
    total = sum(counts)
    return [c / total for c in counts]
