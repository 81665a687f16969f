"""Profiles: time series of RAN variables recorded while one app runs alone.

File layout (UTF-8, tab separated)::

    # app_id=es
    # scenario=default
    timestamp	variable	slice	value
    0	slice_prb	embb	15
    0.1	slice_prb	embb	12

Leading ``# key=value`` lines carry the profile metadata and are optional.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import NonFiniteSample, ProfileFormatError, UnknownSlice, UnknownVariable

PROFILE_HEADER = ("timestamp", "variable", "slice", "value")

Key = tuple[str, str]


def format_number(value: float) -> str:
    """Shortest text that parses back to exactly ``value``.

    Integral values are written without a trailing ``.0`` so PRB counts read
    naturally; everything else uses ``repr`` which round-trips bit-exactly.
    """
    value = float(value)
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def parse_number(text: str) -> float:
    try:
        value = float(text)
    except ValueError as exc:
        raise ProfileFormatError(f"not a number: {text!r}") from exc
    if not math.isfinite(value):
        raise NonFiniteSample(f"non-finite value: {text!r}")
    return value


@dataclass(frozen=True)
class Observation:
    timestamp: float
    variable: str
    slice: str
    value: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise NonFiniteSample(f"non-finite value for {self.variable}/{self.slice}")
        if not (self.timestamp >= 0 and math.isfinite(self.timestamp)):
            raise ProfileFormatError(f"invalid timestamp {self.timestamp!r}")


@dataclass(frozen=True)
class Profile:
    app_id: str
    observations: tuple[Observation, ...]
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        obs = tuple(self.observations)
        object.__setattr__(self, "observations", obs)
        object.__setattr__(self, "metadata", dict(self.metadata))
        for prev, cur in zip(obs, obs[1:]):
            if cur.timestamp < prev.timestamp:
                raise ProfileFormatError(
                    f"observations not sorted by timestamp at t={cur.timestamp}"
                )

    def keys(self) -> list[Key]:
        """(variable, slice) pairs covered, in order of first appearance."""
        seen: dict[Key, None] = {}
        for ob in self.observations:
            seen.setdefault((ob.variable, ob.slice), None)
        return list(seen)


def extract_series(profile: Profile, variable: str, slice: str) -> list[float]:
    """Values of one (variable, slice) pair in timestamp order."""
    values = [
        ob.value for ob in profile.observations if ob.variable == variable and ob.slice == slice
    ]
    if values:
        return values
    if not any(ob.variable == variable for ob in profile.observations):
        raise UnknownVariable(f"profile {profile.app_id!r} has no variable {variable!r}")
    raise UnknownSlice(
        f"profile {profile.app_id!r} has no slice {slice!r} for variable {variable!r}"
    )


def write_profile(profile: Profile, path: str | Path) -> None:
    lines = [f"# {k}={v}" for k, v in (("app_id", profile.app_id), *profile.metadata.items())]
    lines.append("\t".join(PROFILE_HEADER))
    for ob in profile.observations:
        lines.append(
            f"{format_number(ob.timestamp)}\t{ob.variable}\t{ob.slice}\t{format_number(ob.value)}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def parse_profile(lines: Iterable[str], app_id: str = "") -> Profile:
    meta: dict[str, str] = {}
    observations: list[Observation] = []
    header_seen = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line:
            continue
        if not header_seen:
            if line.startswith("#"):
                key, sep, value = line[1:].strip().partition("=")
                if sep:
                    meta[key.strip()] = value.strip()
                continue
            if tuple(line.split("\t")) != PROFILE_HEADER:
                raise ProfileFormatError(f"line {lineno}: expected header {PROFILE_HEADER}")
            header_seen = True
            continue
        cols = line.split("\t")
        if len(cols) != 4:
            raise ProfileFormatError(f"line {lineno}: expected 4 columns, got {len(cols)}")
        observations.append(
            Observation(parse_number(cols[0]), cols[1], cols[2], parse_number(cols[3]))
        )
    if not header_seen:
        raise ProfileFormatError("missing header row")
    app = meta.pop("app_id", app_id)
    return Profile(app_id=app, observations=tuple(observations), metadata=meta)


def read_profile(path: str | Path) -> Profile:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        return parse_profile(fh, app_id=path.name.split(".")[0])


def profile_from_columns(
    app_id: str,
    rows: Sequence[tuple[float, str, str, float]],
    metadata: Mapping[str, str] | None = None,
) -> Profile:
    """Build a Profile from ``(timestamp, variable, slice, value)`` rows, sorting stably by time."""
    ordered = sorted(rows, key=lambda r: r[0])
    return Profile(app_id, tuple(Observation(*r) for r in ordered), metadata or {})
