"""Discrete-time RAN slicing simulator with last-writer-wins control.

One cell with a PRB budget shared by a few slices.  Every slice is a fluid
queue whose service capacity is linear in its PRB allocation.  Control apps
fire on their own periodic schedules and each firing writes a complete
per-slice allocation; the most recent write is what the cell applies.

Each app keeps its own last-issued allocation and steps from there, so apps
interact only through the shared parameter and the KPMs, never by editing
one another's policy state.

All byte quantities are integers, which makes per-tick queue conservation
exact.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import EmptyTrace, InvalidConfig, NoWriters
from .metrics import BUFFER, PRB, THROUGHPUT
from .predictor import TimingSpec
from .profile import Observation, Profile, format_number

# bytes per second carried by 1 Mbps
BYTES_PER_MBIT = 125_000


@dataclass(frozen=True)
class SliceConfig:
    slice: str
    demand: float  # Mbps
    initial_prbs: int


DEFAULT_SLICES = (
    SliceConfig("embb", 2.0, 15),
    SliceConfig("mmtc", 1.0, 9),
    SliceConfig("urllc", 0.5, 6),
)


@dataclass(frozen=True)
class ScenarioConfig:
    total_prbs: int = 50
    rbg_size: int = 3
    slices: tuple[SliceConfig, ...] = DEFAULT_SLICES
    tick: float = 0.1
    duration: float = 600.0
    seed: int = 1
    capacity_per_prb: float = 0.25  # Mbps
    demand_jitter: float = 0.1

    def __post_init__(self) -> None:
        object.__setattr__(self, "slices", tuple(self.slices))
        self.validate()

    def validate(self) -> None:
        if self.total_prbs <= 0 or self.rbg_size <= 0:
            raise InvalidConfig("total_prbs and rbg_size must be positive")
        if self.rbg_size > self.total_prbs:
            raise InvalidConfig("rbg_size exceeds total_prbs")
        if not self.slices:
            raise InvalidConfig("at least one slice is required")
        names = [s.slice for s in self.slices]
        if len(set(names)) != len(names):
            raise InvalidConfig(f"duplicate slice names in {names}")
        if not (self.tick > 0 and self.duration > 0):
            raise InvalidConfig("tick and duration must be positive")
        if self.duration < self.tick:
            raise InvalidConfig("duration shorter than one tick")
        if not 0 <= self.seed < 2**64:
            raise InvalidConfig("seed must be an unsigned 64-bit integer")
        if not self.capacity_per_prb > 0:
            raise InvalidConfig("capacity_per_prb must be positive")
        if self.prb_bytes < 1:
            raise InvalidConfig("capacity_per_prb * tick is below one byte per PRB")
        if not self.demand_jitter >= 0:
            raise InvalidConfig("demand_jitter must be >= 0")
        for s in self.slices:
            if not (s.demand >= 0 and math.isfinite(s.demand)):
                raise InvalidConfig(f"slice {s.slice}: demand must be >= 0")
            if s.initial_prbs < 0 or s.initial_prbs % self.rbg_size:
                raise InvalidConfig(
                    f"slice {s.slice}: initial_prbs must be a non-negative multiple of rbg_size"
                )
        if sum(s.initial_prbs for s in self.slices) > self.total_prbs:
            raise InvalidConfig("initial allocations exceed total_prbs")

    @property
    def n_ticks(self) -> int:
        return int(Fraction(repr(self.duration)) / Fraction(repr(self.tick)))

    @property
    def prb_bytes(self) -> int:
        """Bytes one PRB can serve in one tick."""
        return int(round(self.capacity_per_prb * BYTES_PER_MBIT * self.tick))

    @property
    def slice_names(self) -> list[str]:
        return [s.slice for s in self.slices]


class Policy(str, enum.Enum):
    ENERGY_SAVER = "ENERGY_SAVER"
    THROUGHPUT_MAX = "THROUGHPUT_MAX"


@dataclass(frozen=True)
class AgentSpec:
    app_id: str
    policy: Policy
    step_size: int = 3
    timing: TimingSpec = field(default_factory=lambda: TimingSpec(1.0))

    def __post_init__(self) -> None:
        object.__setattr__(self, "policy", Policy(self.policy))
        if self.step_size < 1:
            raise InvalidConfig(f"agent {self.app_id}: step_size must be >= 1")


@dataclass(frozen=True)
class KpmSnapshot:
    """What an app sees of one slice: bytes that arrived during the last tick
    and bytes that were queued when the scheduler last ran."""

    offered_bytes: int
    buffer_bytes: int


@dataclass(frozen=True)
class Bounds:
    rbg_size: int
    ceiling: int  # PRBs left once the app's other slices are served
    prb_bytes: int


def align_rbg(prbs: int, rbg_size: int) -> int:
    """Nearest multiple of ``rbg_size``, ties rounded up."""
    q, r = divmod(prbs, rbg_size)
    return (q + (2 * r >= rbg_size)) * rbg_size


def sufficiency_floor(offered_bytes: int, bounds: Bounds) -> int:
    """Smallest RBG-aligned allocation that can serve the offered load (at least one RBG)."""
    need = -(-offered_bytes // bounds.prb_bytes)
    aligned = -(-need // bounds.rbg_size) * bounds.rbg_size
    return max(aligned, bounds.rbg_size)


def agent_decide(
    policy: Policy,
    current_prbs: int,
    observed: KpmSnapshot,
    step: int,
    bounds: Bounds,
) -> int:
    """Next PRB allocation for one slice.

    The energy saver steps down but never below what the observed load
    needs; the throughput maximiser steps up while traffic is queued.  The
    budget ceiling has the final word.
    """
    ceiling = max(bounds.ceiling, 0) // bounds.rbg_size * bounds.rbg_size
    if policy is Policy.ENERGY_SAVER:
        nxt = max(align_rbg(current_prbs - step, bounds.rbg_size),
                  sufficiency_floor(observed.offered_bytes, bounds))
    elif observed.buffer_bytes > 0:
        nxt = align_rbg(current_prbs + step, bounds.rbg_size)
    else:
        nxt = current_prbs
    return max(min(nxt, ceiling), 0)


def decide_all(
    agent: AgentSpec,
    current: Sequence[int],
    observed: Sequence[KpmSnapshot],
    config: ScenarioConfig,
) -> list[int]:
    """Apply :func:`agent_decide` slice by slice, keeping the total within budget."""
    alloc = list(current)
    for i in range(len(alloc)):
        others = sum(alloc) - alloc[i]
        bounds = Bounds(config.rbg_size, config.total_prbs - others, config.prb_bytes)
        alloc[i] = agent_decide(agent.policy, alloc[i], observed[i], agent.step_size, bounds)
    return alloc


@dataclass(frozen=True, eq=False)
class SimTrace:
    """Per-tick state; array rows are ticks, columns follow ``slices``.

    ``last_writer`` holds an index into ``app_ids`` or -1 before the first action.
    """

    config: ScenarioConfig
    app_ids: tuple[str, ...]
    slices: tuple[str, ...]
    timestamps: np.ndarray
    prbs: np.ndarray
    buffer_bytes: np.ndarray
    arrivals: np.ndarray
    served: np.ndarray
    throughput_mbps: np.ndarray
    last_writer: np.ndarray

    def __len__(self) -> int:
        return int(self.timestamps.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SimTrace):
            return NotImplemented
        arrays = ("timestamps", "prbs", "buffer_bytes", "arrivals", "served",
                  "throughput_mbps", "last_writer")
        return (
            self.app_ids == other.app_ids
            and self.slices == other.slices
            and all(np.array_equal(getattr(self, a), getattr(other, a)) for a in arrays)
        )

    def writer_name(self, k: int) -> Optional[str]:
        idx = int(self.last_writer[k])
        return self.app_ids[idx] if idx >= 0 else None

    def records(self):
        """Yield ``(timestamp, slice, prbs, buffer_bytes, throughput_mbps, last_writer)``."""
        for k in range(len(self)):
            writer = self.writer_name(k)
            for j, s in enumerate(self.slices):
                yield (float(self.timestamps[k]), s, int(self.prbs[k, j]),
                       int(self.buffer_bytes[k, j]), float(self.throughput_mbps[k, j]), writer)


def _arrival_bytes(config: ScenarioConfig) -> np.ndarray:
    """Per-tick arrivals, shape (ticks, slices).

    Noise for slice j comes from a Philox stream keyed by (seed, j); the
    tick index is the position in that stream, so values never depend on
    how the simulation is driven.
    """
    n = config.n_ticks
    out = np.empty((n, len(config.slices)), dtype=np.int64)
    for j, s in enumerate(config.slices):
        gen = np.random.Generator(np.random.Philox(np.random.SeedSequence([config.seed, j])))
        z = gen.standard_normal(n)
        mult = np.maximum(0.0, 1.0 + config.demand_jitter * z)
        out[:, j] = np.rint(s.demand * BYTES_PER_MBIT * config.tick * mult).astype(np.int64)
    return out


def _firing_schedule(
    config: ScenarioConfig, agents: Sequence[AgentSpec]
) -> dict[int, list[int]]:
    """tick index -> agent indices firing in that tick, in write order."""
    tick = Fraction(repr(config.tick))
    end = config.n_ticks * tick
    events: list[tuple[int, Fraction, int]] = []
    for i, agent in enumerate(agents):
        period = Fraction(repr(agent.timing.period))
        t = Fraction(repr(agent.timing.offset))
        while t < end:
            events.append((math.floor(t / tick), t, i))
            t += period
    schedule: dict[int, list[int]] = {}
    for k, _, i in sorted(events):
        schedule.setdefault(k, []).append(i)
    return schedule


def _check_timing(config: ScenarioConfig, agents: Sequence[AgentSpec]) -> None:
    ids = [a.app_id for a in agents]
    if len(set(ids)) != len(ids):
        raise InvalidConfig(f"duplicate app ids {ids}")
    for a in agents:
        if config.tick > a.timing.period / 2:
            raise InvalidConfig(
                f"agent {a.app_id}: tick {config.tick} must be at most half the period"
            )


def _simulate(config: ScenarioConfig, agents: Sequence[AgentSpec]) -> SimTrace:
    _check_timing(config, agents)
    n, n_slices = config.n_ticks, len(config.slices)
    arrivals = _arrival_bytes(config)
    schedule = _firing_schedule(config, agents)
    cap_per_prb = config.prb_bytes

    prbs = np.empty((n, n_slices), dtype=np.int64)
    buffers = np.empty((n, n_slices), dtype=np.int64)
    served_out = np.empty((n, n_slices), dtype=np.int64)
    writers = np.full(n, -1, dtype=np.int64)

    shared = [s.initial_prbs for s in config.slices]
    own = [list(shared) for _ in agents]
    buffer = [0] * n_slices
    nominal = [int(round(s.demand * BYTES_PER_MBIT * config.tick)) for s in config.slices]
    observed = [KpmSnapshot(b, b) for b in nominal]
    writer = -1
    arr_rows = arrivals.tolist()

    for k in range(n):
        for i in schedule.get(k, ()):
            own[i] = decide_all(agents[i], own[i], observed, config)
            shared = own[i]
            writer = i
        row = arr_rows[k]
        snapshot = []
        for j in range(n_slices):
            queued = buffer[j] + row[j]
            served = min(queued, cap_per_prb * shared[j])
            snapshot.append(KpmSnapshot(row[j], queued))
            buffer[j] = queued - served
            served_out[k, j] = served
            buffers[k, j] = buffer[j]
        prbs[k] = shared
        writers[k] = writer
        # decisions at tick k+1 see the state of tick k
        observed = snapshot

    tick = Fraction(repr(config.tick))
    timestamps = np.array([float(k * tick) for k in range(n)])
    throughput = served_out * 8 / (config.tick * 1e6)
    return SimTrace(
        config, tuple(a.app_id for a in agents), tuple(config.slice_names), timestamps,
        prbs, buffers, arrivals, served_out, throughput, writers,
    )


def run_single(config: ScenarioConfig, agent: AgentSpec) -> SimTrace:
    """Profile one app running alone."""
    return _simulate(config, [agent])


def run_concurrent(config: ScenarioConfig, agents: Sequence[AgentSpec]) -> SimTrace:
    """Run several apps against the same cell; the latest write wins.

    Apps firing in the same tick are applied in order of firing instant,
    then list order, so the later one is what the tick records.
    """
    if len(agents) < 2:
        raise InvalidConfig("run_concurrent needs at least two agents")
    return _simulate(config, agents)


def occupancy_fractions(trace: SimTrace) -> dict[str, float]:
    """Share of ticks in which each app's write is in force (ticks before any write excluded)."""
    active = trace.last_writer[trace.last_writer >= 0]
    if active.size == 0:
        raise NoWriters("no control action was applied in this trace")
    counts = np.bincount(active, minlength=len(trace.app_ids))
    return {app: counts[i] / active.size for i, app in enumerate(trace.app_ids)}


def trace_to_profile(
    trace: SimTrace, app_id: str, metadata: Optional[Mapping[str, str]] = None
) -> Profile:
    """Profile with slice_prb, dl_buffer_bytes and tx_brate_dl_mbps per slice per tick."""
    if len(trace) == 0:
        raise EmptyTrace("trace has no ticks")
    observations = []
    ts = trace.timestamps.tolist()
    prbs, buf, thr = trace.prbs.tolist(), trace.buffer_bytes.tolist(), trace.throughput_mbps.tolist()
    for k, t in enumerate(ts):
        for j, s in enumerate(trace.slices):
            observations.append(Observation(t, PRB, s, float(prbs[k][j])))
            observations.append(Observation(t, BUFFER, s, float(buf[k][j])))
            observations.append(Observation(t, THROUGHPUT, s, thr[k][j]))
    meta = {
        "source": "ran-sim",
        "seed": str(trace.config.seed),
        "tick": format_number(trace.config.tick),
        "duration": format_number(trace.config.duration),
    }
    meta.update(metadata or {})
    return Profile(app_id, tuple(observations), meta)


TRACE_HEADER = ("timestamp", "slice", "prbs", "buffer_bytes", "throughput_mbps", "last_writer")


def write_trace(trace: SimTrace, path: str | Path) -> None:
    lines = ["\t".join(TRACE_HEADER)]
    for t, s, p, b, thr, w in trace.records():
        lines.append(
            f"{format_number(t)}\t{s}\t{p}\t{b}\t{format_number(thr)}\t{w if w is not None else '-'}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# config files


def scenario_from_dict(data: Mapping) -> ScenarioConfig:
    try:
        kwargs = dict(data)
        if "slices" in kwargs:
            kwargs["slices"] = tuple(SliceConfig(**s) for s in kwargs["slices"])
        return ScenarioConfig(**kwargs)
    except TypeError as exc:
        raise InvalidConfig(f"bad scenario config: {exc}") from exc


def scenario_to_dict(config: ScenarioConfig) -> dict:
    data = asdict(config)
    data["slices"] = [asdict(s) for s in config.slices]
    return data


def agent_from_dict(data: Mapping) -> AgentSpec:
    try:
        timing = TimingSpec(**data.get("timing", {}))
        return AgentSpec(data["app_id"], Policy(data["policy"]), int(data.get("step_size", 3)), timing)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidConfig(f"bad agent spec {dict(data)!r}: {exc}") from exc


def agent_to_dict(agent: AgentSpec) -> dict:
    return {
        "app_id": agent.app_id,
        "policy": agent.policy.value,
        "step_size": agent.step_size,
        "timing": asdict(agent.timing),
    }


def _load_json(path: str | Path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def load_scenario(path: str | Path) -> ScenarioConfig:
    return scenario_from_dict(_load_json(path))


def load_agents(path: str | Path) -> list[AgentSpec]:
    data = _load_json(path)
    if isinstance(data, Mapping):
        data = data.get("agents", [])
    if not isinstance(data, list) or not data:
        raise InvalidConfig(f"{path}: expected a non-empty list of agents")
    return [agent_from_dict(a) for a in data]
