"""Batch commands behind the CLI: simulate, profile, conflict, predict, compare, reproduce.

Each command writes its outputs into a directory and returns a
:class:`RunManifest`, which is also saved next to the outputs.  Outputs are
deterministic: rerunning a command on the same inputs rewrites identical bytes.
"""
from __future__ import annotations

import enum
import hashlib
import json
import logging
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .ecdf import build_ecdf, read_ecdf, write_ecdf
from .errors import ConfigMismatch, EmptyInput, MissingKey, ProfileFormatError
from .metrics import (
    VARIABLES,
    conflict_report,
    default_kpm_keys,
    distance_pair,
    int_distance,
)
from .predictor import TimingSpec, predict, rate_weights
from .profile import (
    PROFILE_HEADER,
    Key,
    Profile,
    extract_series,
    format_number,
    read_profile,
    write_profile,
)
from .sim import (
    AgentSpec,
    Policy,
    ScenarioConfig,
    agent_to_dict,
    load_agents,
    load_scenario,
    occupancy_fractions,
    run_concurrent,
    run_single,
    scenario_to_dict,
    trace_to_profile,
    write_trace,
)

log = logging.getLogger(__name__)

SEED_ENV = "CONFLICT_LENS_SEED"
MIN_TRUSTED_SAMPLES = 100


class Command(str, enum.Enum):
    SIMULATE = "SIMULATE"
    PROFILE = "PROFILE"
    CONFLICT = "CONFLICT"
    PREDICT = "PREDICT"
    COMPARE = "COMPARE"
    REPRODUCE = "REPRODUCE"


@dataclass
class RunManifest:
    command: Command
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    config_digest: str = ""
    tool_version: str = __version__

    def to_dict(self) -> dict:
        return {
            "command": self.command.value,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "config_digest": self.config_digest,
            "tool_version": self.tool_version,
        }

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")


def config_digest(resolved: dict) -> str:
    blob = json.dumps(resolved, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def resolve_seed(flag: Optional[int], fallback: int) -> int:
    """--seed flag, then $CONFLICT_LENS_SEED, then ``fallback``."""
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env:
        return int(env)
    return fallback


def _finish(manifest: RunManifest, out_dir: Path, name: str, resolved: dict) -> RunManifest:
    manifest.config_digest = config_digest(resolved)
    manifest.write(out_dir / f"{name}.manifest.json")
    return manifest


def _series_file(out_dir: Path, label: str, key: Key, kind: str) -> Path:
    return out_dir / f"{label}.{key[0]}.{key[1]}.{kind}.tsv"


def common_keys(profiles: Sequence[Profile]) -> list[Key]:
    """(variable, slice) keys present in every profile, in the first profile's order."""
    keys = profiles[0].keys()
    rest = [set(p.keys()) for p in profiles[1:]]
    return [k for k in keys if all(k in r for r in rest)]


def parse_keys(text: str, slices: Sequence[str]) -> list[Key]:
    """``var:slice,var2`` -> keys; a bare variable name expands to every slice."""
    keys: list[Key] = []
    for item in filter(None, (t.strip() for t in text.split(","))):
        var, sep, s = item.partition(":")
        keys.extend([(var, s)] if sep else [(var, x) for x in slices])
    return keys


def parse_floats(text: Optional[str]) -> Optional[list[float]]:
    if text is None:
        return None
    return [float(t) for t in text.split(",") if t.strip()]


# ---------------------------------------------------------------------------
# reproduction defaults

@dataclass(frozen=True)
class TimingConfig:
    """One concurrent configuration: the two apps' periods and phase offsets."""

    label: str
    es_period: float
    tm_period: float
    es_offset: float = 0.0
    tm_offset: float = 0.0

    def agents(self, step: int = 3) -> list[AgentSpec]:
        return [
            AgentSpec("es", Policy.ENERGY_SAVER, step, TimingSpec(self.es_period, self.es_offset)),
            AgentSpec("tm", Policy.THROUGHPUT_MAX, step, TimingSpec(self.tm_period, self.tm_offset)),
        ]


# The slower (or, at equal periods, the second) app fires halfway between the
# faster app's actions, i.e. at the mean phase of an unsynchronised pair.
TIMING_CONFIGS = (
    TimingConfig("ES1-TM1", 1.0, 1.0, 0.0, 0.5),
    TimingConfig("ES2-TM10", 2.0, 10.0, 0.0, 1.0),
    TimingConfig("ES10-TM2", 10.0, 2.0, 1.0, 0.0),
)


def default_agents() -> list[AgentSpec]:
    return TIMING_CONFIGS[0].agents()


# ---------------------------------------------------------------------------
# commands

def cmd_simulate(
    out_dir: str | Path,
    config_path: Optional[str | Path] = None,
    agents_path: Optional[str | Path] = None,
    concurrent: bool = False,
    seed: Optional[int] = None,
    label: Optional[str] = None,
) -> RunManifest:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config = load_scenario(config_path) if config_path else ScenarioConfig()
    config = replace(config, seed=resolve_seed(seed, config.seed))
    agents = load_agents(agents_path) if agents_path else default_agents()
    inputs = [str(p) for p in (config_path, agents_path) if p]
    manifest = RunManifest(Command.SIMULATE, inputs)

    if concurrent:
        label = label or "concurrent"
        trace = run_concurrent(config, agents)
        occupancy = occupancy_fractions(trace)
        meta = {"agents": ",".join(a.app_id for a in agents)}
        meta.update({f"occupancy.{k}": format_number(v) for k, v in occupancy.items()})
        runs = [(label, trace, meta)]
    else:
        runs = [(a.app_id, run_single(config, a), {"policy": a.policy.value}) for a in agents]
    for name, trace, meta in runs:
        profile_path = out / f"{name}.profile.tsv"
        trace_path = out / f"{name}.trace.tsv"
        write_profile(trace_to_profile(trace, name, meta), profile_path)
        write_trace(trace, trace_path)
        manifest.outputs += [str(profile_path), str(trace_path)]

    resolved = {
        "scenario": scenario_to_dict(config),
        "agents": [agent_to_dict(a) for a in agents],
        "concurrent": concurrent,
        "label": label,
    }
    return _finish(manifest, out, f"{label}.simulate" if concurrent else "simulate", resolved)


def cmd_profile(
    profile_paths: Sequence[str | Path],
    out_dir: str | Path,
) -> RunManifest:
    """One ECDF TSV per (variable, slice) of each profile."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(Command.PROFILE, [str(p) for p in profile_paths])
    for path in profile_paths:
        profile = read_profile(path)
        for key in profile.keys():
            samples = extract_series(profile, *key)
            if len(samples) < MIN_TRUSTED_SAMPLES:
                log.warning("%s %s/%s: only %d samples", profile.app_id, *key, len(samples))
            target = _series_file(out, profile.app_id, key, "ecdf")
            write_ecdf(build_ecdf(samples), target)
            manifest.outputs.append(str(target))
    return _finish(manifest, out, "profile", {"inputs": manifest.inputs})


def cmd_conflict(
    profile_a: str | Path,
    profile_b: str | Path,
    out_dir: str | Path,
    kpm_keys: Optional[str] = None,
    label: Optional[str] = None,
) -> tuple[RunManifest, float]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    a, b = read_profile(profile_a), read_profile(profile_b)
    variables = common_keys([a, b])
    slices = list(dict.fromkeys(s for _, s in variables))
    kpms = parse_keys(kpm_keys, slices) if kpm_keys else default_kpm_keys(slices)
    for key in kpms:
        if key not in variables:
            raise MissingKey(f"KPM key {key[0]}:{key[1]} is not covered by both profiles")
    report = conflict_report(a, b, variables, kpms)
    label = label or f"{a.app_id}-vs-{b.app_id}"
    target = out / f"{label}.conflict.json"
    report.write(target)
    manifest = RunManifest(Command.CONFLICT, [str(profile_a), str(profile_b)], [str(target)])
    _finish(manifest, out, f"{label}.conflict", {"kpm_keys": kpms, "label": label})
    return manifest, report.severity


def build_timings(
    n: int,
    periods: Sequence[float],
    offsets: Optional[Sequence[float]] = None,
    holds: Optional[Sequence[float]] = None,
) -> list[TimingSpec]:
    for name, values in (("periods", periods), ("offsets", offsets), ("holds", holds)):
        if values is not None and len(values) != n:
            raise ConfigMismatch(f"{n} profiles but {len(values)} {name}")
    offsets = offsets or [0.0] * n
    return [
        TimingSpec(p, o, None if holds is None else h)
        for p, o, h in zip(periods, offsets, holds or [None] * n)
    ]


def cmd_predict(
    profile_paths: Sequence[str | Path],
    periods: Sequence[float],
    out_dir: str | Path,
    offsets: Optional[Sequence[float]] = None,
    holds: Optional[Sequence[float]] = None,
    measured: Optional[str | Path] = None,
    label: Optional[str] = None,
):
    if not profile_paths:
        raise EmptyInput("predict needs at least one profile")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    profiles = [read_profile(p) for p in profile_paths]
    timings = build_timings(len(profiles), periods, offsets, holds)
    variables = common_keys(profiles)
    measured_profile = read_profile(measured) if measured else None
    label = label or "+".join(p.app_id for p in profiles)
    report = predict(profiles, timings, variables, measured_profile, label)

    manifest = RunManifest(Command.PREDICT, [str(p) for p in profile_paths])
    if measured:
        manifest.inputs.append(str(measured))
    for key, cdf in report.per_variable.items():
        target = _series_file(out, label, key, "predicted")
        write_ecdf(cdf, target)
        manifest.outputs.append(str(target))
    report_path = out / f"{label}.prediction.json"
    report.write(report_path)
    manifest.outputs.append(str(report_path))
    resolved = {
        "timings": [[t.period, t.offset, t.hold] for t in timings],
        "label": label,
        "measured": measured is not None,
    }
    _finish(manifest, out, f"{label}.predict", resolved)
    return manifest, report


def _is_profile_file(path: str | Path) -> bool:
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip() and not line.startswith("#"):
                return tuple(line.rstrip("\r\n").split("\t")) == PROFILE_HEADER
    return False


def cmd_compare(
    path_a: str | Path,
    path_b: str | Path,
    out_dir: str | Path,
    label: Optional[str] = None,
):
    """Distances between two ECDF TSVs, or between two profiles key by key."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    label = label or "compare"
    kinds = (_is_profile_file(path_a), _is_profile_file(path_b))
    rows: list[dict] = []
    if all(kinds):
        pa, pb = read_profile(path_a), read_profile(path_b)
        for var, s in common_keys([pa, pb]):
            pair = distance_pair(build_ecdf(extract_series(pa, var, s)),
                                 build_ecdf(extract_series(pb, var, s)))
            rows.append({"variable": var, "slice": s, **pair.to_dict()})
    elif not any(kinds):
        pair = distance_pair(read_ecdf(path_a), read_ecdf(path_b))
        rows.append({"variable": None, "slice": None, **pair.to_dict()})
    else:
        raise ProfileFormatError("compare needs two profiles or two ECDF files")
    target = out / f"{label}.compare.json"
    target.write_text(
        json.dumps({"a": str(path_a), "b": str(path_b), "comparison": rows}, indent=2) + "\n",
        encoding="utf-8",
    )
    manifest = RunManifest(Command.COMPARE, [str(path_a), str(path_b)], [str(target)])
    _finish(manifest, out, f"{label}.compare", {"label": label})
    return manifest, rows


SUMMARY_HEADER = (
    "config", "variable", "slice", "mode", "w_es", "w_tm", "ks", "int",
    "ks_rate", "int_rate", "int_measured_es", "int_measured_tm",
)


def cmd_reproduce(
    out_dir: str | Path,
    seed: Optional[int] = None,
    config: Optional[ScenarioConfig] = None,
    configs: Sequence[TimingConfig] = TIMING_CONFIGS,
    summary_slice: str = "embb",
) -> tuple[RunManifest, list[dict]]:
    """Profile, predict, measure and compare for every concurrent configuration.

    The summary TSV has one row per configuration and variable on
    ``summary_slice``: distances between the predicted and the measured CDF
    (schedule-derived weights, plus the plain rate weights for reference) and
    the distance from the measured CDF to each app's individual profile.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config = config or ScenarioConfig()
    config = replace(config, seed=resolve_seed(seed, config.seed))
    manifest = RunManifest(Command.REPRODUCE)
    rows: list[dict] = []

    def stage(name, fn, *args):
        try:
            return fn(*args)
        except Exception as exc:
            raise RuntimeError(f"reproduce stage {name!r} failed: {exc}") from exc

    for tc in configs:
        agents = tc.agents()
        individual = [
            stage(f"{tc.label}/simulate-{a.app_id}", lambda a=a: trace_to_profile(
                run_single(config, a), a.app_id, {"config": tc.label}))
            for a in agents
        ]
        trace = stage(f"{tc.label}/simulate-concurrent", run_concurrent, config, agents)
        measured = trace_to_profile(trace, tc.label, {"config": tc.label})
        for p in individual:
            path = out / f"{tc.label}.{p.app_id}.profile.tsv"
            write_profile(p, path)
            manifest.outputs.append(str(path))
        mpath = out / f"{tc.label}.measured.profile.tsv"
        write_profile(measured, mpath)
        manifest.outputs.append(str(mpath))

        timings = [a.timing for a in agents]
        keys = common_keys(individual)
        report = stage(f"{tc.label}/predict", predict, individual, timings, keys, measured, tc.label)
        baseline = stage(
            f"{tc.label}/predict-rate", lambda: predict(
                individual, timings, keys, measured, tc.label,
                weights=rate_weights([t.period for t in timings])))
        rpath = out / f"{tc.label}.prediction.json"
        report.write(rpath)
        manifest.outputs.append(str(rpath))
        for key, cdf in report.per_variable.items():
            ppath = _series_file(out, tc.label, key, "predicted")
            mpath = _series_file(out, tc.label, key, "measured")
            write_ecdf(cdf, ppath)
            write_ecdf(build_ecdf(extract_series(measured, *key)), mpath)
            manifest.outputs += [str(ppath), str(mpath)]

        for var in VARIABLES:
            key = (var, summary_slice)
            cmp, base = report.comparison[key], baseline.comparison[key]
            measured_ecdf = build_ecdf(extract_series(measured, *key))
            to_app = [int_distance(measured_ecdf, build_ecdf(extract_series(p, *key)))
                      for p in individual]
            w = report.per_variable[key].weights
            rows.append({
                "config": tc.label, "variable": var, "slice": summary_slice,
                "mode": w.mode.value, "w_es": w.weights[0], "w_tm": w.weights[1],
                "ks": cmp.ks, "int": cmp.integral,
                "ks_rate": base.ks, "int_rate": base.integral,
                "int_measured_es": to_app[0], "int_measured_tm": to_app[1],
            })

    summary = out / "reproduce.summary.tsv"
    lines = ["\t".join(SUMMARY_HEADER)]
    for row in rows:
        lines.append("\t".join(
            v if isinstance(v, str) else format_number(v) for v in (row[h] for h in SUMMARY_HEADER)
        ))
    summary.write_text("\n".join(lines) + "\n", encoding="utf-8")
    manifest.outputs.append(str(summary))
    resolved = {
        "scenario": scenario_to_dict(config),
        "configs": [vars(tc) for tc in configs],
        "summary_slice": summary_slice,
    }
    _finish(manifest, out, "reproduce", resolved)
    return manifest, rows
