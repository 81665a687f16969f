import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conflict_lens.pipeline import TIMING_CONFIGS  # noqa: E402
from conflict_lens.sim import ScenarioConfig, run_concurrent, run_single, trace_to_profile  # noqa: E402


@pytest.fixture(scope="session")
def default_config():
    return ScenarioConfig()


@pytest.fixture(scope="session")
def es_tm_profiles(default_config):
    """Individual ES and TM profiles plus the concurrent ground truth for ES1-TM1."""
    es, tm = TIMING_CONFIGS[0].agents()
    p_es = trace_to_profile(run_single(default_config, es), "es")
    p_tm = trace_to_profile(run_single(default_config, tm), "tm")
    p_cc = trace_to_profile(run_concurrent(default_config, [es, tm]), "ES1-TM1")
    return p_es, p_tm, p_cc, (es, tm)
