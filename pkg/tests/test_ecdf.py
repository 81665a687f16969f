import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conflict_lens.ecdf import (
    Ecdf,
    build_ecdf,
    read_ecdf,
    step_interpolate,
    union_support,
    write_ecdf,
)
from conflict_lens.errors import (
    EmptyInput,
    NonFiniteSample,
    ProfileFormatError,
    SupportNotCovered,
    UnknownSlice,
    UnknownVariable,
)
from conflict_lens.profile import (
    Observation,
    Profile,
    extract_series,
    parse_profile,
    read_profile,
    write_profile,
)

from oracles import count_cdf

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)
sample_lists = st.lists(finite | st.integers(-20, 20).map(float), min_size=1, max_size=60)


def test_build_ecdf_counts_ties():
    e = build_ecdf([1, 2, 2, 3])
    assert e.support.tolist() == [1.0, 2.0, 3.0]
    assert e.probs.tolist() == [0.25, 0.75, 1.0]
    assert e.sample_count == 4


def test_build_ecdf_single_sample():
    e = build_ecdf([5])
    assert e.support.tolist() == [5.0]
    assert e.probs.tolist() == [1.0]


def test_build_ecdf_law_of_large_numbers():
    rng = np.random.default_rng(20240611)
    draws = rng.choice(np.arange(3, 31, 3), size=10_000)
    e = build_ecdf(draws)
    assert e.support.tolist() == list(range(3, 31, 3))
    expected = np.arange(1, 11) / 10
    assert np.all(np.abs(e.probs - expected) <= 0.02)


@pytest.mark.parametrize("bad", [[1.0, float("nan")], [float("inf")], [-float("inf"), 2.0]])
def test_build_ecdf_rejects_non_finite(bad):
    with pytest.raises(NonFiniteSample):
        build_ecdf(bad)


def test_build_ecdf_rejects_empty():
    with pytest.raises(EmptyInput):
        build_ecdf([])


@given(sample_lists)
def test_build_ecdf_matches_counting(samples):
    e = build_ecdf(samples)
    for x, p in zip(e.support, e.probs):
        assert p == pytest.approx(count_cdf(samples, x), abs=1e-15)
    assert e.probs[-1] == 1.0
    assert np.all(np.diff(e.probs) >= 0) and e.probs[0] > 0


@given(sample_lists, st.randoms())
def test_build_ecdf_permutation_invariant(samples, rnd):
    shuffled = list(samples)
    rnd.shuffle(shuffled)
    assert build_ecdf(samples) == build_ecdf(shuffled)


def _profile():
    rows = [
        (0.0, "slice_prb", "embb", 9.0),
        (0.0, "dl_buffer_bytes", "embb", 0.0),
        (0.1, "slice_prb", "embb", 12.0),
        (0.1, "slice_prb", "mmtc", 6.0),
        (0.2, "dl_buffer_bytes", "embb", 125.5),
        (0.2, "slice_prb", "embb", 9.0),
    ]
    return Profile("es", tuple(Observation(*r) for r in rows), {"scenario": "unit"})


def test_extract_series_filters_in_order():
    assert extract_series(_profile(), "slice_prb", "embb") == [9.0, 12.0, 9.0]
    assert extract_series(_profile(), "dl_buffer_bytes", "embb") == [0.0, 125.5]


def test_extract_series_errors():
    with pytest.raises(UnknownVariable):
        extract_series(_profile(), "tx_brate_dl_mbps", "embb")
    with pytest.raises(UnknownSlice):
        extract_series(_profile(), "slice_prb", "urllc")


def test_profile_rejects_unsorted():
    obs = (Observation(1.0, "v", "s", 1.0), Observation(0.5, "v", "s", 2.0))
    with pytest.raises(ProfileFormatError):
        Profile("x", obs)


def test_profile_roundtrip_is_bit_exact(tmp_path):
    p = _profile()
    first = tmp_path / "a.profile.tsv"
    second = tmp_path / "b.profile.tsv"
    write_profile(p, first)
    back = read_profile(first)
    assert back == p
    write_profile(back, second)
    assert first.read_bytes() == second.read_bytes()


def test_profile_parse_rejects_nan_and_bad_header():
    with pytest.raises(NonFiniteSample):
        parse_profile(["timestamp\tvariable\tslice\tvalue", "0\tv\ts\tnan"])
    with pytest.raises(ProfileFormatError):
        parse_profile(["time\tvariable\tslice\tvalue"])


def test_union_support_examples():
    a = Ecdf([1, 3], [0.5, 1.0])
    b = Ecdf([2, 3], [0.5, 1.0])
    assert union_support([a, b]).tolist() == [1, 2, 3]
    assert union_support([a]).tolist() == [1, 3]
    es = build_ecdf([3, 6, 9, 12])
    tm = build_ecdf([15, 18, 21, 24, 27, 30])
    assert union_support([es, tm]).tolist() == list(range(3, 31, 3))
    with pytest.raises(EmptyInput):
        union_support([])


@given(st.lists(sample_lists, min_size=1, max_size=4), st.randoms())
def test_union_support_commutative_idempotent(groups, rnd):
    ecdfs = [build_ecdf(g) for g in groups]
    u = union_support(ecdfs)
    shuffled = list(ecdfs)
    rnd.shuffle(shuffled)
    assert np.array_equal(u, union_support(shuffled))
    assert np.array_equal(u, union_support(ecdfs + ecdfs))
    assert np.all(np.diff(u) > 0)
    assert set(u.tolist()) == set().union(*(e.support.tolist() for e in ecdfs))


def test_step_interpolate_examples():
    e = Ecdf([1, 3], [0.5, 1.0])
    assert step_interpolate(e, np.array([1, 2, 3])).tolist() == [0.5, 0.5, 1.0]
    point = Ecdf([5], [1.0])
    assert step_interpolate(point, np.array([4, 5])).tolist() == [0.0, 1.0]
    e2 = build_ecdf([0.1, 0.7, 0.7, 2.5])
    assert np.array_equal(step_interpolate(e2, e2.support), e2.probs)


def test_step_interpolate_requires_superset():
    e = Ecdf([1, 3], [0.5, 1.0])
    with pytest.raises(SupportNotCovered):
        step_interpolate(e, np.array([1.0, 2.0]))
    with pytest.raises(SupportNotCovered):
        step_interpolate(e, np.array([0.0, 3.0, 4.0]))


@given(sample_lists, st.lists(finite, max_size=30))
def test_step_interpolate_properties(samples, extra):
    e = build_ecdf(samples)
    grid = np.unique(np.concatenate([e.support, np.asarray(extra, dtype=float)]))
    out = step_interpolate(e, grid)
    assert np.all(np.diff(out) >= 0)
    assert np.all((out >= 0) & (out <= 1))
    on_support = np.isin(grid, e.support)
    assert np.array_equal(out[on_support], e.probs)
    for x, v in zip(grid, out):
        assert v == pytest.approx(count_cdf(samples, x), abs=1e-15)
    # round trip through its own union support
    assert np.array_equal(step_interpolate(e, union_support([e])), e.probs)


@settings(max_examples=50)
@given(sample_lists)
def test_ecdf_file_roundtrip(tmp_path_factory, samples):
    path = tmp_path_factory.mktemp("ecdf") / "x.ecdf.tsv"
    e = build_ecdf(samples)
    write_ecdf(e, path)
    back = read_ecdf(path)
    assert back == e
    first = path.read_bytes()
    write_ecdf(back, path)
    assert path.read_bytes() == first
    assert first.decode().splitlines()[0] == "x\ty"


def test_ecdf_invariants_enforced():
    with pytest.raises(ValueError):
        Ecdf([2, 1], [0.5, 1.0])
    with pytest.raises(ValueError):
        Ecdf([1, 2], [0.5, 0.9])
    with pytest.raises(ValueError):
        Ecdf([1, 2], [0.6, 0.5])
