import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dsetproj import rng

MASK = (1 << 64) - 1


def reference_splitmix(seed, k):
    out, x = [], seed
    for _ in range(k):
        x = (x + 0x9E3779B97F4A7C15) & MASK
        z = x
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        out.append(z ^ (z >> 31))
    return out


def test_published_seed_zero_vector():
    assert [int(w) for w in rng.stream_words(0, 0, 3)] == [
        0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


@given(st.integers(0, MASK), st.integers(0, 1000), st.integers(1, 20))
def test_stream_slice_matches_sequential(seed, start, count):
    ref = reference_splitmix(seed, start + count)[start:]
    assert [int(w) for w in rng.stream_words(seed, start, count)] == ref


def test_sequential_generator_tracks_position():
    g = rng.SplitMix64(99)
    a = g.next_u64()
    rest = g.words(4)
    assert [a] + [int(w) for w in rest] == reference_splitmix(99, 5)
    assert g.position == 5


@given(st.lists(st.integers(0, MASK), min_size=1, max_size=30), st.integers(1, MASK))
def test_mulhi_matches_bigint(words, m):
    got = rng.mulhi64(np.array(words, dtype=np.uint64), m)
    assert [int(v) for v in got] == [(w * m) >> 64 for w in words]


def test_bounded_range_and_balance():
    w = rng.stream_words(5, 0, 200_000)
    for m in (1, 2, 3, 7, 23, 11586):
        b = rng.bounded(w, m)
        assert int(b.max()) < m
    counts = np.bincount(rng.bounded(w, 4).astype(np.int64), minlength=4)
    assert np.all(np.abs(counts - 50_000) < 5 * np.sqrt(50_000))


def test_bounded_rejects_bad_bound():
    with pytest.raises(ValueError):
        rng.mulhi64(np.zeros(1, dtype=np.uint64), 0)


def test_derive_seed_distinct_streams():
    seeds = {rng.derive_seed(7, j) for j in range(1, 100)}
    assert len(seeds) == 99


@settings(max_examples=20)
@given(st.integers(0, MASK))
def test_normals_deterministic_and_finite(seed):
    a = rng.SplitMix64(seed).standard_normals(16)
    b = rng.SplitMix64(seed).standard_normals(16)
    assert np.array_equal(a, b)
    assert np.all(np.isfinite(a))


def test_normals_moments():
    z = rng.SplitMix64(3).standard_normals(200_000)
    assert abs(z.mean()) < 0.01
    assert abs(z.var() - 1) < 0.02
