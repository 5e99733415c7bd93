import math

import numpy as np
import pytest

from dsetproj import rng
from dsetproj.construct import (AmbientParams, CantorFactorSpec, SequenceLaw, assemble_scene,
                                base_block, cantor_digit_params, cantor_factor)
from dsetproj.sampling import (box_counting_dimension, cantor_coordinates, iter_local_chunks,
                               read_sample_dump, sample_block, sample_scene, truncation_slack,
                               write_sample_dump)

AMB = AmbientParams(2, 1, 1.5)
CANON = SequenceLaw.closed(2, 2)


@pytest.fixture(scope="module")
def scene():
    return assemble_scene(AMB, CANON, 5)


def in_cantor(x, factor, levels, tol):
    """Brute-force membership in the level-``levels`` cylinder union, with slack ``tol``."""
    ends = factor.left_endpoints
    rho = factor.ratio
    lo = np.zeros_like(x)
    width = 1.0
    ok = (x >= -tol) & (x <= 1 + tol)
    for _ in range(levels):
        best = np.full(x.shape, -1)
        for k, s in enumerate(ends):
            a = lo + width * s
            hit = (x >= a - tol) & (x <= a + width * rho + tol)
            best = np.where(hit & (best < 0), k, best)
        ok &= best >= 0
        lo = lo + width * np.asarray(ends)[np.maximum(best, 0)]
        width *= rho
    return ok


def test_slack_below_double_precision_at_default_depth():
    assert 0.4**40 / 0.6 < 1e-15
    assert truncation_slack(AMB and cantor_digit_params(AMB), 40) < 1e-15


def test_endpoint_addresses():
    f = cantor_factor(1, math.log(2) / math.log(3))
    zeros = np.zeros((1, 1), dtype=np.uint64)
    ones = np.full((1, 1), rng.MASK64, dtype=np.uint64)
    assert cantor_coordinates(zeros, f, 40)[0] == 0.0
    assert cantor_coordinates(ones, f, 40)[0] == pytest.approx(1 - 3.0**-40, abs=1e-15)
    # depth limit: all-ones address tends to 1
    assert [1 - cantor_coordinates(ones, f, D)[0] for D in (1, 2, 3)] == pytest.approx(
        [1 / 3, 1 / 9, 1 / 27])


def test_general_piece_count_layout():
    f = CantorFactorSpec(3, 0.2)
    w = rng.stream_words(11, 0, 5000 * 4).reshape(-1, 4)
    x = cantor_coordinates(w, f, 4)
    assert np.all(in_cantor(x, f, 4, 1e-12))
    # first digit uniform over three pieces
    first = np.floor(x / 0.4 + 1e-12).astype(int)
    assert set(np.unique(first)) == {0, 1, 2}


def test_middle_thirds_mean():
    f = cantor_factor(1, math.log(2) / math.log(3))
    n = 10**6
    x = cantor_coordinates(rng.stream_words(2024, 0, n).reshape(n, 1), f, 40)
    # exact mean 1/2 by symmetry; the variance of the measure is 1/8
    assert abs(x.mean() - 0.5) <= 3 * math.sqrt(1 / 8) / 1e3
    assert x.var() == pytest.approx(1 / 8, rel=0.01)


def test_deterministic_and_chunk_invariant(scene):
    b = scene.block(2)
    a = sample_block(b, scene.factor, 5000, 40, seed=77)
    c = sample_block(b, scene.factor, 5000, 40, seed=77)
    assert a.points.tobytes() == c.points.tobytes()
    chunks = np.concatenate(list(iter_local_chunks(b, scene.factor, 5000, 40, 77, chunk=333)))
    local = sample_block(b, scene.factor, 5000, 40, seed=77, local=True)
    assert chunks.tobytes() == local.points.tobytes()
    assert sample_block(b, scene.factor, 5000, 40, seed=78).points.tobytes() != a.points.tobytes()


def test_weights_sum_to_block_mass(scene):
    for b in scene.blocks:
        batch = sample_block(b, scene.factor, 12345, seed=b.index)
        assert batch.mass == pytest.approx(b.mass, rel=1e-12)


def test_points_inside_geometric_model(scene):
    f = scene.factor
    for b in scene.blocks:
        batch = sample_block(b, f, 20000, seed=3)
        rel = np.asarray(batch.points) - np.asarray(b.center)
        assert np.all(np.linalg.norm(rel, axis=1) <= b.radius_r / 2 + 1e-12)
        # invert the homothety and the subcube map
        u = (rel / b.cube_side + 0.5) * b.subdivision_M
        sub = np.clip(np.floor(u), 0, b.subdivision_M - 1)
        x = u - sub
        assert np.all(in_cantor(x.ravel(), f, 6, 1e-6))


def test_base_block_points_are_in_X():
    f = cantor_digit_params(AMB)
    batch = sample_block(base_block(AMB), f, 20000, seed=9)
    assert np.all(in_cantor(batch.points.ravel(), f, 10, 1e-9))


def test_empty_batch_rejected(scene):
    with pytest.raises(ValueError):
        sample_block(scene.block(1), scene.factor, 0)


def test_box_counting_dimension_of_X():
    f = cantor_digit_params(AMB)
    batch = sample_block(base_block(AMB), f, 10**6, seed=5)
    d, counts = box_counting_dimension(batch.points, [f.ratio**k for k in range(1, 9)])
    assert abs(d - 1.5) <= 0.05
    assert np.all(np.diff(counts) > 0)


def test_box_counting_on_a_line():
    # half-open so the count is exactly 1/s boxes
    t = np.linspace(0, 1, 100_000, endpoint=False)
    d, _ = box_counting_dimension(np.c_[t, t], [2.0**-k for k in range(2, 10)])
    assert d == pytest.approx(1.0, abs=0.02)


def test_scene_batches(scene):
    s3 = assemble_scene(AMB, CANON, 3)
    batches = sample_scene(s3, 1000, seed=4)
    assert len(batches) == 3
    assert math.fsum(b.mass for b in batches) == pytest.approx(sum(j**-2 for j in (1, 2, 3)), rel=1e-12)
    again = sample_scene(s3, 1000, seed=4)
    assert all(a.points.tobytes() == b.points.tobytes() for a, b in zip(batches, again))
    # per-block seeds do not depend on the other blocks
    solo = sample_block(s3.block(2), s3.factor, 1000, seed=batches[1].seed)
    assert solo.points.tobytes() == batches[1].points.tobytes()


def test_scene_supports_disjoint(scene):
    batches = sample_scene(scene, 2000, seed=8)
    for i, a in enumerate(batches):
        for b in batches[i + 1:]:
            diff = a.points[:, None, :] - b.points[None, :, :]
            assert np.sqrt((diff**2).sum(-1)).min() > 0


def test_sample_dump_roundtrip(tmp_path, scene):
    batches = sample_scene(scene, 100, seed=1)
    path = tmp_path / "dump.bin"
    write_sample_dump(path, batches)
    raw = path.read_bytes()
    assert raw[:8] == b"DSETSMP1"
    assert len(raw) == 8 + 5 * 100 * (4 + 8 * 2 + 8)
    rec = read_sample_dump(path, 2)
    assert list(rec["j"][::100]) == [1, 2, 3, 4, 5]
    assert np.array_equal(rec["x"], np.concatenate([b.points for b in batches]))
    assert np.array_equal(rec["w"], np.concatenate([b.weights for b in batches]))
    # first record laid out by hand
    j, x0, x1, w = np.frombuffer(raw[8:36], dtype="<u4", count=1)[0], *np.frombuffer(raw[12:36], dtype="<f8")
    assert (j, x0, x1, w) == (1, batches[0].points[0, 0], batches[0].points[0, 1], batches[0].weights[0])


def test_dump_rejects_bad_magic(tmp_path):
    p = tmp_path / "x.bin"
    p.write_bytes(b"NOTMAGIC" + bytes(28))
    with pytest.raises(ValueError):
        read_sample_dump(p, 2)
