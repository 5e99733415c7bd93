"""Reproducible samples from the natural measure of a block.

Stream layout.  Sample ``s`` of a batch owns words ``[s*W, (s+1)*W)`` of
the block's SplitMix64 stream, where ``W = n + n * w`` and ``w`` is the
number of digit words per coordinate:

* words ``0 .. n-1`` pick the subcube, ``i_k = floor(word * M / 2**64)``;
* the next ``w`` words per coordinate hold its ``D`` Cantor digits.  When
  the piece count ``N`` is ``2**b`` each word carries ``64 // b`` digits,
  most significant first; otherwise each digit takes a whole word and is
  drawn as ``floor(word * N / 2**64)``.

Digits become a coordinate by Horner's rule from the deepest digit,
``x = s(i_1) + rho * (s(i_2) + rho * (...))``, with ``s`` the left
endpoint of a piece.  In block-local units (coordinates minus the centre,
divided by ``r``) a point is ``lambda / sqrt(n) * ((i + x) / M - 1/2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from . import rng
from .construct import BlockSpec, CantorFactorSpec, SceneSpec

DEFAULT_DEPTH = 40
DEFAULT_CHUNK = 1 << 20
DUMP_MAGIC = b"DSETSMP1"


@dataclass
class SampleBatch:
    """Equal-weight sample of one block's measure.

    ``points`` are absolute coordinates unless ``local`` is set, in which
    case they are block-local (centre at the origin, lengths divided by
    ``r_j``).
    """

    points: np.ndarray
    weights: np.ndarray
    source_block: int
    seed: int
    depth: int
    local: bool = False

    @property
    def mass(self) -> float:
        return math.fsum(self.weights)

    def __len__(self) -> int:
        return len(self.points)


def truncation_slack(factor: CantorFactorSpec, depth: int) -> float:
    """Bound on the per-coordinate error from cutting the digit expansion at ``depth``."""
    return factor.ratio**depth / (1.0 - factor.ratio)


def _digit_layout(factor: CantorFactorSpec, depth: int) -> tuple[int, int | None]:
    """(digit words per coordinate, bits per digit or None for whole-word digits)."""
    N = factor.pieces
    if N & (N - 1) == 0:
        bits = N.bit_length() - 1
        per_word = 64 // bits
        return -(-depth // per_word), bits
    return depth, None


def words_per_sample(n: int, factor: CantorFactorSpec, depth: int) -> int:
    return n + n * _digit_layout(factor, depth)[0]


def _digits(words: np.ndarray, factor: CantorFactorSpec, depth: int) -> np.ndarray:
    """Digits of one coordinate, shape ``(depth, k)``, from its digit words (shape ``(k, w)``)."""
    _, bits = _digit_layout(factor, depth)
    if bits is None:
        return np.stack([rng.bounded(words[:, i], factor.pieces) for i in range(depth)])
    if bits == 1:
        # big-endian byte order puts the most significant bit first
        raw = np.ascontiguousarray(words, dtype=">u8").view(np.uint8)
        return np.unpackbits(raw.reshape(len(words), -1), axis=1)[:, :depth].T.copy()
    per_word = 64 // bits
    mask = np.uint64((1 << bits) - 1)
    out = np.empty((depth, len(words)), dtype=np.uint64)
    for i in range(depth):
        w, t = divmod(i, per_word)
        out[i] = (words[:, w] >> np.uint64(64 - bits * (t + 1))) & mask
    return out


def cantor_coordinates(words: np.ndarray, factor: CantorFactorSpec, depth: int) -> np.ndarray:
    """Points of the Cantor factor addressed by the given digit words."""
    # digit * gap reproduces left_endpoints[digit] bit for bit
    gap = (1.0 - factor.ratio) / (factor.pieces - 1)
    rho = factor.ratio
    digits = _digits(words, factor, depth)
    x = np.zeros(len(words))
    for k in range(depth - 1, -1, -1):
        x *= rho
        x += digits[k] * gap
    return x


def _local_chunk(block: BlockSpec, factor: CantorFactorSpec, depth: int, seed: int,
                 start: int, count: int) -> np.ndarray:
    n, M = block.n, block.subdivision_M
    wpc = _digit_layout(factor, depth)[0]
    W = n + n * wpc
    words = rng.stream_words(seed, start * W, count * W).reshape(count, W)
    sub = rng.bounded(words[:, :n], M).astype(np.float64)
    x = np.empty((count, n))
    for k in range(n):
        lo = n + k * wpc
        x[:, k] = cantor_coordinates(words[:, lo:lo + wpc], factor, depth)
    scale = block.homothety_lambda / math.sqrt(n)
    return scale * ((sub + x) / M - 0.5)


def iter_local_chunks(block: BlockSpec, factor: CantorFactorSpec, count: int,
                      depth: int = DEFAULT_DEPTH, seed: int = 0,
                      chunk: int = DEFAULT_CHUNK) -> Iterator[np.ndarray]:
    """Yield block-local sample points in chunks; the concatenation does not depend on ``chunk``."""
    if count < 1:
        raise ValueError("sample count must be >= 1 (empty batch)")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if block.subdivision_M > rng.MASK64:
        raise ValueError(f"block {block.index}: M = {block.subdivision_M} exceeds 64-bit sampling range")
    for start in range(0, count, chunk):
        yield _local_chunk(block, factor, depth, seed, start, min(chunk, count - start))


def sample_block(block: BlockSpec, factor: CantorFactorSpec, count: int,
                 depth: int = DEFAULT_DEPTH, seed: int = 0, local: bool = False) -> SampleBatch:
    pts = np.concatenate(list(iter_local_chunks(block, factor, count, depth, seed)))
    if not local:
        pts = np.asarray(block.center) + block.radius_r * pts
    weights = np.full(count, block.mass / count)
    return SampleBatch(points=pts, weights=weights, source_block=block.index,
                       seed=seed, depth=depth, local=local)


def block_seed(seed: int, j: int) -> int:
    return rng.derive_seed(seed, j)


def sample_scene(scene: SceneSpec, per_block_count: int, depth: int = DEFAULT_DEPTH,
                 seed: int = 0, local: bool = False) -> list[SampleBatch]:
    """One batch per block, block ``j`` seeded with ``mix64(seed ^ j)``."""
    return [sample_block(b, scene.factor, per_block_count, depth, block_seed(seed, b.index), local)
            for b in scene.blocks]


def box_counting_dimension(points: np.ndarray, scales: Sequence[float]) -> tuple[float, np.ndarray]:
    """Least-squares slope of ``log N(eps)`` against ``log(1/eps)``.

    Boxes are the grid cells ``prod [k_i eps, (k_i + 1) eps)``.  Returns the
    slope and the box counts.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    counts = []
    for eps in scales:
        idx = np.floor(pts / eps).astype(np.int64)
        idx -= idx.min(axis=0)
        dims = idx.max(axis=0) + 1
        if float(np.prod(dims.astype(float))) < 2.0**62:
            keys = np.ravel_multi_index(idx.T, dims)
            counts.append(len(np.unique(keys)))
        else:
            counts.append(len(np.unique(idx, axis=0)))
    counts = np.array(counts)
    slope = np.polyfit(np.log(1.0 / np.asarray(scales)), np.log(counts), 1)[0]
    return float(slope), counts


def _dump_dtype(n: int) -> np.dtype:
    return np.dtype([("j", "<u4"), ("x", "<f8", (n,)), ("w", "<f8")])


def write_sample_dump(path: str | Path, batches: Sequence[SampleBatch]) -> None:
    """Raw dump: 8-byte magic ``DSETSMP1`` then packed little-endian records
    ``(j: u32, x: n * f64, weight: f64)``, 12 + 8n bytes each."""
    if not batches:
        raise ValueError("nothing to dump")
    n = batches[0].points.shape[1]
    with open(path, "wb") as fh:
        fh.write(DUMP_MAGIC)
        for b in batches:
            rec = np.empty(len(b), dtype=_dump_dtype(n))
            rec["j"] = b.source_block
            rec["x"] = b.points
            rec["w"] = b.weights
            fh.write(rec.tobytes())


def read_sample_dump(path: str | Path, n: int) -> np.ndarray:
    """Structured array with fields ``j``, ``x``, ``w``."""
    raw = Path(path).read_bytes()
    if raw[:8] != DUMP_MAGIC:
        raise ValueError("not a sample dump (bad magic)")
    return np.frombuffer(raw[8:], dtype=_dump_dtype(n))
