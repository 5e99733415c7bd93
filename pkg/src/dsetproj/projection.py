"""Projected measures, their grid densities and the L^p lower bounds.

For a block ``K_j`` of mass ``m_j = c_j r_j**d`` and any l-plane, the
projected density ``f_j`` has ``||f_j||_1 = m_j`` and is supported in an
l-ball of radius ``r_j``.  Hoelder against the indicator of that ball gives

    ||f_j||_p >= C**(-1/q) c_j r_j**(d - l/q),   1/p + 1/q = 1,

with ``C`` the volume of the unit l-ball.  The histogram estimates below
satisfy the same inequality exactly, with the occupied cells standing in
for the ball.

A histogram always exists even where the projected measure has no density;
the norms reported here are those of the discretisation.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import rng
from .construct import BlockSpec, CantorFactorSpec, SceneSpec, SequenceLaw, validate_sequences
from .errors import HypothesisError, InvariantError
from .kvtext import fmt_float
from .sampling import DEFAULT_CHUNK, DEFAULT_DEPTH, SampleBatch, block_seed, iter_local_chunks, sample_block

ORTHO_TOL = 1e-10
HOELDER_SLACK = 1e-9
CSV_COLUMNS = ("j", "theta_or_label", "h", "samples", "mass_l1", "norm_lp",
               "support_measure", "hoelder_bound", "bound_ratio", "discrete_hoelder_ok")


def unit_ball_volume(l: int) -> float:
    """Lebesgue measure of the unit ball in R^l, ``pi**(l/2) / Gamma(l/2 + 1)``."""
    if l < 1:
        raise ValueError("l must be >= 1")
    return math.pi ** (l / 2) / math.gamma(l / 2 + 1)


@dataclass(frozen=True)
class Frame:
    """Orthonormal basis (rows) of an l-plane in R^n."""

    basis: np.ndarray
    label: str = ""

    def __post_init__(self):
        B = np.atleast_2d(np.asarray(self.basis, dtype=float))
        object.__setattr__(self, "basis", B)
        gram = B @ B.T
        if not np.allclose(gram, np.eye(len(B)), rtol=0.0, atol=ORTHO_TOL):
            raise InvariantError(f"frame {self.label!r} is not orthonormal")

    @property
    def l(self) -> int:
        return self.basis.shape[0]

    @property
    def n(self) -> int:
        return self.basis.shape[1]


def frame_from_angle(theta: float, n: int = 2) -> Frame:
    """Line through ``(cos theta, sin theta)`` in the plane, ``theta`` in [-pi/2, pi/2]."""
    if n != 2:
        raise HypothesisError("angle frames are only defined for n = 2, l = 1")
    if not -math.pi / 2 <= theta <= math.pi / 2:
        raise HypothesisError(f"theta = {theta} outside [-pi/2, pi/2]")
    return Frame(np.array([[math.cos(theta), math.sin(theta)]]), label=fmt_float(theta))


def axis_frame(n: int, axes: Sequence[int] = (0,)) -> Frame:
    """The coordinate plane spanned by ``axes``."""
    B = np.zeros((len(axes), n))
    for i, a in enumerate(axes):
        B[i, a] = 1.0
    return Frame(B, label="axis" + "-".join(map(str, axes)))


def random_frame(n: int, l: int, seed: int, max_tries: int = 16) -> Frame:
    """Gaussian l-frame orthonormalised by sequential projection.

    Gaussian rows have a rotation-invariant law, so the spanned plane is
    uniform on the Grassmannian.
    """
    if not 1 <= l < n:
        raise HypothesisError(f"need 1 <= l < n, got l={l}, n={n}")
    gen = rng.SplitMix64(rng.derive_seed(seed, 0x5EED_F4A3))
    rows: list[np.ndarray] = []
    tries = 0
    while len(rows) < l:
        v = gen.standard_normals(n)
        for u in rows:
            v = v - (u @ v) * u
        for u in rows:  # second pass: keeps the Gram matrix at machine precision
            v = v - (u @ v) * u
        norm = np.linalg.norm(v)
        if norm < 1e-8:
            tries += 1
            if tries > max_tries:
                raise InvariantError("random_frame: repeated degenerate draws")
            continue
        rows.append(v / norm)
    return Frame(np.array(rows), label=f"seed{seed}")


@dataclass
class ProjectedBatch:
    points: np.ndarray  # (count, l)
    weights: np.ndarray
    source_block: int
    label: str = ""
    local: bool = False

    @property
    def mass(self) -> float:
        return math.fsum(self.weights)


def project_batch(batch: SampleBatch, frame: Frame) -> ProjectedBatch:
    """Coordinates of the orthogonal projection in the frame basis; weights are untouched."""
    if batch.points.shape[1] != frame.n:
        raise ValueError(f"batch lives in R^{batch.points.shape[1]}, frame in R^{frame.n}")
    return ProjectedBatch(points=batch.points @ frame.basis.T, weights=batch.weights,
                          source_block=batch.source_block, label=frame.label, local=batch.local)


@dataclass
class GridHistogram:
    """Sparse histogram on the lattice ``anchor + h Z^l``.

    ``cells`` holds the integer index of every occupied cell (relative to
    ``anchor``); ``origin`` is the lower corner of the bounding block of
    occupied cells and ``extents`` its size in cells.
    """

    anchor: np.ndarray
    h: float
    cells: np.ndarray
    masses: np.ndarray

    @property
    def l(self) -> int:
        return self.cells.shape[1]

    @property
    def origin(self) -> np.ndarray:
        return self.anchor + self.h * self.cells.min(axis=0)

    @property
    def extents(self) -> np.ndarray:
        return self.cells.max(axis=0) - self.cells.min(axis=0) + 1

    @property
    def cell_volume(self) -> float:
        return self.h**self.l

    @property
    def total_mass(self) -> float:
        return math.fsum(self.masses)

    @property
    def occupied(self) -> int:
        return int(np.count_nonzero(self.masses > 0))

    @property
    def support_measure(self) -> float:
        return self.occupied * self.cell_volume

    def density(self) -> np.ndarray:
        return self.masses / self.cell_volume


def _reduce_cells(idx: np.ndarray, vals: np.ndarray | None) -> tuple[np.ndarray, np.ndarray]:
    """Sum ``vals`` (or count rows, if None) per distinct row of ``idx``; rows come back sorted."""
    lo = idx.min(axis=0)
    span = idx.max(axis=0) - lo + 1
    if float(np.prod(span.astype(float))) <= max(4 * len(idx), 1 << 16):
        size = int(np.prod(span))
        lin = np.ravel_multi_index((idx - lo).T, span)
        if vals is None or vals.dtype.kind in "iu":
            tot = np.bincount(lin, weights=None if vals is None else vals, minlength=size)
            tot = np.rint(tot).astype(np.int64) if vals is not None else tot
        else:
            tot = np.bincount(lin, weights=vals, minlength=size)
        nz = np.flatnonzero(tot)
        keys = np.stack(np.unravel_index(nz, span), axis=1) + lo
        return keys, tot[nz]
    keys, inv = np.unique(idx, axis=0, return_inverse=True)
    inv = inv.ravel()
    if vals is None or vals.dtype.kind in "iu":
        out = np.zeros(len(keys), dtype=np.int64)
        np.add.at(out, inv, 1 if vals is None else vals)
    else:
        out = np.zeros(len(keys))
        np.add.at(out, inv, vals)
    return keys, out


class DensityAccumulator:
    """Streams points into a ``GridHistogram``.

    While every chunk carries the same uniform weight, cells hold integer
    counts and are multiplied by the weight once at the end, so mass is
    conserved to a single rounding.
    """

    def __init__(self, h: float, l: int, anchor: Sequence[float] | None = None):
        if not h > 0:
            raise ValueError("cell width h must be positive")
        self.h = float(h)
        self.anchor = np.zeros(l) if anchor is None else np.asarray(anchor, dtype=float)
        self._keys: list[np.ndarray] = []
        self._vals: list[np.ndarray] = []
        self._weight: float | None = None
        self._uniform = True
        self.count = 0

    def add(self, points: np.ndarray, weights: np.ndarray | float) -> None:
        pts = np.asarray(points, dtype=float).reshape(len(points), -1)
        if len(pts) == 0:
            return
        w = np.broadcast_to(np.asarray(weights, dtype=float), (len(pts),))
        if self._uniform and np.all(w == w[0]) and self._weight in (None, w[0]):
            self._weight = float(w[0])
            vals = None
        else:
            self._to_masses()
            vals = w
        idx = np.floor((pts - self.anchor) / self.h).astype(np.int64)
        keys, vals = _reduce_cells(idx, vals)
        self._keys.append(keys)
        self._vals.append(vals)
        self.count += len(pts)

    def _to_masses(self) -> None:
        if self._uniform:
            self._uniform = False
            if self._weight is not None:
                self._vals = [v * self._weight for v in self._vals]

    def result(self) -> GridHistogram:
        if not self._keys:
            raise ValueError("empty batch: nothing to histogram")
        cells, vals = _reduce_cells(np.concatenate(self._keys), np.concatenate(self._vals))
        masses = vals * self._weight if self._uniform else vals
        return GridHistogram(anchor=self.anchor, h=self.h, cells=cells, masses=masses)


def estimate_density(projected: ProjectedBatch, h: float,
                     anchor: Sequence[float] | None = None) -> GridHistogram:
    """Histogram of ``projected`` on half-open cells of width ``h``.

    Cells are aligned to ``anchor + h Z^l`` (the origin by default), so the
    grid at ``h / 2`` refines the grid at ``h``.
    """
    if len(projected.points) == 0:
        raise ValueError("empty batch: nothing to histogram")
    acc = DensityAccumulator(h, projected.points.shape[1], anchor)
    acc.add(projected.points, projected.weights)
    return acc.result()


@dataclass(frozen=True)
class NormParams:
    """Exponent ``p > 1`` and its conjugate ``q = p / (p - 1)``."""

    p: float

    def __post_init__(self):
        if not self.p > 1:
            raise HypothesisError(f"p must exceed 1, got {self.p}")

    @property
    def q(self) -> float:
        return self.p / (self.p - 1.0)


def lp_norm(hist: GridHistogram, params: NormParams | float) -> float:
    """``(sum (mass/h^l)**p h^l)**(1/p)``; ``p = 1`` gives the total mass."""
    p = params.p if isinstance(params, NormParams) else float(params)
    if p == 1:
        return hist.total_mass
    if p < 1:
        raise HypothesisError(f"p must be >= 1, got {p}")
    vol = hist.cell_volume
    m = hist.masses[hist.masses > 0]
    return vol ** (1.0 / p - 1.0) * math.fsum(m**p) ** (1.0 / p)


def hoelder_bound(c_j: float, r_j: float, d: float, l: int, params: NormParams) -> float:
    """``C**(-1/q) c_j r_j**(d - l/q)``, ``C`` the unit l-ball volume."""
    q = params.q
    return unit_ball_volume(l) ** (-1.0 / q) * c_j * r_j ** (d - l / q)


@dataclass
class DivergenceSeries:
    j: np.ndarray
    bounds: np.ndarray
    j0: int | None
    j0_exact: int | None
    increasing_from_j0: bool
    max_bound: float
    argmax: int


def divergence_series(sequence_law: SequenceLaw, d: float, l: int, params: NormParams,
                      J: int) -> DivergenceSeries:
    """Lower bounds ``hoelder_bound(c_j, r_j)`` for ``j = 1..J``.

    ``j0`` is an index from which the series is strictly increasing.  For
    the closed family it is ``ceil(alpha q / (l ln beta))`` (from
    ``ln(1 + 1/j) < 1/j``) and ``j0_exact`` is the sharp threshold
    ``floor(1 / (beta**(l/(q alpha)) - 1)) + 1``.  For explicit lists both
    are read off the computed range.
    """
    validate_sequences(sequence_law, [l / params.q], J, d=d)
    js = np.arange(1, J + 1)
    bounds = np.array([hoelder_bound(sequence_law.c(int(j), d), sequence_law.r(int(j)), d, l, params)
                       for j in js])
    up = np.diff(bounds) > 0
    # first index after the last non-increase within the range
    last_bad = np.flatnonzero(~up)
    empirical = int(last_bad[-1]) + 2 if len(last_bad) else 1
    if sequence_law.is_closed:
        eps = l / params.q
        a, b = sequence_law.alpha, sequence_law.beta
        j0 = math.ceil(a * params.q / (l * math.log(b)))
        j0_exact = math.floor(1.0 / (b ** (eps / a) - 1.0)) + 1
    else:
        j0 = j0_exact = empirical if empirical < J else None
    increasing = j0 is not None and bool(np.all(up[max(j0, 1) - 1:]))
    k = int(np.argmax(bounds))
    return DivergenceSeries(j=js, bounds=bounds, j0=j0, j0_exact=j0_exact,
                            increasing_from_j0=increasing, max_bound=float(bounds[k]),
                            argmax=int(js[k]))


@dataclass
class DensityReport:
    """Per (block, frame, p) summary, in absolute coordinates."""

    j: int
    label: str
    h: float
    samples: int
    p: float
    mass_l1: float
    norm_lp: float
    support_measure: float
    ball_measure: float
    hoelder_bound: float
    discrete_hoelder_ok: bool
    bound_ratio: float

    def csv_row(self) -> list[str]:
        return [str(self.j), self.label, fmt_float(self.h), str(self.samples),
                fmt_float(self.mass_l1), fmt_float(self.norm_lp), fmt_float(self.support_measure),
                fmt_float(self.hoelder_bound), fmt_float(self.bound_ratio),
                "true" if self.discrete_hoelder_ok else "false"]


def local_cell_width(block: BlockSpec, grid_divisor: float) -> float:
    """Default grid: realised local diameter ``lambda`` split into ``grid_divisor`` cells."""
    return block.homothety_lambda / grid_divisor


def report_from_histogram(block: BlockSpec, d: float, hist: GridHistogram, label: str,
                          samples: int, params: NormParams) -> DensityReport:
    """Convert a block-local histogram (lengths divided by ``r_j``) to absolute norms.

    ``||f_j||_p = r_j**(-l/q) ||f_local||_p`` and cell measures scale by
    ``r_j**l``; masses are unchanged.
    """
    l, q, r = hist.l, params.q, block.radius_r
    mass = hist.total_mass
    norm = r ** (-l / q) * lp_norm(hist, params)
    support = hist.support_measure * r**l
    bound = hoelder_bound(block.density_c, r, d, l, params)
    ok = norm * support ** (1.0 / q) >= mass - HOELDER_SLACK
    return DensityReport(j=block.index, label=label, h=hist.h * r, samples=samples, p=params.p,
                         mass_l1=mass, norm_lp=norm, support_measure=support,
                         ball_measure=unit_ball_volume(l) * r**l, hoelder_bound=bound,
                         discrete_hoelder_ok=bool(ok), bound_ratio=norm / bound)


def block_histograms(block: BlockSpec, factor: CantorFactorSpec, frames: Sequence[Frame],
                     count: int, depth: int, seed: int, h_local: float,
                     chunk: int = DEFAULT_CHUNK) -> list[GridHistogram]:
    """Block-local histograms of one sample stream, one per frame."""
    accs = [DensityAccumulator(h_local, f.l) for f in frames]
    w = block.mass / count
    for pts in iter_local_chunks(block, factor, count, depth, seed, chunk):
        for acc, f in zip(accs, frames):
            acc.add(pts @ f.basis.T, w)
    return [a.result() for a in accs]


def per_block_report(scene: SceneSpec, frames: Frame | Sequence[Frame], count: int = 10**6,
                     depth: int = DEFAULT_DEPTH, seed: int = 0,
                     params: NormParams | Sequence[NormParams] = NormParams(2.0),
                     grid_divisor: float = 128.0, blocks: Iterable[int] | None = None,
                     chunk: int = DEFAULT_CHUNK) -> list[DensityReport]:
    """Sample, project and histogram every block; one report per (block, frame, p).

    Block ``j`` is sampled once from seed ``mix64(seed ^ j)`` and shared by
    all frames and exponents.  Rows are ordered by block, then frame, then p.
    """
    frames = [frames] if isinstance(frames, Frame) else list(frames)
    plist = [params] if isinstance(params, NormParams) else list(params)
    for f in frames:
        if f.n != scene.ambient.n or f.l != scene.ambient.l:
            raise ValueError(f"frame {f.label!r} is not a {scene.ambient.l}-plane in R^{scene.ambient.n}")
    chosen = scene.blocks if blocks is None else [scene.block(j) for j in blocks]
    out = []
    for b in chosen:
        try:
            hists = block_histograms(b, scene.factor, frames, count, depth, block_seed(seed, b.index),
                                     local_cell_width(b, grid_divisor), chunk)
        except (ValueError, InvariantError) as exc:
            raise type(exc)(f"block {b.index}: {exc}") from exc
        for f, hist in zip(frames, hists):
            if abs(hist.total_mass - b.mass) > 1e-12 * b.mass:
                raise InvariantError(f"block {b.index}: histogram lost mass")
            for pr in plist:
                out.append(report_from_histogram(b, scene.ambient.d, hist, f.label, count, pr))
    return out


def reports_to_csv(reports: Sequence[DensityReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow(r.csv_row())
    return buf.getvalue()


@dataclass
class RegularityRow:
    j: int
    radius: float
    max_ratio: float
    density_c: float


def ball_mass(probe: np.ndarray, radius: float, batches: Sequence[SampleBatch],
              blocks: Sequence[BlockSpec]) -> float:
    """Sample estimate of ``mu(B(probe, radius))`` over all batches (open ball).

    Blocks whose bounding sphere (radius ``lambda r / 2``) misses the ball
    are skipped; they contribute nothing.
    """
    total = []
    for batch, b in zip(batches, blocks):
        if np.linalg.norm(probe - np.asarray(b.center)) >= radius + 0.5 * b.diameter_bound:
            continue
        inside = np.sum((batch.points - probe) ** 2, axis=1) < radius * radius
        total.append(math.fsum(batch.weights[inside]))
    return math.fsum(total)


def regularity_scan(scene: SceneSpec, radii: Sequence[float], probe_count: int = 32, seed: int = 0,
                    samples_per_block: int = 100_000, depth: int = DEFAULT_DEPTH) -> list[RegularityRow]:
    """Empirical upper-regularity constants ``max_x mu(B(x, r)) / r**d``.

    ``radii`` are relative: block ``j`` is probed at ``rho * r_j`` for each
    ``rho``, from ``probe_count`` points drawn from an independent sample of
    the same block.  For a fixed ``b`` condition ``mu(B(x, r)) <= b r**d``
    fails as soon as these constants are unbounded in ``j``.
    """
    if len(scene.blocks) < 2:
        raise HypothesisError("regularity scan needs a scene with at least 2 blocks")
    d = scene.ambient.d
    batches = [sample_block(b, scene.factor, samples_per_block, depth, block_seed(seed, b.index))
               for b in scene.blocks]
    probe_seed = rng.derive_seed(seed, 0x9B0B_E5)
    rows = []
    for b in scene.blocks:
        probes = sample_block(b, scene.factor, probe_count, depth, block_seed(probe_seed, b.index)).points
        for rho in radii:
            rad = rho * b.radius_r
            best = max(ball_mass(x, rad, batches, scene.blocks) for x in probes) / rad**d
            rows.append(RegularityRow(j=b.index, radius=rad, max_ratio=best, density_c=b.density_c))
    return rows


@dataclass
class MarstrandScan:
    thetas: np.ndarray
    support: np.ndarray
    h: float

    @property
    def min_support(self) -> float:
        return float(self.support.min())


def angle_grid(T: int, theta: float = 0.0) -> np.ndarray:
    """``T`` equally spaced angles ``-pi/2 + k pi / T``; ``T = 1`` gives ``[theta]``."""
    if T < 1:
        raise ValueError("need at least one angle")
    if T == 1:
        return np.array([theta])
    return -math.pi / 2 + math.pi * np.arange(T) / T


def marstrand_scan(block: BlockSpec, factor: CantorFactorSpec, thetas: Sequence[float],
                   count: int = 10**6, depth: int = DEFAULT_DEPTH, seed: int = 0,
                   grid_divisor: float = 128.0) -> MarstrandScan:
    """Occupied-cell length of the block's projection onto each line ``L_theta``.

    A coarse lower proxy for the length of the projected support.
    """
    if block.n != 2:
        raise HypothesisError("angle sweeps need n = 2")
    frames = [frame_from_angle(float(t)) for t in thetas]
    h_loc = local_cell_width(block, grid_divisor)
    hists = block_histograms(block, factor, frames, count, depth, seed, h_loc)
    support = np.array([hh.support_measure for hh in hists]) * block.radius_r
    return MarstrandScan(thetas=np.asarray(thetas, dtype=float), support=support,
                         h=h_loc * block.radius_r)
