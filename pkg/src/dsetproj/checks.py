"""Desk-scale acceptance checks, shared by ``dsetproj verify`` and the test suite.

Every check runs at fixed parameters (n=2, l=1, d=1.5, beta=2, alpha=2)
with seeds derived from the master seed, so two runs with the same seed
write byte-identical CSV files.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass
from pathlib import Path
from types import SimpleNamespace
from typing import Callable

import numpy as np

from . import construct, projection
from .construct import AmbientParams, SequenceLaw, assemble_scene, base_block
from .errors import HypothesisError
from .projection import NormParams, frame_from_angle, per_block_report, reports_to_csv
from .rng import derive_seed
from .sampling import box_counting_dimension, sample_block

AMBIENT = AmbientParams(2, 1, 1.5)
LAW = SequenceLaw.closed(2.0, 2.0)
THETAS = (0.0, math.pi / 4, math.pi / 2)
P_VALUES = (1.5, 2.0, 4.0)


@dataclass
class CheckResult:
    number: int
    name: str
    value: str
    tolerance: str
    passed: bool
    seconds: float = 0.0

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"[{verdict}] {self.number:2d} {self.name}: {self.value} "
                f"(tolerance {self.tolerance}; {self.seconds:.1f} s)")


class Context:
    """Lazily computed artefacts shared between checks."""

    def __init__(self, seed: int, samples: int):
        self.seed = seed
        self.samples = samples
        self.scene = assemble_scene(AMBIENT, LAW, 8)
        self._reports = None

    def norm_reports(self):
        if self._reports is None:
            self._reports = self.compute_norm_reports()
        return self._reports

    def compute_norm_reports(self):
        frames = [frame_from_angle(t) for t in THETAS]
        return per_block_report(self.scene, frames, self.samples, seed=self.seed,
                                params=[NormParams(p) for p in P_VALUES])


def check_mass_identity(ctx: Context) -> CheckResult:
    worst = 0.0
    for r in ctx.norm_reports():
        m = ctx.scene.block(r.j).mass
        worst = max(worst, abs(r.mass_l1 - m) / m)
    return CheckResult(1, "mass identity ||f_j||_1 = c_j r_j^d (j<=8, 3 frames)",
                       f"max rel err {worst:.3e}", "1e-9", worst <= 1e-9)


def check_discrete_hoelder(ctx: Context) -> CheckResult:
    margin = min(r.norm_lp * r.support_measure ** (1.0 / NormParams(r.p).q) - r.mass_l1
                 for r in ctx.norm_reports())
    ok = margin >= -1e-9 and all(r.discrete_hoelder_ok for r in ctx.norm_reports())
    return CheckResult(2, "discrete Hoelder ||f||_p |S|^(1/q) >= ||f||_1 (p in 1.5, 2, 4)",
                       f"min margin {margin:.3e}", ">= -1e-9", ok)


def check_bound_tracking(ctx: Context) -> CheckResult:
    rows = [r for r in ctx.norm_reports() if r.p == 2.0 and r.j <= 6]
    ratios = [r.bound_ratio for r in rows]
    oracle = per_block_report(ctx.scene, [frame_from_angle(t) for t in THETAS], 10 * ctx.samples,
                              seed=derive_seed(ctx.seed, 0x0AC1E), params=NormParams(2.0),
                              grid_divisor=4 * 128.0, blocks=[1, 2])
    o_ratio = {(r.j, r.label): r.bound_ratio for r in oracle}
    ok = all(1 - 1e-9 <= x <= 3 for x in ratios) and all(1 - 1e-9 <= x <= 3 for x in o_ratio.values())
    rel = [r.bound_ratio / o_ratio[(r.j, r.label)] for r in rows if (r.j, r.label) in o_ratio]
    ok = ok and all(1 / 3 <= x <= 3 for x in rel)
    return CheckResult(3, "bound tracking ||f_j||_2 / hoelder_bound (j<=6; oracle 10x samples, h/4, j<=2)",
                       f"range [{min(ratios):.4f}, {max(ratios):.4f}], oracle max {max(o_ratio.values()):.4f}",
                       "[1-1e-9, 3]", ok)


def check_divergence(ctx: Context) -> CheckResult:
    series = projection.divergence_series(LAW, AMBIENT.d, AMBIENT.l, NormParams(2.0), 40)
    b = series.bounds
    increasing = bool(np.all(np.diff(b[5:]) > 0))
    v36 = float(b[35])
    ok = increasing and series.j0 == 6 and abs(v36 - 143.0) <= 0.5
    return CheckResult(4, "lower-bound series strictly increasing for j>=6, value at j=36",
                       f"j0={series.j0}, increasing={increasing}, b_36={v36:.4f}",
                       "143.0 +- 0.5", ok)


def check_dimension(ctx: Context) -> CheckResult:
    t0 = time.perf_counter()
    X = base_block(AMBIENT)
    factor = construct.cantor_digit_params(AMBIENT)
    batch = sample_block(X, factor, ctx.samples, seed=derive_seed(ctx.seed, 0xD1A))
    est, _ = box_counting_dimension(batch.points, [factor.ratio**k for k in range(1, 9)])
    dt = time.perf_counter() - t0
    return CheckResult(5, "box-counting dimension of X over scales rho^1..rho^8",
                       f"{est:.4f}", "[1.45, 1.55], < 60 s", 1.45 <= est <= 1.55 and dt < 60)


def check_construction(ctx: Context) -> CheckResult:
    # d = 1 is not a valid AmbientParams (l < d fails); the formula only reads n and d.
    m1 = construct.choose_subdivision(SimpleNamespace(n=2, d=1.0), 1, 1, 2)
    m2 = construct.choose_subdivision(AMBIENT, 1, 1, 10)
    lam = construct.homothety_ratio(8.0, 1.0, 1.5)
    ok = m1 == 3 and m2 == 283 and abs(lam - 0.25) <= 1e-12
    return CheckResult(6, "construction formulas M and lambda", f"M={m1}, M={m2}, lambda={lam!r}",
                       "exact (M), 1e-12 (lambda)", ok)


def check_sequences(ctx: Context) -> CheckResult:
    rep = construct.validate_sequences(LAW, [0.5], 10**6)
    try:
        construct.validate_sequences(SequenceLaw.closed(2.0, 1.0), [0.5], 10)
        rejected = False
    except HypothesisError:
        rejected = True
    ok = abs(rep.partial_sum - 1.64493) <= 1e-5 and rejected
    return CheckResult(7, "sequence hypotheses: partial sum at J=1e6, alpha=1 rejected",
                       f"S={rep.partial_sum:.8f}, alpha=1 rejected={rejected}", "1.64493 +- 1e-5", ok)


def check_regularity(ctx: Context) -> CheckResult:
    rows = projection.regularity_scan(ctx.scene, [1.0], probe_count=16, seed=derive_seed(ctx.seed, 0x4E6),
                                      samples_per_block=max(ctx.samples // 10, 1000))
    rel = [abs(r.max_ratio / r.density_c - 1) for r in rows]
    consts = [r.max_ratio for r in rows]
    # c_j = 2^(1.5 j) / j^2 dips at j = 2 and increases from there on
    increasing = all(b > a for a, b in zip(consts[1:], consts[2:]))
    growth = consts[-1] / consts[0]
    ok = max(rel) <= 0.05 and increasing and abs(growth - 2**10.5 / 64) <= 0.05 * 2**10.5 / 64
    return CheckResult(8, "regularity constants mu(B(x,r_j))/r_j^d = c_j, unbounded in j",
                       f"max rel dev {max(rel):.2e}, c_8/c_1 ratio {growth:.3f}", "5%", ok)


def check_marstrand(ctx: Context) -> CheckResult:
    thetas = projection.angle_grid(64)
    factor = ctx.scene.factor
    worst_min, ok = math.inf, True
    for b in (base_block(AMBIENT), ctx.scene.block(1)):
        scan = projection.marstrand_scan(b, factor, thetas, ctx.samples, seed=derive_seed(ctx.seed, 0x3A5 + b.index))
        worst_min = min(worst_min, scan.min_support)
        ok = ok and scan.min_support > 0 and bool(np.all(scan.support <= 2 * b.radius_r))
    return CheckResult(9, "projected support over 64 angles positive and <= 2 r_j",
                       f"min support {worst_min:.4f}", "> 0", ok)


def check_reproducibility(ctx: Context) -> CheckResult:
    first = reports_to_csv(ctx.norm_reports())
    second = reports_to_csv(ctx.compute_norm_reports())
    same = first == second
    return CheckResult(10, "fixed seed rerun gives byte-identical CSV", f"identical={same}", "exact", same)


CHECKS: tuple[Callable[[Context], CheckResult], ...] = (
    check_mass_identity, check_discrete_hoelder, check_bound_tracking, check_divergence,
    check_dimension, check_construction, check_sequences, check_regularity, check_marstrand,
    check_reproducibility,
)


def checks_to_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["number", "name", "value", "tolerance", "verdict"])
    for r in results:
        w.writerow([r.number, r.name, r.value, r.tolerance, "pass" if r.passed else "fail"])
    return buf.getvalue()


def run_acceptance(seed: int = 1, samples: int = 10**6, out_dir: str | Path | None = None,
                   echo: Callable[[str], None] | None = None) -> list[CheckResult]:
    ctx = Context(seed, samples)
    results = []
    for check in CHECKS:
        t0 = time.perf_counter()
        res = check(ctx)
        res.seconds = time.perf_counter() - t0
        results.append(res)
        if echo:
            echo(res.line())
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "verify_norms.csv").write_text(reports_to_csv(ctx.norm_reports()))
        (out / "verify_checks.csv").write_text(checks_to_csv(results))
    return results
