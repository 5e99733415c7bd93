"""``dsetproj`` command line: build, norms, verify, sweep.

Exit codes: 0 success, 1 hypothesis violation (bad parameters),
2 internal invariant failure (including a failed ``verify`` check).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import checks
from .config import RunConfig, load_config
from .construct import SceneSpec, assemble_scene
from .errors import HypothesisError, InvariantError
from .kvtext import fmt_float, write_scene
from .projection import (angle_grid, divergence_series, frame_from_angle, per_block_report,
                         reports_to_csv)
from .svg import log_plot

EXIT_OK, EXIT_HYPOTHESIS, EXIT_INVARIANT = 0, 1, 2


def _scene(cfg: RunConfig) -> SceneSpec:
    return assemble_scene(cfg.ambient(), cfg.sequence_law(), cfg.J)


def _out(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_build(cfg: RunConfig) -> int:
    scene = _scene(cfg)
    path = _out(cfg) / "scene.txt"
    write_scene(path, scene)
    print(f"{'j':>3} {'r_j':>12} {'c_j':>14} {'M':>10} {'lambda':>10} {'mass':>12}")
    for b in scene.blocks:
        print(f"{b.index:>3} {b.radius_r:>12.6g} {b.density_c:>14.6g} {b.subdivision_M:>10d} "
              f"{b.homothety_lambda:>10.6f} {b.mass:>12.6g}")
    print(f"total mass {fmt_float(scene.total_mass)}; scene written to {path}")
    return EXIT_OK


def cmd_norms(cfg: RunConfig) -> int:
    scene = _scene(cfg)
    frame = cfg.build_frame()
    params = cfg.norm_params()
    reports = per_block_report(scene, frame, cfg.samples, cfg.depth, cfg.seed, params, cfg.grid_divisor)
    out = _out(cfg)
    (out / "norms.csv").write_text(reports_to_csv(reports))
    series = divergence_series(scene.sequence_law, cfg.d, cfg.l, params, cfg.J)
    svg = log_plot(list(series.j), {f"||f_j||_{cfg.p:g} (histogram)": [r.norm_lp for r in reports],
                                     "Hoelder lower bound": list(series.bounds)},
                   title=f"L^{cfg.p:g} norms of projected block densities, frame {frame.label}",
                   ylabel="norm")
    (out / "norms.svg").write_text(svg)
    bad = [r.j for r in reports if not r.discrete_hoelder_ok]
    print(f"{len(reports)} rows written to {out / 'norms.csv'}; plot in {out / 'norms.svg'}")
    if bad:
        print(f"discrete Hoelder inequality failed for blocks {bad}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    results = checks.run_acceptance(cfg.seed, cfg.samples, _out(cfg), echo=print)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_INVARIANT if failed else EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    if cfg.n != 2:
        raise HypothesisError("angle sweeps need n = 2 (use frame = seed for random planes)")
    scene = _scene(cfg)
    thetas = angle_grid(cfg.frames, cfg.theta)
    frames = [frame_from_angle(float(t)) for t in thetas]
    reports = per_block_report(scene, frames, cfg.samples, cfg.depth, cfg.seed, cfg.norm_params(),
                               cfg.grid_divisor)
    out = _out(cfg)
    (out / "sweep.csv").write_text(reports_to_csv(reports))
    for b in scene.blocks:
        sup = [r.support_measure for r in reports if r.j == b.index]
        print(f"block {b.index}: support over {len(sup)} angles in "
              f"[{min(sup):.6g}, {max(sup):.6g}], 2 r_j = {2 * b.radius_r:.6g}")
        if min(sup) <= 0 or max(sup) > 2 * b.radius_r:
            raise InvariantError(f"block {b.index}: projected support outside (0, 2 r_j]")
    print(f"{len(reports)} rows written to {out / 'sweep.csv'}")
    return EXIT_OK


COMMANDS = {"build": cmd_build, "norms": cmd_norms, "verify": cmd_verify, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--seed", type=int, help="master seed (u64)")
    common.add_argument("--samples", type=int, help="samples per block")
    common.add_argument("--out", help="output directory")
    common.add_argument("--blocks", type=int, dest="J", help="number of blocks J")
    common.add_argument("--p", type=float, help="L^p exponent, p > 1")
    common.add_argument("--theta", type=float, help="projection angle in [-pi/2, pi/2] (n = 2)")
    common.add_argument("--frames", type=int, help="number of angles for sweep")
    parser = argparse.ArgumentParser(prog="dsetproj", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("build", parents=[common], help="build a scene and write it to OUT/scene.txt")
    sub.add_parser("norms", parents=[common], help="per-block L^p norms: OUT/norms.csv, OUT/norms.svg")
    sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    sub.add_parser("sweep", parents=[common], help="angle sweep of norms and supports: OUT/sweep.csv")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config).replace(
            seed=args.seed, samples=args.samples, out=args.out, J=args.J, p=args.p,
            theta=args.theta, frames=args.frames)
        if args.theta is not None:
            cfg = cfg.replace(frame="angle")
        cfg.validate()
        return COMMANDS[args.command](cfg)
    except HypothesisError as exc:
        print(f"hypothesis violation: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except InvariantError as exc:
        print(f"internal invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS


if __name__ == "__main__":
    sys.exit(main())
