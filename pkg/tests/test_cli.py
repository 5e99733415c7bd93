import csv
import io
import math
import subprocess
import sys

import pytest

from dsetproj.cli import main
from dsetproj.construct import SequenceLaw
from dsetproj.kvtext import read_scene
from dsetproj.projection import NormParams, divergence_series


def rows(path):
    return list(csv.DictReader(io.StringIO(path.read_text())))


def test_build_default(tmp_path, capsys):
    assert main(["build", "--out", str(tmp_path)]) == 0
    scene = read_scene(tmp_path / "scene.txt")
    assert len(scene.blocks) == 8
    for b in scene.blocks:
        assert b.mass == pytest.approx(1 / b.index**2, rel=1e-14)
    out = capsys.readouterr().out
    assert "total mass" in out and len(out.splitlines()) == 10


def test_build_single_block(tmp_path):
    assert main(["build", "--blocks", "1", "--out", str(tmp_path)]) == 0
    assert len(read_scene(tmp_path / "scene.txt").blocks) == 1


def test_hypothesis_violation_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("alpha = 1\n")
    assert main(["build", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    assert "hypothesis violation" in capsys.readouterr().err
    assert main(["norms", "--p", "1", "--out", str(tmp_path)]) == 1
    assert main(["build", "--config", str(tmp_path / "missing.cfg")]) == 1


def test_norms(tmp_path):
    assert main(["norms", "--blocks", "4", "--samples", "20000", "--p", "2", "--out", str(tmp_path)]) == 0
    table = rows(tmp_path / "norms.csv")
    assert [int(r["j"]) for r in table] == [1, 2, 3, 4]
    assert all(r["discrete_hoelder_ok"] == "true" for r in table)
    svg = (tmp_path / "norms.svg").read_text()
    assert svg.startswith("<svg") or svg.startswith("<?xml")
    series = divergence_series(SequenceLaw.closed(2, 2), 1.5, 1, NormParams(2), 4)
    assert [float(r["hoelder_bound"]) for r in table] == list(series.bounds)


def test_norms_random_frame_config(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n = 3\nl = 2\nd = 2.5\nframe = seed\nframe_seed = 7\nJ = 2\nsamples = 5000\n")
    assert main(["norms", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    table = rows(tmp_path / "norms.csv")
    assert {r["theta_or_label"] for r in table} == {"seed7"}


def test_sweep_single_angle_matches_norms(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    common = ["--blocks", "3", "--samples", "10000", "--seed", "5"]
    assert main(["norms", *common, "--theta", "0", "--out", str(a)]) == 0
    assert main(["sweep", *common, "--frames", "1", "--theta", "0", "--out", str(b)]) == 0
    assert (a / "norms.csv").read_text() == (b / "sweep.csv").read_text()


def test_sweep_grid(tmp_path, capsys):
    assert main(["sweep", "--blocks", "2", "--samples", "5000", "--frames", "8", "--out", str(tmp_path)]) == 0
    table = rows(tmp_path / "sweep.csv")
    assert len(table) == 16
    thetas = sorted({float(r["theta_or_label"]) for r in table})
    assert thetas == pytest.approx([-math.pi / 2 + k * math.pi / 8 for k in range(8)])
    for r in table:
        j = int(r["j"])
        assert 0 < float(r["support_measure"]) <= 2 * 2.0**-j


def test_sweep_needs_plane(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n = 3\nl = 1\nd = 2.5\nframe = seed\n")
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path)]) == 1


def test_theta_out_of_range(tmp_path):
    assert main(["norms", "--theta", "2", "--out", str(tmp_path)]) == 1


def test_module_entry_point(tmp_path):
    done = subprocess.run([sys.executable, "-m", "dsetproj", "build", "--blocks", "2", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert done.returncode == 0
    assert (tmp_path / "scene.txt").exists()


def test_usage_error_exits_nonzero():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code != 0


def test_sweep_single_angle_matches_axis_frame(tmp_path):
    cfg = tmp_path / "axis.cfg"
    cfg.write_text("frame = axis\naxis = 0\n")
    common = ["--blocks", "3", "--samples", "10000", "--seed", "5"]
    assert main(["norms", "--config", str(cfg), *common, "--out", str(tmp_path / "a")]) == 0
    assert main(["sweep", *common, "--frames", "1", "--theta", "0", "--out", str(tmp_path / "b")]) == 0
    a, b = rows(tmp_path / "a" / "norms.csv"), rows(tmp_path / "b" / "sweep.csv")
    assert {r["theta_or_label"] for r in a} == {"axis0"}
    for ra, rb in zip(a, b, strict=True):
        del ra["theta_or_label"], rb["theta_or_label"]
        assert ra == rb
