import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dsetproj.config import RunConfig, config_from_text, load_config
from dsetproj.construct import AmbientParams, SequenceLaw, assemble_scene
from dsetproj.errors import HypothesisError, InvariantError
from dsetproj.kvtext import dump_kv, fmt_float, parse_kv, read_scene, scene_from_text, scene_to_text

AMB = AmbientParams(2, 1, 1.5)


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_roundtrip_exact(x):
    assert float(fmt_float(x)) == x


def test_parse_comments_and_blanks():
    kv = parse_kv("# header\n\n a = 1 # trailing\nb=two words\n")
    assert kv == {"a": "1", "b": "two words"}


@pytest.mark.parametrize("text", ["a = 1\na = 2\n", "no equals sign\n", " = 3\n"])
def test_parse_errors(text):
    with pytest.raises(ValueError):
        parse_kv(text)


def test_dump_sequences():
    assert dump_kv([("x", [0.1, 2]), ("y", 3)]) == "x = 0.10000000000000001 2\ny = 3\n"


def test_scene_roundtrip_closed(tmp_path):
    scene = assemble_scene(AMB, SequenceLaw.closed(2, 2), 8)
    text = scene_to_text(scene)
    back = scene_from_text(text)
    assert back.blocks == scene.blocks
    assert back.factor == scene.factor
    assert scene_to_text(back) == text
    p = tmp_path / "scene.txt"
    p.write_text(text)
    assert read_scene(p).total_mass == scene.total_mass


def test_scene_roundtrip_explicit():
    d = 1.5
    law = SequenceLaw.explicit([8 ** (j * d) / j**2 for j in range(1, 7)], [8.0**-j for j in range(1, 7)])
    scene = assemble_scene(AMB, law, 6)
    back = scene_from_text(scene_to_text(scene))
    assert not back.sequence_law.is_closed
    assert back.blocks == scene.blocks
    assert back.total_mass == pytest.approx(sum(j**-2 for j in range(1, 7)), rel=1e-14)


def test_scene_rejects_wrong_format():
    with pytest.raises(ValueError):
        scene_from_text("format = other/1\n")


def test_scene_rejects_overlap():
    text = scene_to_text(assemble_scene(AMB, SequenceLaw.closed(2, 2), 3))
    kv = parse_kv(text)
    kv["block.2.center"] = kv["block.1.center"]
    with pytest.raises(InvariantError):
        scene_from_text(dump_kv(kv.items()))


def test_config_defaults_and_overrides(tmp_path):
    assert load_config(None) == RunConfig()
    cfg = config_from_text("J = 5\np = 1.5\nc = 1 2 3\naxis = 1\nlaw = closed\n")
    assert (cfg.J, cfg.p, cfg.c, cfg.axis) == (5, 1.5, (1.0, 2.0, 3.0), (1,))
    assert cfg.replace(J=None, seed=9).J == 5
    assert cfg.replace(seed=9).seed == 9
    cfg.validate()


def test_config_rejects_unknown_and_bad_values():
    with pytest.raises(HypothesisError):
        config_from_text("colour = red\n")
    with pytest.raises(HypothesisError):
        config_from_text("J = many\n")


@pytest.mark.parametrize("changes", [dict(alpha=1.0), dict(p=1.0), dict(J=0), dict(frame="none"),
                                     dict(n=3, frame="angle"), dict(law="explicit", c=(1.0,), r=(1.0,))])
def test_config_validation_failures(changes):
    with pytest.raises(HypothesisError):
        RunConfig().replace(**changes).validate()


def test_config_frames():
    assert RunConfig(theta=math.pi / 2).build_frame().basis[0] == pytest.approx([0.0, 1.0], abs=1e-16)
    f = RunConfig(n=3, l=2, d=2.5, frame="seed", frame_seed=4).validate().build_frame()
    assert f.basis.shape == (2, 3)
    assert RunConfig(frame="axis", axis=(1,)).build_frame().basis.tolist() == [[0.0, 1.0]]
