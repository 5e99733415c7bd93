"""Flat ``key = value`` text documents, used for scene files and run configs.

One pair per line; ``#`` starts a comment; blank lines are ignored; keys
are unique.  Floats are written with 17 significant digits so a write/read
cycle reproduces every double exactly.  Sequences are space separated.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

from .construct import AmbientParams, BlockSpec, CantorFactorSpec, SceneSpec, SequenceLaw, check_disjoint
from .errors import HypothesisError

SCENE_FORMAT = "dsetproj-scene/1"


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def parse_kv(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if key in out:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def dump_kv(pairs: Iterable[tuple[str, object]], header: str | None = None) -> str:
    lines = []
    if header:
        lines.extend(f"# {h}" for h in header.splitlines())
    for key, value in pairs:
        if isinstance(value, float):
            value = fmt_float(value)
        elif isinstance(value, (tuple, list)):
            value = " ".join(fmt_float(v) if isinstance(v, float) else str(v) for v in value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def _floats(s: str) -> tuple[float, ...]:
    return tuple(float(v) for v in s.split())


def scene_to_text(scene: SceneSpec) -> str:
    amb, law = scene.ambient, scene.sequence_law
    pairs: list[tuple[str, object]] = [
        ("format", SCENE_FORMAT),
        ("n", amb.n), ("l", amb.l), ("d", float(amb.d)),
        ("factor.pieces", scene.factor.pieces), ("factor.ratio", scene.factor.ratio),
    ]
    if law.is_closed:
        pairs += [("law", "closed"), ("law.beta", law.beta), ("law.alpha", law.alpha)]
    else:
        pairs += [("law", "explicit"), ("law.c", list(law.c_values)), ("law.r", list(law.r_values))]
    pairs.append(("J", scene.truncation_J))
    for b in scene.blocks:
        k = f"block.{b.index}"
        pairs += [
            (f"{k}.r", b.radius_r), (f"{k}.c", b.density_c), (f"{k}.M", b.subdivision_M),
            (f"{k}.lambda", b.homothety_lambda), (f"{k}.center", list(b.center)),
            (f"{k}.mass", b.mass), (f"{k}.base_mass", b.base_mass),
        ]
    return dump_kv(pairs, header="counterexample scene: blocks K_j with diam <= r_j, mass c_j r_j^d")


def scene_from_text(text: str) -> SceneSpec:
    kv = parse_kv(text)
    if kv.get("format") != SCENE_FORMAT:
        raise ValueError(f"unsupported scene format {kv.get('format')!r}")
    amb = AmbientParams(int(kv["n"]), int(kv["l"]), float(kv["d"]))
    factor = CantorFactorSpec(int(kv["factor.pieces"]), float(kv["factor.ratio"]))
    if kv["law"] == "closed":
        law = SequenceLaw.closed(float(kv["law.beta"]), float(kv["law.alpha"]))
    elif kv["law"] == "explicit":
        law = SequenceLaw.explicit(_floats(kv["law.c"]), _floats(kv["law.r"]))
    else:
        raise ValueError(f"unknown law kind {kv['law']!r}")
    J = int(kv["J"])
    blocks = []
    for j in range(1, J + 1):
        k = f"block.{j}"
        blocks.append(BlockSpec(
            index=j, radius_r=float(kv[f"{k}.r"]), density_c=float(kv[f"{k}.c"]),
            subdivision_M=int(kv[f"{k}.M"]), homothety_lambda=float(kv[f"{k}.lambda"]),
            center=_floats(kv[f"{k}.center"]), mass=float(kv[f"{k}.mass"]),
            base_mass=float(kv.get(f"{k}.base_mass", "1"))))
    if any(len(b.center) != amb.n for b in blocks):
        raise HypothesisError("block centre dimension does not match n")
    check_disjoint(blocks)
    return SceneSpec(ambient=amb, factor=factor, sequence_law=law,
                     blocks=tuple(blocks), truncation_J=J)


def write_scene(path: str | Path, scene: SceneSpec) -> None:
    Path(path).write_text(scene_to_text(scene))


def read_scene(path: str | Path) -> SceneSpec:
    return scene_from_text(Path(path).read_text())

