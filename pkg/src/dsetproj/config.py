"""Run configuration for the command line tools.

Read from a key-value file (see ``kvtext``) and then overridden by flags.
Recognised keys::

    n, l, d                  ambient parameters            (2, 1, 1.5)
    law                      closed | explicit             (closed)
    beta, alpha              closed family parameters      (2, 2)
    c, r                     explicit lists, space separated
    J                        number of blocks              (8)
    p                        L^p exponent                  (2)
    frame                    angle | seed | axis           (angle)
    theta, frame_seed, axis  frame parameters              (0, 0, 0)
    frames                   angle count for sweeps        (64)
    samples, depth           per-block sampling            (1000000, 40)
    grid_divisor             cells per local diameter      (128)
    seed                     master seed (u64)             (1)
    out                      output directory              (out)
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .construct import AmbientParams, SequenceLaw, validate_sequences
from .errors import HypothesisError
from .kvtext import parse_kv
from .projection import Frame, NormParams, axis_frame, frame_from_angle, random_frame
from .rng import MASK64


@dataclass
class RunConfig:
    n: int = 2
    l: int = 1
    d: float = 1.5
    law: str = "closed"
    beta: float = 2.0
    alpha: float = 2.0
    c: tuple[float, ...] = ()
    r: tuple[float, ...] = ()
    J: int = 8
    p: float = 2.0
    frame: str = "angle"
    theta: float = 0.0
    frame_seed: int = 0
    axis: tuple[int, ...] = (0,)
    frames: int = 64
    samples: int = 10**6
    depth: int = 40
    grid_divisor: float = 128.0
    seed: int = 1
    out: str = "out"

    def ambient(self) -> AmbientParams:
        return AmbientParams(self.n, self.l, self.d)

    def sequence_law(self) -> SequenceLaw:
        if self.law == "closed":
            return SequenceLaw.closed(self.beta, self.alpha)
        if self.law == "explicit":
            return SequenceLaw.explicit(self.c, self.r)
        raise HypothesisError(f"unknown law {self.law!r} (closed | explicit)")

    def norm_params(self) -> NormParams:
        return NormParams(self.p)

    def build_frame(self) -> Frame:
        if self.frame == "angle":
            return frame_from_angle(self.theta, self.n)
        if self.frame == "seed":
            return random_frame(self.n, self.l, self.frame_seed)
        if self.frame == "axis":
            if len(self.axis) != self.l:
                raise HypothesisError(f"axis frame needs {self.l} axes, got {len(self.axis)}")
            return axis_frame(self.n, self.axis)
        raise HypothesisError(f"unknown frame kind {self.frame!r} (angle | seed | axis)")

    def validate(self) -> "RunConfig":
        amb = self.ambient()
        params = self.norm_params()
        law = self.sequence_law()
        if self.J < 1:
            raise HypothesisError("J must be >= 1")
        if not law.is_closed and len(law) < self.J:
            raise HypothesisError(f"explicit law has {len(law)} terms but J = {self.J}")
        validate_sequences(law, [amb.l / params.q], self.J, d=amb.d)
        if self.samples < 1 or self.depth < 1 or self.frames < 1:
            raise HypothesisError("samples, depth and frames must be positive")
        if not self.grid_divisor > 0:
            raise HypothesisError("grid_divisor must be positive")
        if not 0 <= self.seed <= MASK64:
            raise HypothesisError("seed must be an unsigned 64-bit integer")
        self.build_frame()
        return self

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})


def _convert(f: dataclasses.Field, raw: str):
    kind = f.type
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    if kind == "tuple[float, ...]":
        return tuple(float(v) for v in raw.split())
    if kind == "tuple[int, ...]":
        return tuple(int(v) for v in raw.split())
    return raw


def config_from_text(text: str) -> RunConfig:
    kv = parse_kv(text)
    fields = {f.name: f for f in dataclasses.fields(RunConfig)}
    unknown = set(kv) - set(fields)
    if unknown:
        raise HypothesisError(f"unknown config keys: {', '.join(sorted(unknown))}")
    try:
        values = {k: _convert(fields[k], v) for k, v in kv.items()}
    except ValueError as exc:
        raise HypothesisError(f"bad config value: {exc}") from exc
    return RunConfig(**values)


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    return config_from_text(Path(path).read_text())
