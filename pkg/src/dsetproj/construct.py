"""Counterexample d-sets: Cantor product base, packed blocks, scenes.

All masses are carried for the natural self-similar measure of the base
product set ``X``, normalised to ``a = 1`` by default, and propagated with
the scaling laws of d-dimensional measure: a homothety of ratio ``t``
multiplies mass by ``t**d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import HypothesisError, InvariantError

_DIM_TOL = 1e-12


@dataclass(frozen=True)
class AmbientParams:
    """Ambient dimension ``n``, projection dimension ``l`` and target dimension ``d``."""

    n: int
    l: int
    d: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise HypothesisError(f"n must be an integer >= 2, got {self.n}")
        if int(self.l) != self.l or not 1 <= self.l < self.n:
            raise HypothesisError(f"l must be an integer with 1 <= l < n, got l={self.l}, n={self.n}")
        if not self.l < self.d < self.n:
            raise HypothesisError(f"need l < d < n strictly, got l={self.l}, d={self.d}, n={self.n}")


@dataclass(frozen=True)
class CantorFactorSpec:
    """Homogeneous Cantor set on [0, 1]: ``pieces`` copies of ratio ``ratio``.

    Piece ``k`` has left endpoint ``k * (1 - ratio) / (pieces - 1)``, so the
    outer endpoints 0 and 1 belong to the set.
    """

    pieces: int
    ratio: float

    def __post_init__(self):
        if self.pieces < 2:
            raise HypothesisError("a Cantor factor needs at least 2 pieces")
        if not 0.0 < self.ratio < 1.0 or self.pieces * self.ratio > 1.0:
            raise HypothesisError(
                f"pieces overlap: N * rho = {self.pieces * self.ratio} > 1")

    @property
    def left_endpoints(self) -> tuple[float, ...]:
        gap = (1.0 - self.ratio) / (self.pieces - 1)
        return tuple(k * gap for k in range(self.pieces))

    @property
    def dimension(self) -> float:
        return math.log(self.pieces) / math.log(1.0 / self.ratio)


def cantor_factor(n: int, d: float) -> CantorFactorSpec:
    """Two-piece factor whose n-fold product has dimension ``d``.

    Only ``0 < d < n`` is required here, so the classical middle-thirds set
    is ``cantor_factor(1, log 2 / log 3)``.
    """
    if not 0 < d < n:
        raise HypothesisError(f"need 0 < d < n, got d={d}, n={n}")
    factor = CantorFactorSpec(pieces=2, ratio=2.0 ** (-n / d))
    if abs(factor.dimension - d / n) >= _DIM_TOL:
        raise InvariantError(f"factor dimension {factor.dimension} != {d / n}")
    return factor


def cantor_digit_params(ambient: AmbientParams) -> CantorFactorSpec:
    return cantor_factor(ambient.n, ambient.d)


def packed_mass(ambient: AmbientParams, base_mass: float, r: float, M: int) -> float:
    """Mass of ``M**n`` copies of X of ratio ``r / (M sqrt n)``, i.e. ``M**(n-d) a r**d n**(-d/2)``."""
    n, d = ambient.n, ambient.d
    return float(M) ** (n - d) * base_mass * r**d * n ** (-d / 2)


def choose_subdivision(ambient: AmbientParams, base_mass_a: float, r: float, c: float) -> int:
    """Smallest integer ``M >= 1`` whose packed mass reaches ``c``."""
    if base_mass_a <= 0 or r <= 0 or c <= 0:
        raise HypothesisError("base mass, r and c must all be positive")
    unit = packed_mass(ambient, base_mass_a, r, 1)
    if unit >= c:
        return 1
    guess = (c / unit) ** (1.0 / (ambient.n - ambient.d))
    if guess > 2.0**52:
        # Neighbouring integers are indistinguishable in double precision:
        # keep the mass condition, give up exact minimality.
        M = math.ceil(guess)
        while packed_mass(ambient, base_mass_a, r, M) < c:
            M += (M >> 48) + 1
        return M
    M = max(1, math.ceil(guess))
    while packed_mass(ambient, base_mass_a, r, M) < c:
        M += 1
    while M > 1 and packed_mass(ambient, base_mass_a, r, M - 1) >= c:
        M -= 1
    return M


def homothety_ratio(massY: float, c: float, d: float) -> float:
    """Ratio of the contraction taking mass ``massY`` down to ``c``."""
    if c <= 0:
        raise HypothesisError("target mass must be positive")
    if massY < c:
        raise InvariantError(f"packed mass {massY} below target {c}; subdivision too coarse")
    return (c / massY) ** (1.0 / d)


@dataclass(frozen=True)
class BlockSpec:
    """One block: a packed, shrunk copy of X inside a cube centred at ``center``.

    Geometry: the cube of side ``r / sqrt(n)`` around ``center`` is split
    into ``M**n`` subcubes, each holding a copy of X of ratio
    ``r / (M sqrt n)``; the assembly is then shrunk by ``homothety_lambda``
    about ``center``.  ``index == 0`` is reserved for X itself.
    """

    index: int
    radius_r: float
    density_c: float
    subdivision_M: int
    homothety_lambda: float
    center: tuple[float, ...]
    mass: float
    base_mass: float = 1.0

    @property
    def n(self) -> int:
        return len(self.center)

    @property
    def cube_side(self) -> float:
        """Side of the shrunk cube containing the block."""
        return self.homothety_lambda * self.radius_r / math.sqrt(self.n)

    @property
    def diameter_bound(self) -> float:
        """Diagonal of the shrunk cube; the block's diameter is at most this."""
        return self.homothety_lambda * self.radius_r

    def bookkeeping_mass(self, d: float) -> float:
        n, M = self.n, self.subdivision_M
        copy = self.radius_r / (M * math.sqrt(n))
        return self.homothety_lambda**d * float(M) ** n * self.base_mass * copy**d


def build_block(ambient: AmbientParams, factor: CantorFactorSpec, j: int, r_j: float,
                c_j: float, center: Sequence[float], base_mass: float = 1.0) -> BlockSpec:
    if r_j <= 0 or c_j <= 0:
        raise HypothesisError(f"block {j}: r and c must be positive")
    if len(center) != ambient.n:
        raise ValueError(f"center has {len(center)} coordinates, expected {ambient.n}")
    target = c_j * r_j**ambient.d
    M = choose_subdivision(ambient, base_mass, r_j, target)
    lam = homothety_ratio(packed_mass(ambient, base_mass, r_j, M), target, ambient.d)
    return BlockSpec(index=j, radius_r=r_j, density_c=c_j, subdivision_M=M,
                     homothety_lambda=lam, center=tuple(float(x) for x in center),
                     mass=target, base_mass=base_mass)


def base_block(ambient: AmbientParams, base_mass: float = 1.0) -> BlockSpec:
    """X itself as a block: unit cube at the origin, ``M = 1``, ``lambda = 1``."""
    n, d = ambient.n, ambient.d
    return BlockSpec(index=0, radius_r=math.sqrt(n), density_c=base_mass * n ** (-d / 2),
                     subdivision_M=1, homothety_lambda=1.0, center=(0.5,) * n,
                     mass=base_mass, base_mass=base_mass)


@dataclass(frozen=True)
class SequenceLaw:
    """Either the family ``r_j = beta**-j, c_j = beta**(j d) j**-alpha`` or explicit lists."""

    beta: float | None = None
    alpha: float | None = None
    c_values: tuple[float, ...] | None = None
    r_values: tuple[float, ...] | None = None

    @classmethod
    def closed(cls, beta: float, alpha: float) -> "SequenceLaw":
        return cls(beta=float(beta), alpha=float(alpha))

    @classmethod
    def explicit(cls, c_values: Sequence[float], r_values: Sequence[float]) -> "SequenceLaw":
        if len(c_values) != len(r_values) or not c_values:
            raise HypothesisError("explicit law needs equally long, non-empty c and r lists")
        return cls(c_values=tuple(map(float, c_values)), r_values=tuple(map(float, r_values)))

    @property
    def is_closed(self) -> bool:
        return self.c_values is None

    def __len__(self) -> int:
        if self.is_closed:
            raise TypeError("closed-form law is infinite")
        return len(self.c_values)

    def r(self, j: int) -> float:
        if self.is_closed:
            return self.beta ** (-j)
        return self.r_values[j - 1]

    def c(self, j: int, d: float) -> float:
        if self.is_closed:
            return self.beta ** (j * d) * j ** (-self.alpha)
        return self.c_values[j - 1]

    def mass(self, j: int, d: float) -> float:
        return self.c(j, d) * self.r(j) ** d

    def growth(self, j: int, d: float, eps: float) -> float:
        """``c_j r_j**(d - eps)``."""
        if self.is_closed:
            return self.beta ** (eps * j) * j ** (-self.alpha)
        return self.c(j, d) * self.r(j) ** (d - eps)


@dataclass
class SequenceReport:
    valid: bool
    heuristic: bool
    J_probe: int
    partial_sum: float
    tail_estimate: float
    log_growth: dict[float, float] = field(default_factory=dict)
    growing: dict[float, bool] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def sum_estimate(self) -> float:
        return self.partial_sum + self.tail_estimate


def _power_partial_sum(alpha: float, J: int) -> float:
    # Smallest terms first, compensated.
    j = np.arange(J, 0, -1, dtype=np.float64)
    return math.fsum(j ** (-alpha))


def _power_tail(alpha: float, J: int) -> float:
    """Euler-Maclaurin estimate of ``sum_{j > J} j**-alpha``."""
    return (J ** (1.0 - alpha) / (alpha - 1.0) - 0.5 * J ** (-alpha)
            + alpha * J ** (-alpha - 1.0) / 12.0)


def validate_sequences(law: SequenceLaw, epsilon_list: Sequence[float], J_probe: int,
                       d: float | None = None) -> SequenceReport:
    """Check summability of ``c_j r_j**d`` and divergence of ``c_j r_j**(d - eps)``.

    For the closed family both hypotheses reduce to ``alpha > 1`` and
    ``beta > 1``, and the report is exact apart from the numerical partial
    sum.  Explicit lists can only be probed, so their report is marked
    heuristic.

    Raises
    ------
    HypothesisError
        If either hypothesis fails.
    """
    if J_probe < 1:
        raise ValueError("J_probe must be >= 1")
    if any(e <= 0 for e in epsilon_list):
        raise ValueError("epsilons must be positive")
    if law.is_closed:
        if law.alpha <= 1:
            raise HypothesisError(f"α ≤ 1: Σ cⱼrⱼᵈ diverges (alpha = {law.alpha})")
        if law.beta <= 1:
            raise HypothesisError(f"β ≤ 1: cⱼrⱼ^(d-ε) does not diverge (beta = {law.beta})")
        report = SequenceReport(valid=True, heuristic=False, J_probe=J_probe,
                                partial_sum=_power_partial_sum(law.alpha, J_probe),
                                tail_estimate=_power_tail(law.alpha, J_probe))
        for eps in epsilon_list:
            report.log_growth[eps] = eps * J_probe * math.log(law.beta) - law.alpha * math.log(J_probe)
            report.growing[eps] = True
        return report

    if d is None:
        raise ValueError("explicit laws need d")
    J = min(J_probe, len(law))
    masses = [law.mass(j, d) for j in range(1, J + 1)]
    if any(not math.isfinite(m) or m <= 0 for m in masses):
        raise HypothesisError("explicit law has non-positive or non-finite terms")
    report = SequenceReport(valid=True, heuristic=True, J_probe=J,
                            partial_sum=math.fsum(masses), tail_estimate=0.0)
    half = masses[J // 2:]
    if J >= 4 and math.fsum(half) > 0.5 * report.partial_sum:
        report.valid = False
        report.notes.append("second half of the list carries most of the mass: Σ cⱼrⱼᵈ looks divergent")
    for eps in epsilon_list:
        g = [law.growth(j, d, eps) for j in range(1, J + 1)]
        tail = g[J // 2:]
        if J < 4:
            ok = True
            report.notes.append(f"list too short to probe growth for ε = {eps}")
        else:
            ok = tail[-1] > tail[0] and tail[-1] >= max(g[:J // 2])
        report.log_growth[eps] = math.log(g[-1])
        report.growing[eps] = ok
        if not ok:
            report.valid = False
            report.notes.append(f"cⱼrⱼ^(d-ε) not eventually growing for ε = {eps}")
    if not report.valid:
        raise HypothesisError("; ".join(report.notes))
    return report


@dataclass(frozen=True)
class SceneSpec:
    ambient: AmbientParams
    factor: CantorFactorSpec
    sequence_law: SequenceLaw
    blocks: tuple[BlockSpec, ...]
    truncation_J: int

    @property
    def total_mass(self) -> float:
        return math.fsum(b.mass for b in self.blocks)

    def block(self, j: int) -> BlockSpec:
        return self.blocks[j - 1]


def check_disjoint(blocks: Sequence[BlockSpec]) -> None:
    """Raise unless the enclosing balls ``B(center_j, r_j)`` are pairwise disjoint."""
    centers = np.array([b.center for b in blocks])
    radii = np.array([b.radius_r for b in blocks])
    for i in range(len(blocks)):
        dist = np.linalg.norm(centers[i + 1:] - centers[i], axis=1)
        if np.any(dist < radii[i] + radii[i + 1:]):
            raise InvariantError(f"enclosing ball of block {blocks[i].index} overlaps a later block")


def assemble_scene(ambient: AmbientParams, sequence_law: SequenceLaw, J: int,
                   base_mass: float = 1.0) -> SceneSpec:
    """Place blocks ``1..J`` along the first axis.

    Consecutive centres are ``2 (r_j + r_{j+1})`` apart: the enclosing
    balls are disjoint, and a ball of radius ``r_j`` around any point of
    block ``j`` meets no other block.
    """
    if J < 1:
        raise HypothesisError("J must be >= 1")
    if not sequence_law.is_closed and J > len(sequence_law):
        raise HypothesisError(f"explicit law has {len(sequence_law)} terms, J = {J}")
    validate_sequences(sequence_law, [ambient.l / 2.0], J, d=ambient.d)
    factor = cantor_digit_params(ambient)
    blocks = []
    x = 0.0
    for j in range(1, J + 1):
        r = sequence_law.r(j)
        if j > 1:
            x += 2.0 * (sequence_law.r(j - 1) + r)
        center = (x,) + (0.0,) * (ambient.n - 1)
        blocks.append(build_block(ambient, factor, j, r, sequence_law.c(j, ambient.d),
                                  center, base_mass))
    check_disjoint(blocks)
    return SceneSpec(ambient=ambient, factor=factor, sequence_law=sequence_law,
                     blocks=tuple(blocks), truncation_J=J)
