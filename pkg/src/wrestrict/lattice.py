"""Diagonal lattices diag(s) Z^d, their duals, and box enumeration."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

DEFAULT_ENUMERATION_CAP = 10**8

# relative slack on closed box boundaries for float scales (R^beta is rarely exact)
_BOUNDARY_RTOL = 1e-12


class EnumerationCapExceeded(RuntimeError):
    def __init__(self, estimate: float, cap: float):
        super().__init__(f"estimated {estimate:.3g} points exceeds enumeration cap {cap:.3g}")
        self.estimate = estimate
        self.cap = cap


def _exactish(value):
    """Keep exact rationals exact, everything else becomes float."""
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return value
    return float(value)


def scale_power(R: float, exponent: float) -> float:
    """``R**exponent``, snapped to an integer when it is one up to rounding."""
    value = float(R) ** float(exponent)
    nearest = round(value)
    if nearest >= 1 and abs(value - nearest) <= 1e-12 * value:
        return float(nearest)
    return value


@dataclass(frozen=True)
class DiagonalLattice:
    """The lattice ``{(m_1 s_1, ..., m_d s_d) : m in Z^d}``."""

    scales: tuple

    def __post_init__(self):
        scales = tuple(_exactish(s) for s in self.scales)
        if len(scales) not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {len(scales)}")
        for s in scales:
            if not (math.isfinite(float(s)) and s > 0):
                raise ValueError(f"lattice scales must be positive and finite, got {s!r}")
        object.__setattr__(self, "scales", scales)

    @property
    def dimension(self) -> int:
        return len(self.scales)

    @property
    def covolume(self) -> float:
        return math.prod(float(s) for s in self.scales)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(s, (int, Fraction)) for s in self.scales)

    def dual(self) -> "DiagonalLattice":
        return dual(self)

    @classmethod
    def integer(cls, d: int = 2) -> "DiagonalLattice":
        return cls((1,) * d)

    @classmethod
    def anisotropic(cls, R: float, beta: float, d: int = 2) -> "DiagonalLattice":
        """``R^b Z x ... x R^b Z x R^{2b} Z``: the last axis is the coarse one."""
        fine = scale_power(R, beta)
        coarse = scale_power(R, 2 * beta)
        return cls((fine,) * (d - 1) + (coarse,))

    @classmethod
    def square(cls, R: float, beta: float, d: int = 2) -> "DiagonalLattice":
        return cls((scale_power(R, beta),) * d)


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned box ``|p_i - center_i| <= half_widths_i``."""

    center: tuple
    half_widths: tuple

    def __post_init__(self):
        center = tuple(_exactish(c) for c in self.center)
        half = tuple(_exactish(h) for h in self.half_widths)
        if len(center) != len(half):
            raise ValueError("center and half_widths differ in dimension")
        if any(not h > 0 for h in half):
            raise ValueError("half widths must be strictly positive")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "half_widths", half)

    @property
    def dimension(self) -> int:
        return len(self.center)

    @classmethod
    def cube(cls, R: float, d: int = 2) -> "Box":
        """The box ``[-R, R]^d``."""
        return cls((0,) * d, (R,) * d)

    def contains(self, p: Sequence) -> bool:
        return all(abs(x - c) <= h for x, c, h in zip(p, self.center, self.half_widths))


def dual(lattice: DiagonalLattice) -> DiagonalLattice:
    return DiagonalLattice(tuple((Fraction(1) / s) if isinstance(s, (int, Fraction)) else 1.0 / s
                                 for s in lattice.scales))


def point_count_estimate(lattice: DiagonalLattice, box: Box) -> float:
    return math.prod(2.0 * float(h) / float(s) + 1.0 for h, s in zip(box.half_widths, lattice.scales))


def index_range(scale, lo, hi) -> range:
    """Integers ``m`` with ``lo <= m * scale <= hi`` (closed, float slack for inexact input)."""
    if all(isinstance(v, (int, Fraction)) for v in (scale, lo, hi)):
        q_lo, q_hi = Fraction(lo) / scale, Fraction(hi) / scale
        return range(math.ceil(q_lo), math.floor(q_hi) + 1)
    scale, lo, hi = float(scale), float(lo), float(hi)
    slack = _BOUNDARY_RTOL * max(abs(lo), abs(hi), scale)
    return range(math.ceil((lo - slack) / scale), math.floor((hi + slack) / scale) + 1)


def box_index_ranges(lattice: DiagonalLattice, box: Box) -> list[range]:
    if lattice.dimension != box.dimension:
        raise ValueError("lattice and box dimensions differ")
    return [index_range(s, c - h, c + h)
            for s, c, h in zip(lattice.scales, box.center, box.half_widths)]


def enumerate_indices(lattice: DiagonalLattice, box: Box, cap: float = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """Integer coordinates of the lattice points in ``box``, lexicographically ordered."""
    estimate = point_count_estimate(lattice, box)
    if estimate > cap:
        raise EnumerationCapExceeded(estimate, cap)
    ranges = box_index_ranges(lattice, box)
    if any(len(r) == 0 for r in ranges):
        return np.zeros((0, lattice.dimension), dtype=np.int64)
    grids = np.meshgrid(*[np.arange(r.start, r.stop, dtype=np.int64) for r in ranges], indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def enumerate_in_box(lattice: DiagonalLattice, box: Box, cap: float = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """Lattice points in the closed box as an ``(n, d)`` float array.

    Ordering is lexicographic in the integer coordinates. For exact (integer
    or rational) scales use :func:`enumerate_in_box_exact` to keep exact values.
    """
    idx = enumerate_indices(lattice, box, cap)
    return idx.astype(float) * np.asarray([float(s) for s in lattice.scales])


def enumerate_in_box_exact(lattice: DiagonalLattice, box: Box, cap: float = DEFAULT_ENUMERATION_CAP) -> list[tuple]:
    estimate = point_count_estimate(lattice, box)
    if estimate > cap:
        raise EnumerationCapExceeded(estimate, cap)
    ranges = box_index_ranges(lattice, box)
    return [tuple(m * s for m, s in zip(idx, lattice.scales)) for idx in itertools.product(*ranges)]


def weight_set(R: float, beta: float, family: str = "aniso", d: int = 2) -> tuple[DiagonalLattice, Box]:
    """Lattice and box whose intersection is the weight set X.

    ``family="aniso"`` builds ``(R^b Z)^{d-1} x R^{2b} Z``; ``"square"`` builds
    ``(R^b Z)^d``. Both are cut to ``[-R, R]^d``.
    """
    if R <= 1:
        raise ValueError("R must exceed 1")
    if not (0 <= beta < 1):
        raise ValueError("beta must lie in [0, 1)")
    if family == "aniso":
        lattice = DiagonalLattice.anisotropic(R, beta, d)
    elif family == "square":
        lattice = DiagonalLattice.square(R, beta, d)
    else:
        raise ValueError(f"unknown lattice family {family!r}")
    return lattice, Box.cube(R, d)
