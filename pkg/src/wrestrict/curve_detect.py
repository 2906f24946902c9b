"""Certify that lattice points of a thin conic neighbourhood share one quadric.

Points lie on a common quadric exactly when their Veronese vectors (all
monomials of degree <= 2) are linearly dependent through a common
annihilating functional, i.e. when the Veronese matrix has a nonzero right
nullspace. Everything is decided in exact integer arithmetic.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .conics import N_MONOMIALS, QUADRATIC_SLICE, Quadric, eval_quadric, monomials, square_index
from .exact_algebra import ExactMatrix, height, nullspace, rank, rational_round

STATUSES = ("common_quadric", "full_rank", "insufficient_points")


@dataclass(frozen=True)
class VeroneseVector:
    source: tuple
    entries: tuple


def veronese(p: Sequence[int]) -> VeroneseVector:
    for x in p:
        if isinstance(x, float) or (isinstance(x, Fraction) and x.denominator != 1):
            raise TypeError("Veronese vectors are built from integer points")
    p = tuple(int(x) for x in p)
    return VeroneseVector(p, monomials(p))


def veronese_matrix(points: Sequence[Sequence[int]]) -> ExactMatrix:
    rows = [veronese(p).entries for p in points]
    d = len(points[0]) if len(points) else 2
    return ExactMatrix(rows, ncols=N_MONOMIALS[d])


def all_determinants_vanish(points: Sequence[Sequence[int]]) -> bool:
    """True iff every maximal minor of the Veronese matrix is zero (rank test)."""
    if len(points) == 0:
        return True
    M = veronese_matrix(points)
    return rank(M) < M.shape[1]


@dataclass
class DetectionCertificate:
    status: str
    quadric: Quadric | None
    rank: int
    max_height: int
    nullspace_dim: int = 0
    target_distance: float | None = None
    proximity_ok: bool | None = None
    C1: int | None = None
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        def ser(x):
            x = Fraction(x)
            return f"{x.numerator}/{x.denominator}"

        return {
            "status": self.status,
            "quadric": None if self.quadric is None else [ser(c) for c in self.quadric.coefficients],
            "rank": self.rank,
            "max_height": self.max_height,
            "nullspace_dim": self.nullspace_dim,
            "target_distance": self.target_distance,
            "proximity_ok": self.proximity_ok,
            "C1": self.C1,
        }


def _select_in_nullspace(basis: list[list[int]], target: np.ndarray, d: int) -> np.ndarray:
    """Least-squares coordinates (in the nullspace basis) matching the target's quadratic part."""
    N = np.asarray(basis, dtype=float).T  # columns are basis vectors
    quad = QUADRATIC_SLICE[d]
    # rescale columns so lstsq is not swamped by huge integer entries
    norms = np.linalg.norm(N, axis=0)
    Nq = N[quad] / norms
    alpha, *_ = np.linalg.lstsq(Nq, target[quad], rcond=None)
    return alpha / norms


def detect_common_quadric(points: Sequence[Sequence[int]], target: Quadric, tolerance: float,
                          height_base: int | None = None, C1: int | None = None,
                          max_C1: int = 60) -> DetectionCertificate:
    """Find an exact rational quadric through all ``points`` close to ``target``.

    The nullspace element nearest to the target (least squares on the
    quadratic-part coefficients) is rounded to rationals with denominators at
    most ``height_base ** (C1 + 10)``, rescaled so its leading square
    coefficient equals the target's, and re-verified exactly. ``C1`` defaults
    to the smallest exponent whose rounding error is below ``tolerance / 10``.
    ``proximity_ok`` records whether the quadratic part lies within
    ``tolerance`` of the target's.
    """
    if len(points) == 0:
        raise ValueError("detect_common_quadric needs at least one point")
    pts = [tuple(int(x) for x in p) for p in points]
    if len(set(pts)) != len(pts):
        raise ValueError("points must be distinct")
    d = target.dimension
    if any(len(p) != d for p in pts):
        raise ValueError("point and target dimensions differ")
    M = veronese_matrix(pts)
    basis = nullspace(M)
    k = M.shape[1] - len(basis)
    if not basis:
        return DetectionCertificate("full_rank", None, k, 0, 0)

    if height_base is None:
        height_base = max(2, math.isqrt(max(abs(x) for p in pts for x in p)) + 1)
    tgt = np.asarray([float(c) for c in target.coefficients])
    lead = square_index(d, 0)

    if len(basis) == 1:
        coeffs = [Fraction(c) for c in basis[0]]
        used_C1 = 0
    else:
        alpha = _select_in_nullspace(basis, tgt, d)
        N = np.asarray(basis, dtype=float).T
        exact_alpha = None
        used_C1 = C1
        trial = [C1] if C1 is not None else range(1, max_C1 + 1)
        for c1 in trial:
            H = height_base ** (c1 + 10)
            rounded = rational_round(alpha.tolist(), H)
            err = np.max(np.abs(N @ (alpha - np.asarray([float(x) for x in rounded]))))
            exact_alpha, used_C1 = rounded, c1
            if err <= tolerance / 10:
                break
        coeffs = [sum((a * b[i] for a, b in zip(exact_alpha, basis)), Fraction(0))
                  for i in range(M.shape[1])]

    if coeffs[lead] != 0 and target.coefficients[lead] != 0:
        factor = Fraction(target.coefficients[lead]) / coeffs[lead]
        coeffs = [factor * c for c in coeffs]
    if all(c == 0 for c in coeffs[QUADRATIC_SLICE[d]]):
        return DetectionCertificate("insufficient_points", None, k, 0, len(basis), C1=used_C1)
    quadric = Quadric(tuple(coeffs))
    for p in pts:
        if eval_quadric(quadric, p) != 0:
            raise ArithmeticError(f"detected quadric fails exact verification at {p}")
    quad = np.asarray([float(c) for c in quadric.quadratic_part])
    dist = float(np.linalg.norm(quad - tgt[QUADRATIC_SLICE[d]]))
    return DetectionCertificate("common_quadric", quadric, k, height(coeffs), len(basis),
                                target_distance=dist, proximity_ok=dist <= tolerance, C1=used_C1)


def detect_common_quadric_3d(points: Sequence[Sequence[int]], target: Quadric, tolerance: float,
                             **kwargs) -> DetectionCertificate:
    if target.dimension != 3:
        raise ValueError("3d detection needs a 10-coefficient target")
    return detect_common_quadric(points, target, tolerance, **kwargs)


def _error_row_bounds(r: float, beta: float, theta: float) -> tuple[list[float], list[float]]:
    """Per-column magnitudes of the on-curve part and the error part of a Veronese row."""
    b = float(beta)
    h1 = theta * r ** (-(1 - b) / b)
    h2 = theta * r ** (-(1 - 2 * b) / b)
    main = [1.0, 2 * r, 2 * r**2, 2 * r**2, 2 * r**4, 2 * r**3]
    err = [0.0, h1, h2, 10 * r * h1, 10 * r**2 * h2, 5 * (r * h2 + r**2 * h1)]
    return main, err


def determinant_error_budget(r: float, beta: float, theta: float) -> float:
    """Upper bound on any 6x6 Veronese determinant of points in the thin neighbourhood.

    Each row splits as an on-curve part (whose rows share a hyperplane, so
    their determinant vanishes) plus an error part. Summing the magnitudes of
    every expansion term that contains at least one error entry gives
    ``6! * (prod(m + e) - prod(m))`` since every row has the same column
    bounds. Once this is below 1 the integer determinant must be 0.
    """
    if r < 2:
        raise ValueError("r must be >= 2")
    if not (0 < float(beta) <= 0.5):
        raise ValueError("beta must lie in (0, 1/2]")
    if not (0 <= float(theta) < 1):
        raise ValueError("theta must lie in [0, 1)")
    if theta == 0:
        return 0.0
    main, err = _error_row_bounds(float(r), float(beta), float(theta))
    log_main = sum(math.log(m) for m in main)
    excess = math.expm1(sum(math.log1p(e / m) for e, m in zip(err, main)))
    return math.factorial(6) * math.exp(log_main) * excess


def determinant_error_budget_expansion(r: float, beta: float, theta: float) -> float:
    """Same bound summed term by term: every permutation, every nonempty set of error rows."""
    main, err = _error_row_bounds(float(r), float(beta), float(theta))
    total = 0.0
    for perm in itertools.permutations(range(6)):
        for mask in range(1, 64):
            term = 1.0
            for row, col in enumerate(perm):
                term *= err[col] if mask >> row & 1 else main[col]
            total += term
    return total
