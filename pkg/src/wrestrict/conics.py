"""Quadrics, surfaces of the extension problem, and thin anisotropic neighborhoods.

Monomial order (fixed for every module that handles coefficient vectors):

* d = 2: ``(1, x, y, x^2, y^2, xy)``
* d = 3: ``(1, x1, x2, x3, x1^2, x1 x2, x1 x3, x2^2, x2 x3, x3^2)``
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exact_algebra import determinant, primitive

SURFACE_KINDS = ("circle", "parabola2d", "sphere3d")

N_MONOMIALS = {2: 6, 3: 10}
# index of the squared variable and of the constant-free block, per dimension
QUADRATIC_SLICE = {2: slice(3, 6), 3: slice(4, 10)}


class DimensionMismatch(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


def monomials(p: Sequence) -> tuple:
    """Monomials of degree <= 2 at ``p`` in the fixed order (exact for exact input)."""
    if len(p) == 2:
        x, y = p
        return (1, x, y, x * x, y * y, x * y)
    if len(p) == 3:
        x1, x2, x3 = p
        return (1, x1, x2, x3, x1 * x1, x1 * x2, x1 * x3, x2 * x2, x2 * x3, x3 * x3)
    raise DimensionMismatch(f"only d = 2, 3 supported, got {len(p)}")


def square_index(d: int, axis: int) -> int:
    """Position of ``x_axis^2`` in the monomial order."""
    if d == 2:
        return (3, 4)[axis]
    return (4, 7, 9)[axis]


def _exact(value):
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return value
    return float(value)


@dataclass(frozen=True)
class Quadric:
    """Zero set of ``sum(coefficients * monomials(p))``."""

    coefficients: tuple

    def __post_init__(self):
        coeffs = tuple(_exact(c) for c in self.coefficients)
        if len(coeffs) not in (6, 10):
            raise DimensionMismatch(f"expected 6 or 10 coefficients, got {len(coeffs)}")
        if all(c == 0 for c in coeffs):
            raise ValueError("zero coefficient vector")
        if all(c == 0 for c in coeffs[QUADRATIC_SLICE[2 if len(coeffs) == 6 else 3]]):
            raise ValueError("quadratic part vanishes: degenerate quadric")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def dimension(self) -> int:
        return 2 if len(self.coefficients) == 6 else 3

    @property
    def quadratic_part(self) -> tuple:
        return self.coefficients[QUADRATIC_SLICE[self.dimension]]

    @property
    def is_exact(self) -> bool:
        return all(isinstance(c, (int, Fraction)) for c in self.coefficients)

    def scaled(self, factor) -> "Quadric":
        return Quadric(tuple(factor * c for c in self.coefficients))

    def normalized(self) -> "Quadric":
        """Deterministic representative: first nonzero coefficient positive,
        primitive integers when exact, unit max-norm otherwise."""
        if self.is_exact:
            return Quadric(tuple(primitive(self.coefficients)))
        c = np.asarray(self.coefficients, dtype=float)
        lead = c[np.flatnonzero(c)[0]]
        c = c / (np.sign(lead) * np.max(np.abs(c)))
        return Quadric(tuple(c.tolist()))

    def form_matrix(self) -> list[list]:
        """Symmetric matrix of the quadratic part (off-diagonals halved)."""
        c = self.coefficients
        half = Fraction(1, 2) if self.is_exact else 0.5
        if self.dimension == 2:
            return [[c[3], half * c[5]], [half * c[5], c[4]]]
        return [[c[4], half * c[5], half * c[6]],
                [half * c[5], c[7], half * c[8]],
                [half * c[6], half * c[8], c[9]]]

    def is_nondegenerate(self) -> bool:
        m = self.form_matrix()
        if self.is_exact:
            return determinant([[Fraction(v) for v in row] for row in m]) != 0
        return abs(np.linalg.det(np.asarray(m, dtype=float))) > 0

    @classmethod
    def ellipse(cls, semi_axes: Sequence, translation: Sequence | None = None) -> "Quadric":
        """``sum(((x_i - t_i) / a_i)^2) = 1``, scaled by ``prod(a_i^2)`` so that
        integer axes and translations give integer coefficients."""
        d = len(semi_axes)
        t = tuple(translation) if translation is not None else (0,) * d
        a2 = [a * a for a in semi_axes]
        scale = math.prod(a2)
        w = [scale / a2i if isinstance(scale, float) else Fraction(scale) / a2i for a2i in a2]
        w = [int(v) if isinstance(v, Fraction) and v.denominator == 1 else v for v in w]
        coeffs = [0] * N_MONOMIALS[d]
        const = -scale
        for i in range(d):
            coeffs[square_index(d, i)] = w[i]
            coeffs[1 + i] = -2 * w[i] * t[i]
            const += w[i] * t[i] * t[i]
        coeffs[0] = const
        return cls(tuple(coeffs))

    @classmethod
    def circle(cls, radius=1, center: Sequence | None = None) -> "Quadric":
        return cls.ellipse((radius, radius), center)

    @classmethod
    def sphere(cls, radius=1, center: Sequence | None = None) -> "Quadric":
        return cls.ellipse((radius, radius, radius), center)


def eval_quadric(Q: Quadric, p: Sequence):
    if len(p) != Q.dimension:
        raise DimensionMismatch(f"point of dimension {len(p)} for a d={Q.dimension} quadric")
    return sum((c * m for c, m in zip(Q.coefficients, monomials(p))), 0)


@dataclass(frozen=True)
class SurfaceSpec:
    """A surface of the extension problem: unit circle, truncated unit parabola
    ``{(t, t^2) : |t| <= 1}``, or unit sphere in R^3."""

    kind: str = "circle"

    def __post_init__(self):
        if self.kind not in SURFACE_KINDS:
            raise ValueError(f"unsupported surface {self.kind!r}; choose from {SURFACE_KINDS}")

    @property
    def dimension(self) -> int:
        return 3 if self.kind == "sphere3d" else 2

    @property
    def measure(self) -> float:
        """Total surface measure."""
        if self.kind == "circle":
            return 2 * math.pi
        if self.kind == "sphere3d":
            return 4 * math.pi
        return math.sqrt(5) + 0.5 * math.asinh(2)


@dataclass(frozen=True)
class NeighborhoodSpec:
    """Translated origin-centred ellipse/ellipsoid thickened by a box.

    The set is ``{e + b : e on the ellipse + translation, |b_i| <= thickness_i}``.
    Entries may be exact rationals; membership is then decided exactly.
    """

    semi_axes: tuple
    translation: tuple
    thickness: tuple

    def __post_init__(self):
        a = tuple(_exact(v) for v in self.semi_axes)
        t = tuple(_exact(v) for v in self.translation)
        h = tuple(_exact(v) for v in self.thickness)
        if not (len(a) == len(t) == len(h)) or len(a) not in (2, 3):
            raise DimensionMismatch("semi_axes, translation, thickness must share dimension 2 or 3")
        if any(not ai > 0 for ai in a):
            raise ValueError("semi-axes must be positive")
        if any(not hi > 0 for hi in h):
            raise ValueError("thickness must be positive")
        if any(hi >= ai for hi, ai in zip(h, a)):
            raise ValueError("neighborhood must be thin: thickness_i < semi_axis_i")
        object.__setattr__(self, "semi_axes", a)
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "thickness", h)

    @property
    def dimension(self) -> int:
        return len(self.semi_axes)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(v, (int, Fraction))
                   for v in self.semi_axes + self.translation + self.thickness)

    @property
    def quadric(self) -> Quadric:
        return Quadric.ellipse(self.semi_axes, self.translation)

    def translated(self, translation: Sequence) -> "NeighborhoodSpec":
        return NeighborhoodSpec(self.semi_axes, tuple(translation), self.thickness)

    @classmethod
    def isotropic(cls, radius, width, translation: Sequence | None = None, d: int = 2) -> "NeighborhoodSpec":
        """Box-thickened sphere of the given radius (the ``width``-neighbourhood up to constants)."""
        t = tuple(translation) if translation is not None else (0,) * d
        return cls((radius,) * d, t, (width,) * d)


def _sq_range(lo, hi):
    """min and max of z^2 over [lo, hi]."""
    if lo <= 0 <= hi:
        low = 0 * lo
    else:
        low = min(lo * lo, hi * hi)
    return low, max(lo * lo, hi * hi)


def in_neighborhood(spec: NeighborhoodSpec, p: Sequence) -> bool:
    """Whether ``p`` lies in the thickened, translated ellipse.

    Equivalent to the box of half-widths ``thickness`` around ``p`` meeting the
    ellipse. The defining form is a separable convex quadratic, so its extreme
    values over the box are computed per axis; the connected box meets the
    level set exactly when the minimum is <= 0 <= maximum.
    """
    if len(p) != spec.dimension:
        raise DimensionMismatch(f"point of dimension {len(p)} for a d={spec.dimension} neighborhood")
    fmin = fmax = -1
    for x, t, h, a in zip(p, spec.translation, spec.thickness, spec.semi_axes):
        lo, hi = _sq_range(x - t - h, x - t + h)
        a2 = a * a
        fmin = fmin + lo / a2
        fmax = fmax + hi / a2
    return fmin <= 0 <= fmax


def in_neighborhood_many(spec: NeighborhoodSpec, points: np.ndarray,
                         translations: np.ndarray | None = None) -> np.ndarray:
    """Vectorised float version of :func:`in_neighborhood`.

    With ``translations`` of shape ``(m, d)`` the result has shape ``(m, n)``
    and tests every point against every translated copy.
    """
    pts = np.asarray(points, dtype=float)
    a = np.asarray(spec.semi_axes, dtype=float)
    h = np.asarray(spec.thickness, dtype=float)
    if translations is None:
        z = pts - np.asarray(spec.translation, dtype=float)
    else:
        z = pts[None, :, :] - np.asarray(translations, dtype=float)[:, None, :]
    lo, hi = z - h, z + h
    lo2, hi2 = lo * lo, hi * hi
    sq_max = np.maximum(lo2, hi2)
    sq_min = np.where((lo <= 0) & (hi >= 0), 0.0, np.minimum(lo2, hi2))
    fmin = (sq_min / a**2).sum(axis=-1) - 1.0
    fmax = (sq_max / a**2).sum(axis=-1) - 1.0
    return (fmin <= 0) & (fmax >= 0)


def _nearest_on_ellipsoid(q: np.ndarray, a: np.ndarray, tol: float, max_iter: int) -> np.ndarray:
    """Closest point to ``q`` on the origin-centred ellipsoid with semi-axes ``a``.

    The minimiser has the form ``z_i = a_i^2 q_i / (a_i^2 + lam)`` where ``lam``
    is the largest root of ``g(lam) = sum((a_i q_i / (a_i^2 + lam))^2) - 1``.
    ``g`` is convex and decreasing there, so Newton from a point with g >= 0
    converges monotonically. Axis-degenerate inputs also try the evolute
    candidates ``lam = -a_i^2``.
    """
    a2 = a * a
    # components this small relative to the axis behave as zeros (evolute case)
    nz = np.abs(q) > 1e-14 * a
    candidates = []
    if nz.any():
        # start where one term alone equals one; g >= 0 there
        lam = np.max(a[nz] * np.abs(q[nz]) - a2[nz])
        lower = -np.min(a2[nz])
        lam = max(lam, lower + 1e-300)
        for _ in range(max_iter):
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(nz, a * q / (a2 + lam), 0.0)
            g = np.dot(ratio, ratio) - 1.0
            with np.errstate(divide="ignore", invalid="ignore"):
                dg = -2.0 * np.sum(np.where(nz, ratio * ratio / (a2 + lam), 0.0))
            step = g / dg
            lam_new = lam - step
            if abs(step) <= tol * max(1.0, abs(lam)):
                lam = lam_new
                break
            lam = lam_new
        else:
            raise ConvergenceError("nearest-point Newton iteration did not converge in 100 steps")
        with np.errstate(divide="ignore", invalid="ignore"):
            candidates.append(np.where(nz, a2 * q / (a2 + lam), 0.0))
    for i in np.flatnonzero(~nz):
        lam = -a2[i]
        z = np.zeros_like(q)
        others = np.arange(len(a)) != i
        denom = a2[others] + lam
        if np.any(denom == 0):
            continue
        z[others] = a2[others] * q[others] / denom
        rest = 1.0 - np.sum((z[others] / a[others]) ** 2)
        if rest < 0:
            continue
        for sign in (1.0, -1.0):
            zz = z.copy()
            zz[i] = sign * a[i] * math.sqrt(rest)
            candidates.append(zz)
    if not candidates:
        # q is the centre: nearest points are the ends of the shortest axis
        z = np.zeros_like(q)
        i = int(np.argmin(a))
        z[i] = a[i]
        candidates.append(z)
    best = min(candidates, key=lambda z: float(np.sum((z - q) ** 2)))
    # pull exactly onto the surface
    return best / math.sqrt(float(np.sum((best / a) ** 2)))


def nearest_surface_point(spec: NeighborhoodSpec, p: Sequence, tol: float = 1e-14,
                          max_iter: int = 100) -> tuple[np.ndarray, float]:
    """Closest point on the translated ellipse and its Euclidean distance to ``p``."""
    if len(p) != spec.dimension:
        raise DimensionMismatch(f"point of dimension {len(p)} for a d={spec.dimension} neighborhood")
    t = np.asarray(spec.translation, dtype=float)
    a = np.asarray(spec.semi_axes, dtype=float)
    q = np.asarray(p, dtype=float) - t
    z = _nearest_on_ellipsoid(q, a, tol, max_iter)
    return z + t, float(np.linalg.norm(z - q))
