"""Lattice points in thin conic neighbourhoods, and integer points on quadrics."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .conics import NeighborhoodSpec, Quadric, eval_quadric, in_neighborhood, in_neighborhood_many
from .lattice import (DEFAULT_ENUMERATION_CAP, Box, DiagonalLattice, EnumerationCapExceeded,
                      index_range)


class GridTooCoarse(ValueError):
    pass


class DegenerateQuadric(ValueError):
    pass


def _to_json_number(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else x.numerator
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    return x


@dataclass
class CountResult:
    count: int
    witness_points: list
    translation: tuple
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.count != len(self.witness_points):
            raise ValueError("count must equal the number of witnesses")

    def to_json(self) -> dict:
        return {
            "count": self.count,
            "translation": [_to_json_number(t) for t in self.translation],
            "witnesses": [[_to_json_number(x) for x in p] for p in self.witness_points],
            **{k: _to_json_number(v) for k, v in self.details.items()},
        }


def _sq_bounds(lo, hi):
    if lo <= 0 <= hi:
        return 0 * lo, max(lo * lo, hi * hi)
    return min(lo * lo, hi * hi), max(lo * lo, hi * hi)


def _last_axis_windows(spec: NeighborhoodSpec, prefix: Sequence) -> list[tuple[float, float]]:
    """Candidate windows (shifted by the translation) for the last coordinate.

    ``prefix`` holds the first d-1 coordinates. Returns float intervals of
    ``z_d`` (coordinate minus translation) that may contain admissible points;
    they are padded and every candidate is re-tested with the exact predicate.
    """
    a, t, h = spec.semi_axes, spec.translation, spec.thickness
    s_lo = s_hi = 0.0
    for x, ti, hi_, ai in zip(prefix, t, h, a):
        lo2, hi2 = _sq_bounds(float(x - ti - hi_), float(x - ti + hi_))
        s_lo += lo2 / float(ai) ** 2
        s_hi += hi2 / float(ai) ** 2
    if s_lo > 1.0 + 1e-9:
        return []
    ad, hd = float(a[-1]), float(h[-1])
    u_hi = ad * math.sqrt(max(0.0, 1.0 - s_lo))
    u_lo = ad * math.sqrt(max(0.0, 1.0 - s_hi))
    pad = 1e-9 * ad + 1e-12
    lo, hi = u_lo - hd - pad, u_hi + hd + pad
    if lo <= 0:
        return [(-hi, hi)]
    return [(-hi, -lo), (lo, hi)]


def count_in_neighborhood(lattice: DiagonalLattice, spec: NeighborhoodSpec,
                          cap: float = DEFAULT_ENUMERATION_CAP) -> CountResult:
    """Lattice points inside the thickened translated ellipse.

    Iterates the lattice over the projection of the neighbourhood onto the
    first d-1 axes and solves for the admissible windows of the last
    coordinate; candidates are confirmed by :func:`in_neighborhood`. With
    exact scales and an exact spec the answer is exact.
    """
    d = spec.dimension
    if lattice.dimension != d:
        raise ValueError("lattice and neighborhood dimensions differ")
    exact = lattice.is_exact and spec.is_exact
    s, a, t, h = lattice.scales, spec.semi_axes, spec.translation, spec.thickness
    ranges = [index_range(s[i], t[i] - a[i] - h[i], t[i] + a[i] + h[i]) for i in range(d - 1)]
    columns = math.prod(len(r) for r in ranges)
    if columns > cap:
        raise EnumerationCapExceeded(columns, cap)
    witnesses = []
    for idx in itertools.product(*ranges):
        prefix = tuple(m * si for m, si in zip(idx, s)) if exact else tuple(m * float(si) for m, si in zip(idx, s))
        for lo, hi in _last_axis_windows(spec, prefix):
            # widen by one lattice step so float error in the window never drops a point
            sd = float(s[-1])
            m_lo = math.floor((lo + float(t[-1])) / sd) - 1
            m_hi = math.ceil((hi + float(t[-1])) / sd) + 1
            for m in range(m_lo, m_hi + 1):
                last = m * s[-1] if exact else m * sd
                p = prefix + (last,)
                if in_neighborhood(spec, p):
                    witnesses.append(p)
    witnesses = sorted(set(witnesses))
    return CountResult(len(witnesses), witnesses, tuple(t))


def count_brute_force(lattice: DiagonalLattice, spec: NeighborhoodSpec,
                      cap: float = 1e6) -> CountResult:
    """Reference count over the full bounding box (oracle for tests)."""
    from .lattice import enumerate_in_box_exact

    box = Box(spec.translation, tuple(ai + hi for ai, hi in zip(spec.semi_axes, spec.thickness)))
    if lattice.is_exact and spec.is_exact:
        pts = enumerate_in_box_exact(lattice, box, cap)
    else:
        from .lattice import enumerate_in_box
        pts = [tuple(p) for p in enumerate_in_box(lattice, box, cap).tolist()]
    hits = sorted(p for p in pts if in_neighborhood(spec, p))
    return CountResult(len(hits), hits, tuple(spec.translation))


def translation_grid(lattice: DiagonalLattice, grid_steps: int) -> np.ndarray:
    """``grid_steps^d`` translations in lexicographic order over ``prod [0, s_i)``."""
    axes = [np.arange(grid_steps) * (float(si) / grid_steps) for si in lattice.scales]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def required_grid_steps(lattice: DiagonalLattice, spec: NeighborhoodSpec) -> int:
    """Smallest grid whose pitch is at most half the thinnest thickness."""
    hmin = min(float(x) for x in spec.thickness)
    return max(1, math.ceil(max(float(si) for si in lattice.scales) / (hmin / 2) - 1e-9))


def max_count_over_translations(lattice: DiagonalLattice, base_spec: NeighborhoodSpec,
                                grid_steps: int | None = None, chunk: int = 4096,
                                n_jobs: int = 1) -> CountResult:
    """Maximise the neighbourhood count over a grid of translations.

    The grid covers one fundamental domain of ``lattice`` (counts are
    periodic under lattice translations) and is offset by the spec's own
    translation. The pitch must not exceed half the thinnest thickness.
    The result is a lower bound on the supremum over all real translations;
    ties go to the lexicographically smallest grid translation.
    """
    d = base_spec.dimension
    if grid_steps is None:
        grid_steps = required_grid_steps(lattice, base_spec)
    if grid_steps < 1:
        raise ValueError("grid_steps must be >= 1")
    pitch = max(float(si) for si in lattice.scales) / grid_steps
    if pitch > min(float(x) for x in base_spec.thickness) / 2 * (1 + 1e-12):
        raise GridTooCoarse(f"grid pitch {pitch:.3g} exceeds half the thickness; "
                            f"need grid_steps >= {required_grid_steps(lattice, base_spec)}")
    offsets = translation_grid(lattice, grid_steps)
    translations = offsets + np.asarray([float(x) for x in base_spec.translation])
    a = np.asarray([float(x) for x in base_spec.semi_axes])
    h = np.asarray([float(x) for x in base_spec.thickness])
    lo = translations.min(axis=0) - a - h
    hi = translations.max(axis=0) + a + h
    center = tuple(((lo + hi) / 2).tolist())
    box = Box(center, tuple(((hi - lo) / 2).tolist()))
    from .lattice import enumerate_in_box
    candidates = enumerate_in_box(lattice, box, cap=DEFAULT_ENUMERATION_CAP)

    def best_in(rows: slice) -> tuple[int, int]:
        hits = in_neighborhood_many(base_spec, candidates, translations[rows]).sum(axis=1)
        k = int(np.argmax(hits))
        return int(hits[k]), rows.start + k

    slices = [slice(i, min(i + chunk, len(translations))) for i in range(0, len(translations), chunk)]
    if n_jobs == 1:
        results = [best_in(sl) for sl in slices]
    else:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(best_in, slices))
    best_count, best_idx = max(results, key=lambda item: (item[0], -item[1]))
    t_best = tuple(translations[best_idx].tolist())
    result = count_in_neighborhood(lattice, base_spec.translated(t_best))
    result.details.update({"grid_steps": grid_steps, "grid_pitch": pitch, "grid_count": best_count})
    return result


def _integer_box_range(center, half) -> range:
    return range(math.ceil(center - half), math.floor(center + half) + 1)


def _integer_coefficients(Q: Quadric) -> list[int]:
    if not Q.is_exact:
        coeffs = []
        for c in Q.coefficients:
            if float(c) != int(c):
                raise ValueError("count_on_quadric needs integer coefficients")
            coeffs.append(int(c))
        return coeffs
    den = 1
    for c in Q.coefficients:
        den = math.lcm(den, Fraction(c).denominator)
    return [int(Fraction(c) * den) for c in Q.coefficients]


def _integer_roots(A: int, B: int, C: int) -> list[int] | None:
    """Integer solutions of ``A y^2 + B y + C = 0``; ``None`` means every y."""
    if A == 0:
        if B == 0:
            return None if C == 0 else []
        return [-C // B] if C % B == 0 else []
    disc = B * B - 4 * A * C
    if disc < 0:
        return []
    root = math.isqrt(disc)
    if root * root != disc:
        return []
    out = []
    for num in {-B + root, -B - root}:
        if num % (2 * A) == 0:
            out.append(num // (2 * A))
    return sorted(out)


def count_on_quadric(Q: Quadric, box: Box) -> CountResult:
    """Integer points on ``{Q = 0}`` inside the box, in integer arithmetic only."""
    if not Q.is_nondegenerate():
        raise DegenerateQuadric("quadratic part of Q is degenerate")
    coeffs = _integer_coefficients(Q)
    Qi = Quadric(tuple(coeffs))
    d = Q.dimension
    if box.dimension != d:
        raise ValueError("box and quadric dimensions differ")
    ranges = [_integer_box_range(c, h) for c, h in zip(box.center, box.half_widths)]
    last = ranges[-1]
    points = []
    for prefix in itertools.product(*ranges[:-1]):
        C = eval_quadric(Qi, prefix + (0,))
        f_plus = eval_quadric(Qi, prefix + (1,))
        f_minus = eval_quadric(Qi, prefix + (-1,))
        A = (f_plus + f_minus) // 2 - C
        B = (f_plus - f_minus) // 2
        roots = _integer_roots(A, B, C)
        if roots is None:
            points.extend(prefix + (y,) for y in last)
            continue
        points.extend(prefix + (y,) for y in roots if y in last)
    return CountResult(len(points), points, tuple(0 for _ in range(d)))


def ellipse_solutions(r: int, axis_exponent: int, grid: int) -> list[tuple[int, int]]:
    """Integer ``(X, Y)`` with ``(X / (g r))^2 + (Y / (g r^e))^2 = 1``, ``g = grid``."""
    a1, a2 = grid * r, grid * r**axis_exponent
    Q = Quadric.ellipse((a1, a2))
    return [tuple(p) for p in count_on_quadric(Q, Box((0, 0), (a1, a2))).witness_points]


def heathbrown_scan(r_values: Sequence[int], axis_ratio_exponent: int = 2, theta: float = 0.0,
                    grid: int = 12, beta: float = Fraction(1, 28)) -> dict[int, CountResult]:
    """Per ``r``: the most integer points on any grid-translated ellipse with
    semi-axes ``(r, r^e)``.

    Translations range over ``{(i/g, j/g) : 0 <= i, j < g}``. With ``theta = 0``
    points must lie exactly on the curve: ``(x - i/g, y - j/g)`` on the ellipse
    is the same as ``(g x - i, g y - j)`` on the ellipse scaled by ``g``, so one
    exact solve at scale ``g`` is bucketed by residues mod ``g``. With
    ``theta > 0`` each translated neighbourhood of thickness
    ``theta * (r^{-(1-b)/b}, r^{-(1-2b)/b})`` is counted directly.
    """
    r_values = list(r_values)
    if r_values != sorted(r_values):
        raise ValueError("r_values must be ascending")
    if int(axis_ratio_exponent) != axis_ratio_exponent:
        raise ValueError("exact scan needs an integer axis ratio exponent")
    e = int(axis_ratio_exponent)
    table = {}
    for r in r_values:
        if theta == 0:
            buckets: dict[tuple[int, int], list] = {}
            for X, Y in ellipse_solutions(r, e, grid):
                key = ((-X) % grid, (-Y) % grid)
                # (X, Y) = (g x - i, g y - j) with i = key[0], j = key[1]
                buckets.setdefault(key, []).append((Fraction(X + key[0], grid), Fraction(Y + key[1], grid)))
            if buckets:
                key = max(sorted(buckets), key=lambda k: len(buckets[k]))
                pts = sorted((int(x), int(y)) for x, y in buckets[key])
                table[r] = CountResult(len(pts), pts, (Fraction(key[0], grid), Fraction(key[1], grid)))
            else:
                table[r] = CountResult(0, [], (0, 0))
        else:
            b = Fraction(beta)
            h = thin_thickness(r, b, theta)
            best = None
            for i in range(grid):
                for j in range(grid):
                    spec = NeighborhoodSpec((r, r**e), (Fraction(i, grid), Fraction(j, grid)), h)
                    res = count_in_neighborhood(DiagonalLattice.integer(2), spec)
                    if best is None or res.count > best.count:
                        best = res
            table[r] = best
    return table


def thin_thickness(r: int, beta, theta, d: int = 2) -> tuple:
    """Box half-widths ``theta r^{-(1-b)/b}`` (fine axes) and ``theta r^{-(1-2b)/b}`` (last axis).

    Exact when ``beta`` and ``theta`` are rationals making both exponents integral.
    """
    b = Fraction(beta)
    th = Fraction(theta) if not isinstance(theta, float) else Fraction(theta).limit_denominator(10**30)
    e1, e2 = (1 - b) / b, (1 - 2 * b) / b
    if e1.denominator == 1 and e2.denominator == 1:
        fine = th / Fraction(r) ** int(e1)
        coarse = th / Fraction(r) ** int(e2)
    else:
        fine = float(th) * float(r) ** (-float(e1))
        coarse = float(th) * float(r) ** (-float(e2))
    return (fine,) * (d - 1) + (coarse,)
