"""Fourier coefficients of the circle and parabola in F_p^2.

``V_hat(m) = p^-2 sum_{x in V} chi(-x.m)`` with ``chi(t) = exp(2 pi i t / p)``.
Single coefficients are summed directly; whole tables come from an FFT of
the indicator function, and the two are cross-checked in the tests.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

DEFAULT_P_CAP = 2003
VARIETIES = ("circle", "parabola")


class FieldCapExceeded(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def primes_up_to(n: int) -> list[int]:
    return [p for p in range(2, n + 1) if is_prime(p)]


@dataclass(frozen=True)
class PrimeField:
    p: int

    def __post_init__(self):
        if not isinstance(self.p, (int, np.integer)) or not is_prime(int(self.p)) or self.p == 2:
            raise ValueError(f"{self.p} is not an odd prime")
        object.__setattr__(self, "p", int(self.p))

    @cached_property
    def characters(self) -> np.ndarray:
        """``chi(t)`` for ``t = 0..p-1``."""
        return np.exp(2j * np.pi * np.arange(self.p) / self.p)

    def chi(self, t) -> np.ndarray:
        return self.characters[np.asarray(t) % self.p]


@dataclass(frozen=True)
class FieldVariety:
    kind: str
    points: tuple

    @classmethod
    def build(cls, F: PrimeField, kind: str) -> "FieldVariety":
        p = F.p
        if kind == "parabola":
            pts = tuple((x, x * x % p) for x in range(p))
        elif kind == "circle":
            sq = {}
            for y in range(p):
                sq.setdefault(y * y % p, []).append(y)
            pts = tuple((x, y) for x in range(p) for y in sq.get((1 - x * x) % p, ()))
        else:
            raise ValueError(f"variety must be one of {VARIETIES}")
        return cls(kind, pts)

    def satisfies(self, F: PrimeField) -> bool:
        p = F.p
        if self.kind == "parabola":
            return all((y - x * x) % p == 0 for x, y in self.points)
        return all((x * x + y * y - 1) % p == 0 for x, y in self.points)

    def indicator(self, p: int) -> np.ndarray:
        f = np.zeros((p, p))
        pts = np.asarray(self.points)
        f[pts[:, 0], pts[:, 1]] = 1.0
        return f


def fourier_coeff(F: PrimeField, V: FieldVariety, m) -> complex:
    """Direct sum ``p^-2 sum_{x in V} chi(-x.m)``."""
    m1, m2 = int(m[0]), int(m[1])
    if not (0 <= m1 < F.p and 0 <= m2 < F.p):
        raise ValueError("m components must lie in [0, p)")
    pts = np.asarray(V.points, dtype=np.int64)
    phase = -(pts[:, 0] * m1 + pts[:, 1] * m2)
    return complex(F.chi(phase).sum() / F.p**2)


def fourier_table(F: PrimeField, V: FieldVariety) -> np.ndarray:
    """All ``V_hat(m)``, indexed ``[m1, m2]``; ``fft2`` computes exactly ``sum f(x) e^{-2 pi i x.m/p}``."""
    return np.fft.fft2(V.indicator(F.p)) / F.p**2


def _check_cap(F: PrimeField, cap: int):
    if F.p > cap:
        raise FieldCapExceeded(f"p = {F.p} exceeds cap {cap}")


def parabola_checks(F: PrimeField, table: np.ndarray | None = None) -> dict:
    """Largest deviations from the three closed-form parabola values."""
    p = F.p
    if table is None:
        table = fourier_table(F, FieldVariety.build(F, "parabola"))
    origin = abs(table[0, 0] - 1.0 / p)
    axis = float(np.abs(table[1:, 0]).max()) if p > 1 else 0.0
    modulus = float(np.abs(np.abs(table[:, 1:]) - p**-1.5).max())
    return {"origin_error": float(origin), "axis_max": axis, "modulus_error": modulus}


def parseval_error(F: PrimeField, V: FieldVariety, table: np.ndarray | None = None) -> float:
    """Relative error of ``sum |V_hat|^2 = p^-2 |V|``."""
    if table is None:
        table = fourier_table(F, V)
    lhs = float((np.abs(table) ** 2).sum())
    rhs = len(V.points) / F.p**2
    return abs(lhs - rhs) / rhs


def circle_bound_check(F: PrimeField, cap: int = DEFAULT_P_CAP, bins: int = 100) -> dict:
    """Scan every ``m != 0`` for ``|S_hat(m)| <= 2 p^{-3/2}``."""
    _check_cap(F, cap)
    V = FieldVariety.build(F, "circle")
    table = fourier_table(F, V)
    normalized = np.abs(table) * F.p**1.5
    normalized[0, 0] = 0.0
    mask = np.ones_like(normalized, dtype=bool)
    mask[0, 0] = False
    vals = normalized[mask]
    # tolerance for float summation only; the bound itself is 2
    bad = np.argwhere((normalized > 2.0 + 1e-9) & mask)
    hist, edges = np.histogram(np.clip(vals, 0.0, 2.0), bins=bins, range=(0.0, 2.0))
    return {"p": F.p, "n_points": len(V.points), "max_normalized": float(vals.max()),
            "violations": [tuple(int(c) for c in m) for m in bad],
            "histogram": hist.tolist(), "bin_edges": edges.tolist(),
            "parseval_error": parseval_error(F, V, table)}


def small_coefficient_census(F: PrimeField, exponent: float = 1.51, cap: int = DEFAULT_P_CAP) -> dict:
    """Fraction of ``m != 0`` with ``|S_hat(m)| < p^-exponent``, plus those ``m``."""
    _check_cap(F, cap)
    table = fourier_table(F, FieldVariety.build(F, "circle"))
    mags = np.abs(table)
    mask = np.ones_like(mags, dtype=bool)
    mask[0, 0] = False
    hits = (mags < F.p ** (-float(exponent))) & mask
    m_set = [tuple(int(c) for c in m) for m in np.argwhere(hits)]
    return {"p": F.p, "exponent": float(exponent), "threshold": float(F.p ** (-float(exponent))),
            "fraction": len(m_set) / (F.p**2 - 1), "count": len(m_set), "m_set": m_set}


def ffield_report(p: int, variety: str, census_exponent: float | None = None,
                  cap: int = DEFAULT_P_CAP) -> dict:
    """Everything the ``ffield`` subcommand prints."""
    F = PrimeField(p)
    _check_cap(F, cap)
    V = FieldVariety.build(F, variety)
    table = fourier_table(F, V)
    checks = {"points": len(V.points), "on_variety": V.satisfies(F),
              "parseval_error": parseval_error(F, V, table),
              "conjugate_symmetry_error": float(np.abs(
                  table[(-np.arange(p)) % p][:, (-np.arange(p)) % p] - table.conj()).max())}
    histogram: list = []
    census: dict = {}
    if variety == "parabola":
        checks.update(parabola_checks(F, table))
    else:
        bound = circle_bound_check(F, cap)
        checks.update({"max_normalized": bound["max_normalized"], "violations": bound["violations"]})
        histogram = bound["histogram"]
        if census_exponent is not None:
            census = small_coefficient_census(F, census_exponent, cap)
    return {"p": p, "variety": variety, "checks": checks, "histogram": histogram, "census": census}
