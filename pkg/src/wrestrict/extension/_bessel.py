"""Bessel function J0: power series near the origin, Hankel asymptotics beyond."""
from __future__ import annotations

import math

import numpy as np

SERIES_CUTOFF = 12.0
_SERIES_TERMS = 60
_ASYMPTOTIC_TERMS = 40


def _series(z: np.ndarray) -> np.ndarray:
    # sum_k (-z^2/4)^k / (k!)^2, terms summed until they underflow the result
    w = -0.25 * z * z
    term = np.ones_like(z)
    total = np.ones_like(z)
    for k in range(1, _SERIES_TERMS):
        term = term * w / (k * k)
        total = total + term
    return total


def _hankel_coefficients(n: int) -> list[float]:
    # a_k(0) = prod_{j<=k} (-(2j-1)^2) / (k! 8^k)
    coeffs = [1.0]
    for k in range(1, n):
        coeffs.append(coeffs[-1] * (-(2 * k - 1) ** 2) / (k * 8.0))
    return coeffs


_A = _hankel_coefficients(_ASYMPTOTIC_TERMS)


def _asymptotic(z: np.ndarray) -> np.ndarray:
    """Hankel expansion, each series truncated at its smallest term."""
    inv = 1.0 / z
    P = np.zeros_like(z)
    Q = np.zeros_like(z)
    prev = np.full_like(z, np.inf)
    active = np.ones(z.shape, dtype=bool)
    zpow = np.ones_like(z)
    for k in range(_ASYMPTOTIC_TERMS):
        term = _A[k] * zpow
        mag = np.abs(term)
        active &= mag < prev
        # a_k z^-k enters P (even k) or Q (odd k) with alternating sign
        sign = -1.0 if (k // 2) % 2 else 1.0
        contrib = np.where(active, sign * term, 0.0)
        if k % 2 == 0:
            P += contrib
        else:
            Q += contrib
        prev = np.where(active, mag, prev)
        zpow = zpow * inv
    phase = z - 0.25 * math.pi
    return np.sqrt(2.0 / (math.pi * z)) * (P * np.cos(phase) - Q * np.sin(phase))


def j0(x) -> np.ndarray | float:
    """Bessel function of the first kind of order zero (absolute error ~1e-11)."""
    z = np.abs(np.asarray(x, dtype=float))
    out = np.empty_like(z)
    small = z <= SERIES_CUTOFF
    out[small] = _series(z[small])
    out[~small] = _asymptotic(z[~small])
    if out.ndim == 0:
        return float(out)
    return out
