"""Discrete convolution with a curve, rich points, and lattice-point contrasts."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .conics import Quadric
from .counting import count_on_quadric
from .lattice import Box

DEFAULT_OPERATION_CAP = 10**9


class OperationCapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class DiscreteCurve:
    points: np.ndarray
    descriptor: tuple

    @classmethod
    def parabola(cls, R: float) -> "DiscreteCurve":
        """``{(n, n^2) : |n| <= R}``."""
        n = np.arange(-int(np.floor(R)), int(np.floor(R)) + 1, dtype=np.int64)
        return cls(np.column_stack([n, n * n]), ("parabola_trunc", R))

    @classmethod
    def circle(cls, n: int) -> "DiscreteCurve":
        """Integer points on ``x^2 + y^2 = n``."""
        r = int(math.isqrt(n))
        xs = np.arange(-r, r + 1, dtype=np.int64)
        rest = n - xs * xs
        ys = np.round(np.sqrt(rest)).astype(np.int64)
        ok = ys * ys == rest
        pts = {(int(x), int(s * y)) for x, y in zip(xs[ok], ys[ok]) for s in (1, -1)}
        return cls(np.array(sorted(pts), dtype=np.int64).reshape(-1, 2), ("circle_radius", n))

    @classmethod
    def from_points(cls, points: Iterable[Sequence[int]], name: str = "custom") -> "DiscreteCurve":
        arr = np.unique(np.asarray(list(points), dtype=np.int64).reshape(-1, 2), axis=0)
        return cls(arr, (name, len(arr)))

    def __len__(self) -> int:
        return len(self.points)


def grid_set(half_x: int, half_y: int) -> np.ndarray:
    """Integer points of ``[-half_x, half_x] x [-half_y, half_y]``."""
    xs, ys = np.meshgrid(np.arange(-half_x, half_x + 1), np.arange(-half_y, half_y + 1), indexing="ij")
    return np.column_stack([xs.ravel(), ys.ravel()]).astype(np.int64)


@dataclass
class ConvolutionMap:
    """Sparse ``x -> count``; keys sorted lexicographically."""
    keys: np.ndarray
    counts: np.ndarray

    def __len__(self) -> int:
        return len(self.counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_dict(self) -> dict:
        return {(int(a), int(b)): int(c) for (a, b), c in zip(self.keys, self.counts)}

    def get(self, x) -> int:
        i = np.searchsorted(self.keys[:, 0], x[0], side="left")
        j = np.searchsorted(self.keys[:, 0], x[0], side="right")
        hit = np.nonzero(self.keys[i:j, 1] == x[1])[0]
        return int(self.counts[i + hit[0]]) if len(hit) else 0


def _encode(pts: np.ndarray, offset: np.ndarray, span: int) -> np.ndarray:
    return (pts[:, 0] - offset[0]) * span + (pts[:, 1] - offset[1])


def convolve_indicator(curve: DiscreteCurve, E, cap: int = DEFAULT_OPERATION_CAP,
                       chunk: int = 2_000_000) -> ConvolutionMap:
    """``A_Gamma 1_E(x) = #{y in E : x - y in Gamma}`` on its support."""
    E = np.unique(np.asarray(E, dtype=np.int64).reshape(-1, 2), axis=0)
    G = curve.points
    if len(G) * len(E) > cap:
        raise OperationCapExceeded(f"|Gamma| * |E| = {len(G) * len(E)} exceeds cap {cap}")
    if len(G) == 0 or len(E) == 0:
        return ConvolutionMap(np.zeros((0, 2), dtype=np.int64), np.zeros(0, dtype=np.int64))
    lo = E.min(axis=0) + G.min(axis=0)
    hi = E.max(axis=0) + G.max(axis=0)
    span = int(hi[1] - lo[1] + 1)
    codes_E = _encode(E, lo - G.min(axis=0), span)
    codes_G = _encode(G, G.min(axis=0), span)
    per = max(1, chunk // len(E))
    acc_codes, acc_counts = [], []
    for start in range(0, len(G), per):
        sums = (codes_G[start:start + per, None] + codes_E[None, :]).ravel()
        u, c = np.unique(sums, return_counts=True)
        acc_codes.append(u)
        acc_counts.append(c)
    codes = np.concatenate(acc_codes)
    counts = np.concatenate(acc_counts)
    if len(acc_codes) > 1:
        codes, inv = np.unique(codes, return_inverse=True)
        counts = np.bincount(inv, weights=counts).astype(np.int64)
    keys = np.column_stack([codes // span + lo[0], codes % span + lo[1]])
    return ConvolutionMap(keys, counts.astype(np.int64))


def rich_points(conv: ConvolutionMap, k: int) -> int:
    """Number of ``x`` with ``A_Gamma 1_E(x) > k`` (strict)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return int((conv.counts > k).sum())


def sharpness_instance(R: int, k: int | None = None) -> dict:
    """``E = [-R, R] x [-R^2, R^2]``, ``Gamma = Gamma_R``; compare to ``|E|^2 k^-3``."""
    k = R // 2 if k is None else k
    curve = DiscreteCurve.parabola(R)
    E = grid_set(R, R * R)
    conv = convolve_indicator(curve, E)
    rich = rich_points(conv, k)
    bound = len(E) ** 2 / k**3
    return {"R": R, "k": k, "E_size": len(E), "curve_size": len(curve), "rich_count": rich,
            "bound_value": bound, "ratio": rich / bound, "mass": conv.total,
            "mass_ok": conv.total == len(curve) * len(E), "max_value": int(conv.counts.max())}


def valtr_incidences(N: int) -> int:
    """Incidences between ``[0,N) x [0,N^2)`` and the parabolas ``y = (x-a)^2 + b``, ``0 <= a < N``, ``0 <= b < N^2``.

    Computed through the convolution: a point ``q`` lies on the parabola with
    vertex ``c`` iff ``q - c`` is in ``Gamma``.
    """
    curve = DiscreteCurve.parabola(N)
    vertices = np.column_stack([g.ravel() for g in np.meshgrid(np.arange(N), np.arange(N * N),
                                                               indexing="ij")])
    conv = convolve_indicator(curve, vertices)
    inside = ((conv.keys[:, 0] >= 0) & (conv.keys[:, 0] < N)
              & (conv.keys[:, 1] >= 0) & (conv.keys[:, 1] < N * N))
    return int(conv.counts[inside].sum())


def valtr_incidences_brute(N: int) -> int:
    total = 0
    for x in range(N):
        for y in range(N * N):
            for a in range(N):
                b = y - (x - a) ** 2
                total += 0 <= b < N * N
    return total


def circle_contrast(n_values: Sequence[int], box: Box | None = None) -> dict:
    """``n -> #{integer (x, y) in box : x^2 + y^2 = n}`` via the exact quadric counter."""
    if any(int(n) <= 0 for n in n_values):
        raise ValueError("n values must be positive")
    if box is None:
        r = int(math.isqrt(max(int(n) for n in n_values))) + 1
        box = Box((0, 0), (r, r))
    return {int(n): count_on_quadric(Quadric((-int(n), 0, 0, 1, 1, 0)), box).count
            for n in n_values}


def circle_counts_fast(n_max: int) -> np.ndarray:
    """``r_2(n)`` for ``0 <= n <= n_max`` by direct histogram (independent of ``circle_contrast``)."""
    r = int(math.isqrt(n_max))
    xs = np.arange(-r, r + 1)
    s = (xs[:, None] ** 2 + xs[None, :] ** 2).ravel()
    return np.bincount(s[s <= n_max], minlength=n_max + 1)


def incidence_report(R: int, grid: tuple[int, int] | None = None, k: int | None = None) -> dict:
    """``incidence`` subcommand payload; ``grid=(nx, ny)`` gives ``E = [0,nx) x [0,ny)``."""
    curve = DiscreteCurve.parabola(R)
    if grid is None:
        E = grid_set(R, R * R)
    else:
        nx, ny = grid
        E = np.column_stack([g.ravel() for g in np.meshgrid(np.arange(nx), np.arange(ny),
                                                            indexing="ij")])
    k = max(1, R // 2) if k is None else k
    conv = convolve_indicator(curve, E)
    rich = rich_points(conv, k)
    bound = len(E) ** 2 / k**3
    return {"R": R, "k": k, "E_size": int(len(E)), "rich_count": rich, "bound_value": bound,
            "ratio": rich / bound, "mass_ok": conv.total == len(curve) * len(E)}
