"""Inverse Fourier transforms of surface measures, ``K(x) = int e^{2 pi i x.xi} dsigma(xi)``."""
from __future__ import annotations

import math

import numpy as np

from ..conics import SurfaceSpec
from ._bessel import j0

PANEL_ORDER = 16
_GL_T, _GL_W = np.polynomial.legendre.leggauss(PANEL_ORDER)


class QuadratureBudgetExceeded(RuntimeError):
    pass


def composite_gauss_legendre(n_panels: int, order: int = PANEL_ORDER) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1] from ``n_panels`` equal Gauss-Legendre panels."""
    if order == PANEL_ORDER:
        t0, w0 = _GL_T, _GL_W
    else:
        t0, w0 = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(-1.0, 1.0, n_panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    t = (mid[:, None] + half[:, None] * t0[None, :]).ravel()
    w = (half[:, None] * w0[None, :]).ravel()
    return t, w


def parabola_arclength() -> float:
    """``int_{-1}^{1} sqrt(1 + 4 t^2) dt`` in closed form."""
    def F(t):
        return 0.5 * t * math.sqrt(1 + 4 * t * t) + 0.25 * math.asinh(2 * t)

    return F(1.0) - F(-1.0)


class SurfaceKernel:
    """Evaluator for the kernel of ``E E*`` on one of the supported surfaces.

    Parameters
    ----------
    surface : {"circle", "parabola2d", "sphere3d"} or SurfaceSpec
    nodes_per_oscillation : float
        Parabola only: quadrature density relative to the phase
        ``2 pi (x_1 t + x_2 t^2)`` on ``|t| <= 1``.
    max_nodes : int
        Parabola only: refuse calls needing more quadrature nodes than this.

    Notes
    -----
    circle: ``2 pi J0(2 pi |x|)``; sphere: ``2 sin(2 pi |x|) / |x|`` (``4 pi`` at 0);
    parabola: ``int_{-1}^{1} e^{2 pi i (x_1 t + x_2 t^2)} sqrt(1 + 4 t^2) dt``,
    which is complex. Its real part is even in ``x``; the imaginary part is odd
    under ``x -> -x`` so the Gram matrix is Hermitian rather than real.
    """

    def __init__(self, surface="circle", nodes_per_oscillation: float = 10.0,
                 max_nodes: int = 4_000_000):
        self.surface = surface if isinstance(surface, SurfaceSpec) else SurfaceSpec(surface)
        self.nodes_per_oscillation = nodes_per_oscillation
        self.max_nodes = max_nodes

    @property
    def kind(self) -> str:
        return self.surface.kind

    @property
    def dimension(self) -> int:
        return self.surface.dimension

    @property
    def is_real(self) -> bool:
        return self.kind != "parabola2d"

    def __repr__(self) -> str:
        return f"SurfaceKernel({self.kind!r})"

    def _panels_for(self, max_abs_x1: float, max_abs_x2: float) -> int:
        # total phase variation / 2 pi over [-1, 1] is at most 2(|x1| + |x2|)
        oscillations = 2.0 * (max_abs_x1 + max_abs_x2) + 1.0
        nodes = self.nodes_per_oscillation * oscillations
        n_panels = max(2, math.ceil(nodes / PANEL_ORDER))
        if n_panels * PANEL_ORDER > self.max_nodes:
            raise QuadratureBudgetExceeded(
                f"{n_panels * PANEL_ORDER} quadrature nodes needed (budget {self.max_nodes})")
        return n_panels

    def _parabola(self, x: np.ndarray, chunk: int = 512) -> np.ndarray:
        out = np.empty(len(x), dtype=complex)
        order = np.argsort(np.abs(x).sum(axis=1))
        for start in range(0, len(x), chunk):
            idx = order[start:start + chunk]
            xs = x[idx]
            t, w = composite_gauss_legendre(self._panels_for(*np.abs(xs).max(axis=0)))
            w = w * np.sqrt(1.0 + 4.0 * t * t)
            phase = 2.0 * np.pi * (np.outer(xs[:, 0], t) + np.outer(xs[:, 1], t * t))
            out[idx] = np.exp(1j * phase) @ w
        return out

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        if x.shape[1] != self.dimension:
            raise ValueError(f"{self.kind} kernel expects {self.dimension}-vectors")
        if not np.all(np.isfinite(x)):
            raise ValueError("kernel argument must be finite")
        if self.kind == "circle":
            vals = 2.0 * np.pi * j0(2.0 * np.pi * np.linalg.norm(x, axis=1))
        elif self.kind == "sphere3d":
            vals = sphere_profile(np.linalg.norm(x, axis=1))
        else:
            vals = self._parabola(x)
        return vals[0] if single else vals

    def on_grid(self, scales, counts) -> np.ndarray:
        """Kernel at ``(k_1 s_1, ..., k_d s_d)`` for ``|k_i| < counts_i``.

        Output axis ``i`` has length ``2 counts_i - 1`` and is indexed by
        ``k_i + counts_i - 1``. The parabola case factorises over the
        quadrature nodes, so the table is a sum of outer products.
        """
        scales = [float(s) for s in scales]
        axes = [np.arange(-(n - 1), n) * s for s, n in zip(scales, counts)]
        if self.kind != "parabola2d":
            mesh = np.meshgrid(*axes, indexing="ij")
            r = np.sqrt(sum(m * m for m in mesh))
            if self.kind == "circle":
                return 2.0 * np.pi * j0(2.0 * np.pi * r)
            return sphere_profile(r)
        a1, a2 = axes
        t, w = composite_gauss_legendre(self._panels_for(np.abs(a1).max(), np.abs(a2).max()))
        w = w * np.sqrt(1.0 + 4.0 * t * t)
        table = np.zeros((len(a1), len(a2)), dtype=complex)
        step = 2048
        for s in range(0, len(t), step):
            ts, ws = t[s:s + step], w[s:s + step]
            E1 = np.exp(2j * np.pi * np.outer(a1, ts)) * ws
            E2 = np.exp(2j * np.pi * np.outer(a2, ts * ts))
            table += E1 @ E2.T
        return table

    def at_origin(self) -> float:
        return float(np.real(self(np.zeros(self.dimension))))


def sphere_profile(r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    out = np.full(r.shape, 4.0 * np.pi)
    nz = r > 0
    out[nz] = 2.0 * np.sin(2.0 * np.pi * r[nz]) / r[nz]
    return out


def kernel_eval(kernel: SurfaceKernel, x):
    """Single-point kernel value (complex for the parabola)."""
    value = kernel(np.asarray(x, dtype=float))
    if kernel.is_real:
        return float(np.real(value))
    return complex(value)
