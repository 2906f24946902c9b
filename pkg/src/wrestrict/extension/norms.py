"""Three routes to ``M = ||E_S||_{L^2(dsigma) -> l^2(X)}``.

``gram_norm`` and ``svd_discretized_norm`` compute the same number by
different discretisations (kernel of ``E E*`` on ``X`` vs explicit
quadrature of ``E``), so each is an oracle for the other.
``poisson_upper_bound`` goes through the dual lattice instead.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.special

from ..conics import SurfaceSpec
from ..lattice import DiagonalLattice
from .gram import (SOLVERS, CapExceeded, DenseGramOperator, EigenResult, LatticeGramOperator,
                   grid_structure)
from .kernels import SurfaceKernel

METHODS = ("gram_power", "svd_discretized", "poisson_upper")
DEFAULT_DENSE_CAP = 30_000
DEFAULT_LATTICE_CAP = 2_000_000


@dataclass
class NormEstimate:
    value: float
    iterations: int
    residual: float
    method: str
    converged: bool = True
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")

    def to_json(self) -> dict:
        return {"value": self.value, "iterations": self.iterations, "residual": self.residual,
                "method": self.method, "converged": self.converged,
                "details": {k: v for k, v in self.details.items() if _jsonable(v)}}


def _jsonable(v) -> bool:
    return isinstance(v, (int, float, str, bool, type(None), list, tuple))


def _as_points(X, d: int | None = None) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or len(X) == 0:
        raise ValueError("X must be a non-empty (n, d) array of points")
    if d is not None and X.shape[1] != d:
        raise ValueError(f"points must be {d}-dimensional")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite coordinates")
    return X


def _finish(result: EigenResult, method: str, tol: float, details: dict) -> NormEstimate:
    value = math.sqrt(max(result.value, 0.0))
    converged = result.converged and result.residual < tol
    return NormEstimate(value, result.iterations, result.residual, method, converged, details)


def gram_operator(X, kernel: SurfaceKernel, cap: int = DEFAULT_DENSE_CAP,
                  lattice_cap: int = DEFAULT_LATTICE_CAP):
    """FFT-backed operator when ``X`` is a full lattice block, dense otherwise."""
    X = _as_points(X, kernel.dimension)
    structure = grid_structure(X) if len(X) > 1 else None
    if structure is not None:
        if len(X) > lattice_cap:
            raise CapExceeded(f"|X| = {len(X)} exceeds lattice cap {lattice_cap}")
        scales, counts = structure
        op = LatticeGramOperator(kernel, scales, counts)
        # the FFT operator works in lexicographic grid order; map X onto it
        keys = np.round((X - X.min(axis=0)) / np.asarray(scales)).astype(np.int64)
        perm = np.ravel_multi_index(keys.T, counts)
        if np.array_equal(perm, np.arange(len(X))):
            return op
        return _Permuted(op, perm)
    if len(X) > cap:
        raise CapExceeded(f"|X| = {len(X)} exceeds dense cap {cap}")
    return DenseGramOperator(kernel, X)


class _Permuted:
    def __init__(self, op, perm):
        self.op, self.perm = op, perm
        self.n, self.dtype, self.diagonal = op.n, op.dtype, op.diagonal

    def matvec(self, v):
        full = np.zeros(self.n, dtype=v.dtype)
        full[self.perm] = v
        return self.op.matvec(full)[self.perm]


def gram_norm(X, kernel: SurfaceKernel, tol: float = 1e-9, max_iter: int = 20000,
              solver: str = "power", seed: int = 0, cap: int = DEFAULT_DENSE_CAP,
              lattice_cap: int = DEFAULT_LATTICE_CAP) -> NormEstimate:
    """``sqrt`` of the top eigenvalue of ``[K(x_i - x_j)]``.

    ``solver="power"`` is plain power iteration from a seeded start;
    ``"lanczos"`` runs ARPACK on the same matrix-free operator.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if solver not in SOLVERS:
        raise ValueError(f"solver must be one of {sorted(SOLVERS)}")
    if not isinstance(kernel, SurfaceKernel):
        kernel = SurfaceKernel(kernel)
    t0 = time.perf_counter()
    op = gram_operator(X, kernel, cap=cap, lattice_cap=lattice_cap)
    result = SOLVERS[solver](op.matvec, op.n, tol=tol, max_iter=max_iter, seed=seed, dtype=op.dtype)
    psd_floor = -1e-6 * kernel.at_origin() * op.n
    details = {"n_points": op.n, "solver": solver, "operator": type(op).__name__.lstrip("_"),
               "min_rayleigh": result.min_rayleigh, "psd_ok": result.min_rayleigh >= psd_floor,
               "eigenvalue": result.value, "runtime_s": time.perf_counter() - t0}
    return _finish(result, "gram_power", tol, details)


def surface_quadrature(surface, n_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes on the surface and weights summing to its total measure."""
    surface = surface if isinstance(surface, SurfaceSpec) else SurfaceSpec(surface)
    if surface.kind == "circle":
        phi = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
        return np.column_stack([np.cos(phi), np.sin(phi)]), np.full(n_nodes, 2.0 * np.pi / n_nodes)
    if surface.kind == "parabola2d":
        t, w = scipy.special.roots_legendre(n_nodes)
        return np.column_stack([t, t * t]), w * np.sqrt(1.0 + 4.0 * t * t)
    # sphere: Gauss-Legendre in cos(polar) times a uniform azimuthal rule
    n_polar = max(2, int(round(math.sqrt(n_nodes / 2))))
    n_az = max(4, n_nodes // n_polar)
    u, wu = scipy.special.roots_legendre(n_polar)
    phi = 2.0 * np.pi * np.arange(n_az) / n_az
    s = np.sqrt(1.0 - u * u)
    pts = np.stack([np.outer(s, np.cos(phi)), np.outer(s, np.sin(phi)),
                    np.outer(u, np.ones(n_az))], axis=-1).reshape(-1, 3)
    w = np.outer(wu, np.full(n_az, 2.0 * np.pi / n_az)).ravel()
    return pts, w


def _default_nodes(surface: SurfaceSpec, X: np.ndarray) -> int:
    rmax = float(np.max(np.linalg.norm(X, axis=1)))
    if surface.kind == "circle":
        need = 2.0 * np.pi * rmax + 32
    elif surface.kind == "parabola2d":
        need = np.pi * (np.abs(X[:, 0]).max() + np.abs(X[:, 1]).max()) + 32
    else:
        need = 2 * (np.pi * rmax + 16) ** 2
    return max(64, int(math.ceil(need)))


def _svd_once(X, surface, n_nodes, tol, max_iter, solver, seed):
    nodes, w = surface_quadrature(surface, n_nodes)
    A = np.exp(2j * np.pi * (X @ nodes.T)) * np.sqrt(w)[None, :]
    AH = A.conj().T
    # iterate on the smaller of A A* and A* A; same spectrum
    if A.shape[0] <= A.shape[1]:
        def mv(v):
            return A @ (AH @ v)
        n = A.shape[0]
    else:
        def mv(v):
            return AH @ (A @ v)
        n = A.shape[1]
    return SOLVERS[solver](mv, n, tol=tol, max_iter=max_iter, seed=seed, dtype=np.complex128)


def svd_discretized_norm(X, surface="circle", n_nodes: int | None = None, tol: float = 1e-10,
                         max_iter: int = 20000, solver: str = "power", seed: int = 0,
                         node_rtol: float = 1e-6, max_doublings: int = 6) -> NormEstimate:
    """Largest singular value of the quadrature-discretised extension matrix.

    With ``n_nodes=None`` the node count starts from the phase-resolving
    estimate and doubles until two consecutive values agree to ``node_rtol``.
    """
    surface = surface if isinstance(surface, SurfaceSpec) else SurfaceSpec(surface)
    X = _as_points(X, surface.dimension)
    if n_nodes is not None and n_nodes < 64:
        raise ValueError("n_nodes must be >= 64")
    if solver not in SOLVERS:
        raise ValueError(f"solver must be one of {sorted(SOLVERS)}")
    if n_nodes is not None:
        res = _svd_once(X, surface, n_nodes, tol, max_iter, solver, seed)
        return _finish(res, "svd_discretized", tol, {"n_nodes": n_nodes, "n_points": len(X)})
    n = _default_nodes(surface, X)
    prev = _svd_once(X, surface, n, tol, max_iter, solver, seed)
    history = [(n, prev.value)]
    for _ in range(max_doublings):
        n *= 2
        cur = _svd_once(X, surface, n, tol, max_iter, solver, seed)
        history.append((n, cur.value))
        stable = abs(cur.value - prev.value) <= node_rtol * abs(cur.value)
        prev = cur
        if stable:
            break
    else:
        stable = False
    est = _finish(prev, "svd_discretized", tol,
                  {"n_nodes": n, "n_points": len(X), "node_history": history, "node_stable": stable})
    est.converged = est.converged and stable
    return est


@dataclass(frozen=True)
class Mollifier:
    """Gaussian cutoff ``psi(x / width)`` with ``psi(x) = exp(-pi |x|^2)``.

    Its own transform is ``width^d exp(-pi width^2 |xi|^2)``, so both sides
    are positive.
    """
    width: float
    kind: str = "gaussian"

    def __post_init__(self):
        if self.kind != "gaussian":
            raise ValueError("only the gaussian mollifier is supported")
        if not self.width > 0:
            raise ValueError("width must be positive")

    def physical(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.exp(-np.pi * np.sum(x * x, axis=1) / self.width**2)

    def frequency(self, xi) -> np.ndarray:
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        d = xi.shape[1]
        return self.width**d * np.exp(-np.pi * self.width**2 * np.sum(xi * xi, axis=1))

    def smoothed_surface(self, surface: SurfaceSpec, rho) -> np.ndarray:
        """``(dsigma * psi_hat_R)(xi)`` as a function of ``rho = |xi|``."""
        R = self.width
        rho = np.asarray(rho, dtype=float)
        if surface.kind == "circle":
            return (2.0 * np.pi * R * R * np.exp(-np.pi * R * R * (rho - 1.0) ** 2)
                    * scipy.special.i0e(2.0 * np.pi * R * R * rho))
        if surface.kind == "sphere3d":
            out = np.full(rho.shape, 4.0 * np.pi * R**3 * math.exp(-np.pi * R * R))
            nz = rho > 0
            r = rho[nz]
            out[nz] = (R / r) * (np.exp(-np.pi * R * R * (r - 1.0) ** 2)
                                 - np.exp(-np.pi * R * R * (r + 1.0) ** 2))
            return out
        raise ValueError(f"no closed form for {surface.kind}")

    def envelope(self, surface: SurfaceSpec) -> float:
        """Bound ``smoothed(rho) <= envelope * exp(-pi R^2 (rho - 1)^2)``."""
        R = self.width
        return 2.0 * np.pi * R * R if surface.kind == "circle" else 4.0 * np.pi * R**3


POISSON_WINDOW = 20.0


def _poisson_tail_bound(dual_scales, R, envelope, window) -> float:
    # shells |rho - 1| in [(window + j) / R, (window + j + 1) / R), counted by box volume
    def count_within(t):
        return math.prod(2.0 * t / s + 1.0 for s in dual_scales)

    inner = count_within(1.0) * math.exp(-np.pi * window**2)
    outer = sum(count_within(1.0 + (window + j + 1) / R) * math.exp(-np.pi * (window + j) ** 2)
                for j in range(50))
    return envelope * (inner + outer)


def poisson_upper_bound(L: DiagonalLattice, surface="circle", R: float = 32.0,
                        grid_steps=None, window: float = POISSON_WINDOW,
                        chunk: int = 8192) -> NormEstimate:
    """``sqrt(sup_{xi0} covol(L)^{-1} sum_{xi in L*} K_hat(xi - xi0))``.

    ``K_hat`` is the surface measure smoothed by the Gaussian at scale
    ``1/R``; only dual points with ``| |xi - xi0| - 1 | <= window / R`` are
    summed, and the dropped tail is bounded analytically in ``details``.
    ``grid_steps`` is an int or per-axis tuple of grid sizes on the
    fundamental domain of ``L*``; by default the pitch is ``1 / (4R)``.
    """
    surface = surface if isinstance(surface, SurfaceSpec) else SurfaceSpec(surface)
    if surface.kind not in ("circle", "sphere3d"):
        raise ValueError(f"poisson route supports circle and sphere3d, not {surface.kind}")
    if L.dimension != surface.dimension:
        raise ValueError("lattice and surface dimensions differ")
    if not R > 0:
        raise ValueError("R must be positive")
    t0 = time.perf_counter()
    d = L.dimension
    dual = np.asarray([float(s) for s in L.dual().scales])
    if grid_steps is None:
        steps = [max(1, math.ceil(4 * R * s)) for s in dual]
    elif isinstance(grid_steps, int):
        steps = [grid_steps] * d
    else:
        steps = [int(g) for g in grid_steps]
    moll = Mollifier(R)
    reach = 1.0 + window / R
    # dual lattice offsets that can land in the shell for some xi0 in the cell
    ranges = [np.arange(-math.ceil(reach / s) - 1, math.ceil(reach / s) + 2) * s for s in dual]
    offsets = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, d)
    axes = [np.arange(g) * s / g for g, s in zip(steps, dual)]
    xi0 = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    best, arg = -np.inf, None
    lo, hi = 1.0 - window / R, reach
    for start in range(0, len(xi0), chunk):
        block = xi0[start:start + chunk]
        rho = np.linalg.norm(offsets[None, :, :] - block[:, None, :], axis=2)
        keep = (rho >= lo) & (rho <= hi)
        vals = np.where(keep, moll.smoothed_surface(surface, np.where(keep, rho, 1.0)), 0.0)
        sums = vals.sum(axis=1)
        i = int(np.argmax(sums))
        if sums[i] > best:
            best, arg = float(sums[i]), block[i]
    covol = float(L.covolume)
    sup = best / covol
    tail = _poisson_tail_bound(dual, R, moll.envelope(surface), window) / covol
    details = {"sup": sup, "argmax": arg.tolist(), "grid_steps": steps, "tail_bound": tail,
               "mollifier": "gaussian", "mollifier_width": R, "covolume": covol,
               "runtime_s": time.perf_counter() - t0}
    return NormEstimate(math.sqrt(max(sup, 0.0)), 0, tail / max(sup, 1e-300), "poisson_upper",
                        True, details)
