"""Matrix-free Gram operators ``v -> [K(x_i - x_j)] v`` and the eigen-solvers on them."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .kernels import SurfaceKernel


class CapExceeded(RuntimeError):
    pass


class LatticeGramOperator:
    """Gram matrix of a full rectangular block of a diagonal lattice.

    Kernel values depend only on index differences, so the matrix is
    multilevel Toeplitz and each product is one FFT convolution against the
    kernel table on the difference grid.
    """

    def __init__(self, kernel: SurfaceKernel, scales, counts, workers: int | None = None):
        self.kernel = kernel
        self.counts = tuple(int(n) for n in counts)
        self.scales = tuple(float(s) for s in scales)
        self.n = math.prod(self.counts)
        self.dtype = np.float64 if kernel.is_real else np.complex128
        self.workers = workers
        table = kernel.on_grid(self.scales, self.counts)
        self.diagonal = complex(table[tuple(n - 1 for n in self.counts)]).real
        self._fft_shape = tuple(scipy.fft.next_fast_len(2 * n - 1) for n in self.counts)
        self._axes = tuple(range(len(self.counts)))
        self._table_hat = scipy.fft.fftn(table, self._fft_shape, axes=self._axes, workers=workers)
        self._crop = tuple(slice(n - 1, 2 * n - 1) for n in self.counts)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        V = scipy.fft.fftn(v.reshape(self.counts), self._fft_shape, axes=self._axes, workers=self.workers)
        out = scipy.fft.ifftn(self._table_hat * V, axes=self._axes, workers=self.workers)[self._crop]
        if self.dtype == np.float64 and not np.iscomplexobj(v):
            out = out.real
        return np.ascontiguousarray(out).ravel()


class DenseGramOperator:
    """Gram matrix of an arbitrary point set, cached when it fits in memory."""

    def __init__(self, kernel: SurfaceKernel, X: np.ndarray, cache_entries: int = 6 * 10**7,
                 tile: int = 1024):
        self.kernel = kernel
        self.X = np.asarray(X, dtype=float)
        self.n = len(self.X)
        self.dtype = np.float64 if kernel.is_real else np.complex128
        self.tile = tile
        self.diagonal = kernel.at_origin()
        self._cache = None
        if self.n * self.n <= cache_entries:
            self._cache = self._block(slice(0, self.n), slice(0, self.n))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    def _block(self, rows: slice, cols: slice) -> np.ndarray:
        diff = self.X[rows, None, :] - self.X[None, cols, :]
        vals = self.kernel(diff.reshape(-1, diff.shape[-1]))
        return vals.reshape(diff.shape[0], diff.shape[1]).astype(self.dtype, copy=False)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        if self._cache is not None:
            return self._cache @ v
        out = np.zeros(self.n, dtype=np.result_type(self.dtype, v.dtype))
        for i in range(0, self.n, self.tile):
            rows = slice(i, min(i + self.tile, self.n))
            for j in range(0, self.n, self.tile):
                cols = slice(j, min(j + self.tile, self.n))
                out[rows] += self._block(rows, cols) @ v[cols]
        return out


@dataclass
class EigenResult:
    value: float
    iterations: int
    residual: float
    converged: bool
    min_rayleigh: float
    eigen_residual: float = math.nan


def start_vector(n: int, seed: int, dtype=np.float64) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    if np.dtype(dtype).kind == "c":
        v = v + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def power_iteration(matvec, n: int, tol: float = 1e-9, max_iter: int = 20000, seed: int = 0,
                    dtype=np.float64) -> EigenResult:
    """Largest eigenvalue of a Hermitian PSD operator by power iteration.

    Stops when consecutive Rayleigh quotients differ relatively by less than
    ``tol``; that relative change is reported as ``residual`` and
    ``|A v - lam v| / lam`` at the final iterate as ``eigen_residual``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    v = start_vector(n, seed, dtype)
    lam_prev = None
    min_rq = math.inf
    converged = False
    lam, change, eig_res = 0.0, math.inf, math.inf
    it = 0
    for it in range(1, max_iter + 1):
        w = matvec(v)
        lam = float(np.real(np.vdot(v, w)))
        min_rq = min(min_rq, lam)
        norm_w = np.linalg.norm(w)
        if norm_w == 0:
            return EigenResult(0.0, it, 0.0, True, min_rq, 0.0)
        eig_res = float(np.linalg.norm(w - lam * v) / max(abs(lam), 1e-300))
        v = w / norm_w
        if lam_prev is not None:
            change = abs(lam - lam_prev) / max(abs(lam), 1e-300)
            if change < tol:
                converged = True
                break
        lam_prev = lam
    return EigenResult(lam, it, change, converged, min_rq, eig_res)


def lanczos(matvec, n: int, tol: float = 1e-9, max_iter: int = 20000, seed: int = 0,
            dtype=np.float64) -> EigenResult:
    """Largest eigenvalue by implicitly restarted Lanczos on the same operator.

    ``residual`` is ``(|A v - lam v| / lam)^2``, which bounds the relative
    eigenvalue error up to the spectral gap.
    """
    if n == 1:
        lam = float(np.real(matvec(np.ones(1, dtype=dtype))[0]))
        return EigenResult(lam, 1, 0.0, True, lam, 0.0)
    if n <= 3:
        # ARPACK needs k < n - 1; assemble the tiny matrix instead
        A = np.column_stack([matvec(np.eye(n, dtype=dtype)[:, j]) for j in range(n)])
        lam = float(np.linalg.eigvalsh(A).max())
        return EigenResult(lam, n, 0.0, True, lam, 0.0)
    calls = [0]

    def counted(v):
        calls[0] += 1
        return matvec(v)

    op = LinearOperator((n, n), matvec=counted, dtype=dtype)
    try:
        vals, vecs = eigsh(op, k=1, which="LA", tol=tol, maxiter=max_iter,
                           v0=start_vector(n, seed, dtype))
        converged = True
    except ArpackNoConvergence as exc:
        if len(exc.eigenvalues) == 0:
            return power_iteration(matvec, n, tol=tol, max_iter=max_iter, seed=seed, dtype=dtype)
        vals, vecs, converged = exc.eigenvalues, exc.eigenvectors, False
    lam = float(np.real(vals[0]))
    v = vecs[:, 0]
    eig_res = float(np.linalg.norm(matvec(v) - lam * v) / max(abs(lam), 1e-300))
    return EigenResult(lam, calls[0], eig_res**2, converged, lam, eig_res)


SOLVERS = {"power": power_iteration, "lanczos": lanczos}


def grid_structure(X: np.ndarray, rtol: float = 1e-9):
    """Detect a full rectangular lattice block.

    Returns ``(scales, counts)`` when the rows of ``X`` are exactly the points
    ``origin + k * scales`` for ``0 <= k < counts`` (any order), else ``None``.
    """
    X = np.asarray(X, dtype=float)
    n, d = X.shape
    scales, counts = [], []
    for axis in range(d):
        vals = np.unique(X[:, axis])
        if len(vals) == 1:
            scales.append(1.0)
            counts.append(1)
            continue
        steps = np.diff(vals)
        step = steps.mean()
        if np.max(np.abs(steps - step)) > rtol * max(step, np.abs(vals).max()):
            return None
        scales.append(float(step))
        counts.append(len(vals))
    if math.prod(counts) != n:
        return None
    # uniqueness of rows completes the check
    keys = np.round((X - X.min(axis=0)) / np.asarray(scales)).astype(np.int64)
    if len(np.unique(keys, axis=0)) != n:
        return None
    return tuple(scales), tuple(counts)
