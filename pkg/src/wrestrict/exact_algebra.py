"""Exact integer/rational linear algebra.

Everything here is exact: entries are ``int`` or :class:`fractions.Fraction`
and no floating point is used. Rational matrices are reduced to integer
matrices by clearing row denominators, after which fraction-free (Bareiss)
elimination keeps all intermediate values integral.
"""
from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np

BigRational = Fraction


class ExactMatrix:
    """Immutable dense matrix of exact rationals.

    Parameters
    ----------
    rows : sequence of sequences
        Entries must be ``int`` or ``Fraction``; floats are rejected.
    ncols : int, optional
        Needed only for matrices with zero rows.
    """

    __slots__ = ("_rows", "shape")

    def __init__(self, rows: Iterable[Sequence], ncols: int | None = None):
        data = []
        for row in rows:
            converted = []
            for value in row:
                if isinstance(value, bool) or not isinstance(value, Rational):
                    raise TypeError(f"exact entries required, got {type(value).__name__}")
                converted.append(value if isinstance(value, int) else Fraction(value))
            data.append(tuple(converted))
        widths = {len(r) for r in data}
        if len(widths) > 1:
            raise ValueError("rows of unequal length")
        if data:
            ncols = widths.pop()
        elif ncols is None:
            ncols = 0
        self._rows = tuple(data)
        self.shape = (len(data), ncols)

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "ExactMatrix":
        return cls([[0] * ncols for _ in range(nrows)], ncols=ncols)

    @property
    def rows(self) -> tuple:
        return self._rows

    def __getitem__(self, idx):
        i, j = idx
        return self._rows[i][j]

    def __eq__(self, other) -> bool:
        return isinstance(other, ExactMatrix) and self.shape == other.shape and self._rows == other._rows

    def __hash__(self) -> int:
        return hash((self.shape, self._rows))

    def __repr__(self) -> str:
        return f"ExactMatrix({[list(r) for r in self._rows]!r})"

    def matvec(self, v: Sequence) -> list:
        if len(v) != self.shape[1]:
            raise ValueError("dimension mismatch")
        return [sum((a * b for a, b in zip(row, v)), 0) for row in self._rows]

    def permute_rows(self, perm: Sequence[int]) -> "ExactMatrix":
        return ExactMatrix([self._rows[i] for i in perm], ncols=self.shape[1])

    def integer_rows(self) -> tuple[list[list[int]], list[int]]:
        """Rows scaled to integers, with the positive scale applied to each row."""
        out, scales = [], []
        for row in self._rows:
            den = 1
            for value in row:
                if isinstance(value, Fraction):
                    den = den * value.denominator // math.gcd(den, value.denominator)
            out.append([int(value * den) for value in row])
            scales.append(den)
        return out, scales


def _as_matrix(M) -> ExactMatrix:
    return M if isinstance(M, ExactMatrix) else ExactMatrix(M)


def _gauss_jordan(A: list[list[int]]) -> tuple[list[list[int]], list[int], int]:
    """Fraction-free Gauss-Jordan elimination, in place on an integer matrix.

    Returns the reduced matrix, the pivot columns (one per pivot row, rows
    reordered so pivot row ``i`` is ``A[i]``) and the final pivot value. Every
    pivot row ends with that common value on its pivot column and zeros on the
    other pivot columns.
    """
    nrows = len(A)
    ncols = len(A[0]) if A else 0
    prev = 1
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        best = max(range(r, nrows), key=lambda i: abs(A[i][c]))
        if A[best][c] == 0:
            continue
        A[r], A[best] = A[best], A[r]
        piv = A[r][c]
        prow = A[r]
        for i in range(nrows):
            if i == r:
                continue
            row = A[i]
            f = row[c]
            for j in range(ncols):
                q, rem = divmod(piv * row[j] - f * prow[j], prev)
                if rem:
                    raise ArithmeticError("inexact Bareiss division")
                row[j] = q
        prev = piv
        pivots.append(c)
        r += 1
    return A, pivots, prev


def rank(M) -> int:
    """Exact rank by fraction-free elimination."""
    M = _as_matrix(M)
    if M.shape[0] == 0 or M.shape[1] == 0:
        return 0
    A, _ = M.integer_rows()
    _, pivots, _ = _gauss_jordan(A)
    return len(pivots)


def primitive(v: Sequence) -> list[int]:
    """Scale a nonzero rational vector to coprime integers, first nonzero entry positive."""
    fr = [Fraction(x) for x in v]
    den = 1
    for x in fr:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    if g == 0:
        raise ValueError("zero vector has no primitive form")
    ints = [x // g for x in ints]
    lead = next(x for x in ints if x)
    return [-x for x in ints] if lead < 0 else ints


def nullspace(M) -> list[list[int]]:
    """Basis of the right nullspace as primitive integer vectors.

    One vector per free column, so rank + len(basis) == ncols. Each vector is
    checked to satisfy ``M v = 0`` exactly before being returned.
    """
    M = _as_matrix(M)
    nrows, ncols = M.shape
    if nrows == 0:
        return [[int(i == j) for i in range(ncols)] for j in range(ncols)]
    A, _ = M.integer_rows()
    A, pivots, d = _gauss_jordan(A)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [0] * ncols
        v[f] = d
        for i, pc in enumerate(pivots):
            v[pc] = -A[i][f]
        v = primitive(v)
        if any(x != 0 for x in M.matvec(v)):
            raise ArithmeticError("nullspace vector failed exact verification")
        basis.append(v)
    if len(pivots) + len(basis) != ncols:
        raise ArithmeticError("rank-nullity violated")
    return basis


def determinant(M):
    """Exact determinant (Bareiss). Returns ``int`` for integer input, else ``Fraction``."""
    M = _as_matrix(M)
    n, m = M.shape
    if n != m:
        raise ValueError(f"determinant of non-square {n}x{m} matrix")
    if n == 0:
        return 1
    A, scales = M.integer_rows()
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        piv = A[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (piv * A[i][j] - A[i][k] * A[k][j]) // prev
            A[i][k] = 0
        prev = piv
    det = sign * A[n - 1][n - 1]
    scale = math.prod(scales)
    if scale == 1:
        return det
    return Fraction(det, scale)


def rational_round(x, denominator_bound: int):
    """Componentwise best rational approximation with denominator <= ``denominator_bound``.

    A scalar gives a Fraction, a sequence gives a list of Fractions.
    """
    if denominator_bound < 1:
        raise ValueError("denominator bound must be >= 1")
    scalar = isinstance(x, (int, float, Fraction, np.floating, np.integer))
    values = [x] if scalar else list(x)
    out = []
    for value in values:
        if isinstance(value, float) and not math.isfinite(value):
            raise ValueError(f"non-finite input {value!r}")
        out.append(Fraction(value).limit_denominator(denominator_bound))
    return out[0] if scalar else out


def height(v: Iterable) -> int:
    """Largest numerator/denominator magnitude among the entries of ``v``."""
    h = 0
    for x in v:
        x = Fraction(x)
        h = max(h, abs(x.numerator), x.denominator)
    return h
