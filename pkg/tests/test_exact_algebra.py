import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from wrestrict.curve_detect import veronese_matrix
from wrestrict.exact_algebra import (ExactMatrix, determinant, height, nullspace, primitive,
                                     rank, rational_round)

CIRCLE_25 = [(5, 0), (-5, 0), (0, 5), (0, -5), (3, 4), (3, -4), (-3, 4), (-3, -4),
             (4, 3), (4, -3), (-4, 3), (-4, -3)]


def test_rank_examples():
    assert rank(ExactMatrix.identity(6)) == 6
    assert rank(ExactMatrix.zeros(4, 6)) == 0
    assert rank(veronese_matrix(CIRCLE_25)) == 5


def test_nullspace_examples():
    assert nullspace(ExactMatrix.identity(6)) == []
    assert nullspace(ExactMatrix([[1, 1]])) == [[1, -1]]
    (v,) = nullspace(veronese_matrix(CIRCLE_25))
    assert v == [25, 0, 0, -1, -1, 0] or v == [-25, 0, 0, 1, 1, 0]
    assert primitive([-25, 0, 0, 1, 1, 0]) == [25, 0, 0, -1, -1, 0]


def test_determinant_examples():
    assert determinant(ExactMatrix.identity(6)) == 1
    assert determinant(ExactMatrix([[1, 2], [3, 4]])) == -2
    six_on_circle = [(5, 0), (-5, 0), (0, 5), (0, -5), (3, 4), (4, 3)]
    assert determinant(veronese_matrix(six_on_circle)) == 0
    assert determinant(ExactMatrix([[Fraction(1, 2), 0], [0, Fraction(2, 3)]])) == Fraction(1, 3)
    with pytest.raises(ValueError):
        determinant(ExactMatrix([[1, 2, 3]]))


def test_rational_round_examples():
    assert rational_round(0.5, 10) == Fraction(1, 2)
    assert rational_round(math.pi, 113) == Fraction(355, 113)
    assert rational_round(0.333333, 3) == Fraction(1, 3)
    assert rational_round([0.25, -0.75], 4) == [Fraction(1, 4), Fraction(-3, 4)]
    with pytest.raises(ValueError):
        rational_round(float("nan"), 10)
    with pytest.raises(ValueError):
        rational_round(0.5, 0)


def test_matrix_rejects_floats_and_ragged_rows():
    with pytest.raises((TypeError, ValueError)):
        ExactMatrix([[0.5, 1]])
    with pytest.raises(ValueError):
        ExactMatrix([[1, 2], [3]])


def test_height():
    assert height([Fraction(-7, 3), 2]) == 7


small_ints = st.integers(min_value=-6, max_value=6)


@st.composite
def int_matrices(draw, max_dim=6):
    m = draw(st.integers(1, max_dim))
    n = draw(st.integers(1, max_dim))
    # low-rank products make nontrivial nullspaces likely
    k = draw(st.integers(1, min(m, n)))
    A = draw(st.lists(st.lists(small_ints, min_size=k, max_size=k), min_size=m, max_size=m))
    B = draw(st.lists(st.lists(small_ints, min_size=n, max_size=n), min_size=k, max_size=k))
    return [[sum(A[i][t] * B[t][j] for t in range(k)) for j in range(n)] for i in range(m)]


@given(int_matrices())
def test_rank_nullity_and_exact_nullspace(rows):
    M = ExactMatrix(rows)
    basis = nullspace(M)
    assert rank(M) + len(basis) == M.shape[1]
    for v in basis:
        assert all(x == 0 for x in M.matvec(v))
        assert math.gcd(*v) == 1


@given(st.integers(1, 6).flatmap(lambda n: st.tuples(
    st.lists(st.lists(small_ints, min_size=n, max_size=n), min_size=n, max_size=n),
    st.permutations(list(range(n))))))
def test_determinant_sign_flips_with_permutation_parity(data):
    rows, perm = data
    M = ExactMatrix(rows)
    sign = 1
    seen = list(perm)
    for i in range(len(seen)):
        while seen[i] != i:
            j = seen[i]
            seen[i], seen[j] = seen[j], seen[i]
            sign = -sign
    assert determinant(M.permute_rows(perm)) == sign * determinant(M)


@given(st.floats(-1e6, 1e6, allow_nan=False), st.integers(1, 10**6))
def test_rational_round_within_one_over_H(x, H):
    q = rational_round(x, H)
    assert q.denominator <= H
    assert abs(x - q) <= 1 / H


def test_determinant_matches_leibniz_on_random_3x3():
    rng = random.Random(3)
    for _ in range(50):
        A = [[rng.randint(-9, 9) for _ in range(3)] for _ in range(3)]
        leibniz = (A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1])
                   - A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0])
                   + A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0]))
        assert determinant(ExactMatrix(A)) == leibniz
