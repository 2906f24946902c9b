import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wrestrict.finite_field import (FieldCapExceeded, FieldVariety, PrimeField, circle_bound_check,
                                    ffield_report, fourier_coeff, fourier_table, parabola_checks,
                                    parseval_error, primes_up_to, small_coefficient_census)

ODD_PRIMES = [p for p in primes_up_to(101) if p > 2]


def brute_circle(p):
    return [(x, y) for x in range(p) for y in range(p) if (x * x + y * y - 1) % p == 0]


def test_parabola_values_at_p7():
    F = PrimeField(7)
    P = FieldVariety.build(F, "parabola")
    assert fourier_coeff(F, P, (0, 0)) == pytest.approx(1 / 7)
    for m1 in range(1, 7):
        assert abs(fourier_coeff(F, P, (m1, 0))) < 1e-14
    assert abs(fourier_coeff(F, P, (3, 2))) == pytest.approx(0.0539949, abs=1e-7)


@pytest.mark.parametrize("p", ODD_PRIMES)
def test_parabola_closed_forms(p):
    checks = parabola_checks(PrimeField(p))
    assert checks["origin_error"] < 1e-12
    assert checks["axis_max"] < 1e-12
    assert checks["modulus_error"] < 1e-12


@pytest.mark.parametrize("p", [13, 7, 3, 5, 101])
def test_circle_size_against_brute_force(p):
    F = PrimeField(p)
    S = FieldVariety.build(F, "circle")
    assert sorted(S.points) == brute_circle(p)
    assert len(S.points) == (p - 1 if p % 4 == 1 else p + 1)
    assert S.satisfies(F)


def test_circle_size_p13():
    assert len(FieldVariety.build(PrimeField(13), "circle").points) == 12
    assert len(FieldVariety.build(PrimeField(7), "circle").points) == 8


@settings(max_examples=30)
@given(st.sampled_from([5, 7, 11, 13, 29]), st.integers(0, 10**6), st.sampled_from(["circle", "parabola"]))
def test_direct_sum_matches_fft(p, seed, kind):
    F = PrimeField(p)
    V = FieldVariety.build(F, kind)
    table = fourier_table(F, V)
    m = np.random.default_rng(seed).integers(0, p, 2)
    assert fourier_coeff(F, V, m) == pytest.approx(table[m[0], m[1]], abs=1e-13)


@pytest.mark.parametrize("p", ODD_PRIMES)
def test_circle_bound_for_small_primes(p):
    out = circle_bound_check(PrimeField(p))
    assert out["violations"] == []
    assert out["max_normalized"] <= 2 + 1e-9
    assert out["parseval_error"] < 1e-12
    assert sum(out["histogram"]) == p * p - 1


def test_circle_bound_p5_value():
    assert circle_bound_check(PrimeField(5))["max_normalized"] == pytest.approx(1.447, abs=1e-3)


def test_circle_bound_p2003():
    out = circle_bound_check(PrimeField(2003))
    assert out["violations"] == [] and out["max_normalized"] <= 2


def test_parseval_and_conjugate_symmetry():
    report = ffield_report(31, "circle")
    assert report["checks"]["parseval_error"] < 1e-12
    assert report["checks"]["conjugate_symmetry_error"] < 1e-13
    F = PrimeField(31)
    assert parseval_error(F, FieldVariety.build(F, "parabola")) < 1e-12


def test_census():
    F = PrimeField(13)
    full = small_coefficient_census(F, exponent=1.5 - np.log(2) / np.log(13) - 1e-12)
    assert full["fraction"] == 1.0
    out = small_coefficient_census(PrimeField(101))
    assert 0 <= out["fraction"] <= 1 and out["count"] == len(out["m_set"])
    assert out["fraction"] == pytest.approx(0.5686, abs=1e-4)


def test_errors():
    for bad in (1, 2, 9, 15):
        with pytest.raises(ValueError):
            PrimeField(bad)
    with pytest.raises(FieldCapExceeded):
        circle_bound_check(PrimeField(2011))
    with pytest.raises(ValueError):
        FieldVariety.build(PrimeField(7), "hyperbola")
    with pytest.raises(ValueError):
        fourier_coeff(PrimeField(7), FieldVariety.build(PrimeField(7), "circle"), (7, 0))
