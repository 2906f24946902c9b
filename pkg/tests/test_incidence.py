import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wrestrict.incidence import (DiscreteCurve, OperationCapExceeded, circle_contrast,
                                 circle_counts_fast, convolve_indicator, grid_set, incidence_report,
                                 rich_points, sharpness_instance, valtr_incidences,
                                 valtr_incidences_brute)


def brute_convolution(curve, E):
    out = {}
    for g in curve.points:
        for e in E:
            key = (int(g[0] + e[0]), int(g[1] + e[1]))
            out[key] = out.get(key, 0) + 1
    return out


def test_parabola_curve():
    c = DiscreteCurve.parabola(2)
    assert c.points.tolist() == [[-2, 4], [-1, 1], [0, 0], [1, 1], [2, 4]]


def test_convolution_of_origin():
    conv = convolve_indicator(DiscreteCurve.parabola(3), [[0, 0]])
    assert conv.to_dict() == {(n, n * n): 1 for n in range(-3, 4)}
    assert conv.get((2, 4)) == 1 and conv.get((2, 5)) == 0


def test_small_grid_example():
    E = [(x, y) for x in range(2) for y in range(3)]
    conv = convolve_indicator(DiscreteCurve.parabola(1), E)
    assert conv.to_dict() == brute_convolution(DiscreteCurve.parabola(1), E)
    assert conv.total == 3 * 6


@settings(max_examples=40)
@given(st.integers(1, 6), st.lists(st.tuples(st.integers(-15, 15), st.integers(-30, 30)), min_size=1,
                                   max_size=40))
def test_convolution_matches_brute_force(R, pts):
    curve = DiscreteCurve.parabola(R)
    E = np.unique(np.array(pts), axis=0)
    conv = convolve_indicator(curve, E)
    assert conv.to_dict() == brute_convolution(curve, E)
    assert conv.total == len(curve) * len(E)


def test_chunked_path_matches():
    curve = DiscreteCurve.parabola(10)
    E = grid_set(5, 20)
    a = convolve_indicator(curve, E).to_dict()
    b = convolve_indicator(curve, E, chunk=50).to_dict()
    assert a == b


def test_symmetry_under_reflection():
    curve = DiscreteCurve.parabola(5)
    E = grid_set(4, 9)
    conv = convolve_indicator(curve, E).to_dict()
    for (x, y), c in conv.items():
        assert conv[(-x, y)] == c


def test_rich_points_monotone():
    conv = convolve_indicator(DiscreteCurve.parabola(8), grid_set(8, 64))
    vals = [rich_points(conv, k) for k in range(1, 20)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        rich_points(conv, 0)


def test_sharpness_instance():
    out = sharpness_instance(16, 8)
    assert out["mass_ok"]
    assert out["ratio"] == pytest.approx(0.0458, abs=5e-4)
    assert 0.01 <= out["ratio"] <= 100


@pytest.mark.parametrize("N", [2, 3, 4, 5])
def test_valtr_two_ways(N):
    assert valtr_incidences(N) == valtr_incidences_brute(N)


def test_valtr_N4():
    assert valtr_incidences(4) == 216


def test_circle_contrast_examples():
    got = circle_contrast([25, 3, 2, 5, 1])
    assert got == {25: 12, 3: 0, 2: 4, 5: 8, 1: 4}
    fast = circle_counts_fast(400)
    sample = list(range(1, 401, 7))
    got = circle_contrast(sample)
    assert all(got[n] == fast[n] for n in sample)
    with pytest.raises(ValueError):
        circle_contrast([0])


def test_circle_curve():
    assert len(DiscreteCurve.circle(25)) == 12
    assert len(DiscreteCurve.circle(3)) == 0


def test_cap_and_report():
    with pytest.raises(OperationCapExceeded):
        convolve_indicator(DiscreteCurve.parabola(100), grid_set(100, 100), cap=1000)
    rep = incidence_report(4, (4, 16), 2)
    assert rep["E_size"] == 64 and rep["mass_ok"]
