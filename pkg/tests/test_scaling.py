import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wrestrict.scaling import (ExperimentConfig, PowerLawFit, ScalingRecord, fit_exponent,
                               identity_check, parse_number, predicted_slope, read_records_csv,
                               run_sweep, square_regime_R, write_records_csv, write_sidecar)


def records(R, norms, beta=Fraction(1, 8)):
    return [ScalingRecord(beta, r, "gram", n) for r, n in zip(R, norms)]


def test_exact_power_law():
    R = [32, 64, 128, 256]
    fit = fit_exponent(records(R, [r**0.5 for r in R]))
    assert fit.slope == pytest.approx(0.5, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_constant_norms_have_zero_slope():
    fit = fit_exponent(records([32, 64, 128, 256], [3.0] * 4))
    assert fit.slope == 0.0 and fit.r_squared == 1.0


@given(st.floats(0.01, 100), st.floats(-1, 1))
def test_slope_invariant_under_rescaling(c, s):
    R = np.array([32.0, 64, 128, 256])
    y = R**s * np.array([1.0, 1.3, 0.9, 1.1])
    a = fit_exponent(records(R, y)).slope
    b = fit_exponent(records(R, c * y)).slope
    assert a == pytest.approx(b, abs=1e-9)


def test_fit_requires_three_records():
    with pytest.raises(ValueError):
        fit_exponent(records([32, 64], [1.0, 2.0]))
    mixed = records([32, 64, 128], [1, 2, 3]) + records([256], [4], beta=Fraction(1, 4))
    with pytest.raises(ValueError):
        fit_exponent(mixed)


def test_failed_records_are_skipped():
    recs = records([32, 64, 128], [1.0, 2.0, 4.0])
    recs.append(ScalingRecord(Fraction(1, 8), 256, "gram", None, error="CapExceeded: too big"))
    assert fit_exponent(recs).slope == pytest.approx(1.0)
    with pytest.raises(ValueError):
        ScalingRecord(0, 32, "gram", None)


def test_power_law_estimator():
    model = PowerLawFit().fit([[10.0], [100.0], [1000.0]], [2.0, 20.0, 200.0])
    assert model.slope_ == pytest.approx(1.0) and model.intercept_ == pytest.approx(math.log(0.2))
    np.testing.assert_allclose(model.predict([[50.0]]), [10.0])
    assert model.score([[10.0], [100.0], [1000.0]], [2.0, 20.0, 200.0]) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        PowerLawFit().fit([[1.0], [-2.0], [3.0]], [1.0, 1.0, 1.0])


def test_predicted_slopes():
    assert predicted_slope("circle", "aniso", Fraction(1, 28))[:2] == (0.5 - 1.5 / 28, "upper")
    assert predicted_slope("parabola", "aniso", 0.25)[:2] == (0.25, "lower")
    assert predicted_slope("circle", "square", 0.875)[:2] == (0.0, "equal")
    assert predicted_slope("parabola2d", "square", 0.5)[:2] == (0.125, "lower")
    assert predicted_slope("sphere3d", "aniso", 0.1) is None


def test_meets_prediction_direction():
    fit = fit_exponent(records([32, 64, 128], [1, 2, 4]), "circle", "aniso", Fraction(1, 8))
    assert fit.prediction_kind == "upper" and fit.meets_prediction(0.1) is False
    assert fit_exponent(records([32, 64, 128], [1, 1, 1]), "circle", "aniso").meets_prediction() is True


def test_parse_number():
    assert parse_number("1/28") == Fraction(1, 28)
    assert parse_number("64") == 64
    assert parse_number("1e-3") == 1e-3
    assert parse_number("0.5") == Fraction(1, 2)


def test_empty_sweep():
    assert run_sweep(ExperimentConfig(beta_values=(), R_values=(32, 64))) == []


def test_sweep_is_deterministic_at_beta_zero():
    cfg = ExperimentConfig(beta_values=(Fraction(0),), R_values=(8, 16, 32), solver="lanczos")
    a, b = run_sweep(cfg), run_sweep(cfg)
    assert [r.R for r in a] == [8, 16, 32]
    for x, y in zip(a, b):
        assert abs(x.norm - y.norm) <= 1e-9 * x.norm


def test_sweep_isolates_cell_failures():
    cfg = ExperimentConfig(beta_values=(Fraction(1, 8),), R_values=(8, 16), method="poisson",
                           surface="parabola2d")
    recs = run_sweep(cfg)
    assert all(not r.ok and "ValueError" in r.error for r in recs)


def test_csv_round_trip(tmp_path):
    recs = [ScalingRecord(Fraction(1, 28), 64, "gram", 13.047582393273164, 3, 0.5),
            ScalingRecord(Fraction(1, 28), 128, "gram", None, None, 0.1, error="CapExceeded: x")]
    path = tmp_path / "out.csv"
    write_records_csv(recs, path)
    back = read_records_csv(path)
    assert back[0].beta == Fraction(1, 28) and back[0].norm == recs[0].norm and back[0].count == 3
    assert back[1].error == "CapExceeded: x" and back[1].norm is None
    cfg = ExperimentConfig(beta_values=(Fraction(1, 28),), R_values=(64, 128))
    side = write_sidecar(cfg, path)
    assert side.name == "out.csv.json" and "1/28" in side.read_text()


def test_config_file(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[experiment]\nsurface = parabola\nlattice_family = square\n"
                    "beta_values = 1/8, 1/4 ; comment\nR_values = 16, 81\nwith_count = yes\n")
    cfg = ExperimentConfig.from_file(path)
    assert cfg.surface == "parabola2d" and cfg.beta_values == (Fraction(1, 8), Fraction(1, 4))
    assert cfg.R_values == (16, 81) and cfg.with_count is True
    path.write_text("[experiment]\nbogus = 1\n")
    with pytest.raises(ValueError):
        ExperimentConfig.from_file(path)


@pytest.mark.parametrize("kwargs", [dict(R_values=(64, 32)), dict(R_values=(1,)),
                                    dict(beta_values=(Fraction(3, 2),)), dict(method="fft"),
                                    dict(lattice_family="hex"), dict(surface="torus"), dict(tol=0)])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        ExperimentConfig(**kwargs)


def test_identity_check_single_point():
    out = identity_check(Fraction(0), 8, X=np.zeros((1, 2)))
    assert out["M_squared"] == pytest.approx(2 * math.pi)
    assert out["ratio"] == pytest.approx(2 * math.pi / (8 * out["max_count"]))
    with pytest.raises(ValueError):
        identity_check(0, 8, surface="parabola")


def test_square_regime_R():
    assert square_regime_R(Fraction(1, 2), [16, 64, 81, 100, 256]) == [16, 81, 256]
