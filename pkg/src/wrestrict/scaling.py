"""Sweeps over (beta, R), log-log exponent fits and the norm/count ratio.

Config files are INI with a single ``[experiment]`` section::

    [experiment]
    surface = circle            ; circle | parabola2d | sphere3d
    lattice_family = aniso      ; aniso | square
    beta_values = 0, 1/28, 1/8  ; fractions or decimals
    R_values = 32, 64, 128
    method = gram               ; gram | svd | poisson
    solver = power              ; power | lanczos
    tol = 1e-9
    max_iter = 20000
    with_count = false
    n_jobs = 1
    seed = 0
    output = results.csv
"""
from __future__ import annotations

import configparser
import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .conics import NeighborhoodSpec, SurfaceSpec
from .counting import max_count_over_translations
from .extension import SurfaceKernel, gram_norm, poisson_upper_bound, svd_discretized_norm
from .lattice import DiagonalLattice, enumerate_in_box, point_count_estimate, scale_power, weight_set

NORM_METHODS = ("gram", "svd", "poisson")
LATTICE_FAMILIES = ("aniso", "square")
CSV_FIELDS = ("beta", "R", "method", "norm", "count", "runtime_s", "error")
SURFACE_ALIASES = {"parabola": "parabola2d", "sphere3": "sphere3d", "sphere": "sphere3d"}

DEFAULT_BETAS = {"aniso": (Fraction(0), Fraction(1, 28), Fraction(1, 16), Fraction(1, 8)),
                 "square": (Fraction(1, 8), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4),
                            Fraction(7, 8))}


def surface_kind(name: str) -> str:
    return SURFACE_ALIASES.get(name, name)


def parse_number(text: str):
    """``"1/28"`` -> Fraction, ``"0.125"`` -> Fraction, ``"1e-9"`` -> float."""
    text = text.strip()
    if "e" in text.lower():
        return float(text)
    return Fraction(text)


def _parse_list(text: str) -> tuple:
    return tuple(parse_number(t) for t in text.replace(";", ",").split(",") if t.strip())


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x)  # "1/28", or "32" when integral
    if isinstance(x, float):
        return repr(x)
    return str(x)


@dataclass(frozen=True)
class ExperimentConfig:
    surface: str = "circle"
    lattice_family: str = "aniso"
    beta_values: tuple = ()
    R_values: tuple = ()
    method: str = "gram"
    solver: str = "power"
    tol: float = 1e-9
    max_iter: int = 20000
    with_count: bool = False
    n_jobs: int = 1
    seed: int = 0
    output: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "surface", surface_kind(self.surface))
        SurfaceSpec(self.surface)
        if self.lattice_family not in LATTICE_FAMILIES:
            raise ValueError(f"lattice_family must be one of {LATTICE_FAMILIES}")
        if self.method not in NORM_METHODS:
            raise ValueError(f"method must be one of {NORM_METHODS}")
        if any(not 0 <= b < 1 for b in self.beta_values):
            raise ValueError("beta values must lie in [0, 1)")
        R = list(self.R_values)
        if any(r < 2 for r in R):
            raise ValueError("R values must be >= 2")
        if any(b <= a for a, b in zip(R, R[1:])):
            raise ValueError("R values must be strictly ascending")
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        with open(path) as fh:
            parser.read_file(fh)
        if "experiment" not in parser:
            raise ValueError(f"{path}: missing [experiment] section")
        # configparser lowercases keys; match fields case-insensitively
        fields = {name.lower(): name for name in cls.__dataclass_fields__}
        unknown = set(parser["experiment"]) - set(fields)
        if unknown:
            raise ValueError(f"{path}: unknown keys {sorted(unknown)}")
        sec = {fields[k]: v.strip() for k, v in parser["experiment"].items()}
        kwargs = {}
        for key in ("surface", "lattice_family", "method", "solver", "output"):
            if key in sec:
                kwargs[key] = sec[key]
        for key in ("beta_values", "R_values"):
            if key in sec:
                kwargs[key] = _parse_list(sec[key])
        if "tol" in sec:
            kwargs["tol"] = float(sec["tol"])
        for key in ("max_iter", "n_jobs", "seed"):
            if key in sec:
                kwargs[key] = int(sec[key])
        if "with_count" in sec:
            flag = sec["with_count"].lower()
            if flag not in parser.BOOLEAN_STATES:
                raise ValueError(f"{path}: with_count must be a boolean")
            kwargs["with_count"] = parser.BOOLEAN_STATES[flag]
        return cls(**kwargs)

    def to_json(self) -> dict:
        out = asdict(self)
        out["beta_values"] = [_fmt(b) for b in self.beta_values]
        out["R_values"] = [_fmt(r) for r in self.R_values]
        return out


@dataclass
class ScalingRecord:
    beta: object
    R: object
    method: str
    norm: float | None
    count: int | None = None
    runtime_s: float = 0.0
    error: str | None = None
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.error is None and not (self.norm is not None and self.norm > 0):
            raise ValueError("a successful record needs a positive norm")

    @property
    def ok(self) -> bool:
        return self.error is None


def dual_circle_count(beta, R, family: str = "aniso", grid_steps: int | None = None):
    """Max over translations of dual-lattice points within ``1/R`` of a unit circle."""
    L = DiagonalLattice.anisotropic(R, beta) if family == "aniso" else DiagonalLattice.square(R, beta)
    width = 1.0 / float(R)
    spec = NeighborhoodSpec.isotropic(1, width)
    return max_count_over_translations(L.dual(), spec, grid_steps=grid_steps)


def _norm_for(config: ExperimentConfig, beta, R, X, lattice):
    if config.method == "gram":
        return gram_norm(X, SurfaceKernel(config.surface), tol=config.tol, max_iter=config.max_iter,
                         solver=config.solver, seed=config.seed)
    if config.method == "svd":
        return svd_discretized_norm(X, config.surface, tol=config.tol, max_iter=config.max_iter,
                                    solver=config.solver, seed=config.seed)
    return poisson_upper_bound(lattice, config.surface, float(R))


def run_cell(config: ExperimentConfig, beta, R) -> ScalingRecord:
    t0 = time.perf_counter()
    d = SurfaceSpec(config.surface).dimension
    try:
        lattice, box = weight_set(R, beta, config.lattice_family, d)
        X = enumerate_in_box(lattice, box)
        est = _norm_for(config, beta, R, X, lattice)
        count = None
        if config.with_count:
            count = dual_circle_count(beta, R, config.lattice_family).count
        details = {"n_points": len(X), "converged": est.converged, "iterations": est.iterations}
        return ScalingRecord(beta, R, config.method, est.value, count,
                             time.perf_counter() - t0, details=details)
    except Exception as exc:  # per-cell failure is data, the sweep continues
        return ScalingRecord(beta, R, config.method, None, None, time.perf_counter() - t0,
                             error=f"{type(exc).__name__}: {exc}")


def _run_cell_args(args):
    return run_cell(*args)


def run_sweep(config: ExperimentConfig) -> list[ScalingRecord]:
    """One record per (beta, R) cell, ordered by (beta, R) whatever the pool does."""
    cells = sorted(((b, r) for b in config.beta_values for r in config.R_values),
                   key=lambda c: (float(c[0]), float(c[1])))
    if config.n_jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=config.n_jobs) as pool:
            records = list(pool.map(_run_cell_args, [(config, b, r) for b, r in cells]))
    else:
        records = [run_cell(config, b, r) for b, r in cells]
    return records


@dataclass
class ExponentFit:
    slope: float
    intercept: float
    r_squared: float
    predicted_slope: float | None = None
    prediction_kind: str | None = None
    prediction_source: str | None = None

    def __post_init__(self):
        if not 0.0 <= self.r_squared <= 1.0:
            raise ValueError("r_squared must lie in [0, 1]")

    def meets_prediction(self, slack: float = 0.1) -> bool | None:
        """Direction-aware comparison against the predicted slope."""
        if self.predicted_slope is None:
            return None
        if self.prediction_kind == "upper":
            return self.slope <= self.predicted_slope + slack
        if self.prediction_kind == "lower":
            return self.slope >= self.predicted_slope - slack
        return abs(self.slope - self.predicted_slope) <= slack

    def to_json(self) -> dict:
        return asdict(self)


def predicted_slope(surface: str, family: str, beta) -> tuple[float, str, str] | None:
    """``(slope, kind, source)`` where kind is ``upper``, ``lower`` or ``equal``."""
    surface = surface_kind(surface)
    b = float(beta)
    if family == "square" and 0.75 <= b < 1:
        return 0.0, "equal", "plateau: the lattice is sparse enough that M stays bounded"
    if surface == "circle" and family == "aniso":
        return 0.5 - 1.5 * b, "upper", "circle upper bound on the anisotropic lattice, beta <= 1/28"
    if surface == "parabola2d" and family == "aniso":
        return 0.5 - b, "lower", "parabola lower bound on the anisotropic lattice"
    if surface == "circle" and family == "square":
        return 0.5 - b, "upper", "circle upper bound on the square lattice, small beta"
    if surface == "parabola2d" and family == "square":
        return 0.5 - 0.75 * b, "lower", "parabola lower bound on the square lattice, R^(beta/2) integral"
    return None


def _ols_loglog(R: np.ndarray, norms: np.ndarray) -> tuple[float, float, float]:
    x, y = np.log(R), np.log(norms)
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    scale = max(1.0, float(np.abs(y).max())) ** 2 * len(y)
    if ss_tot <= 1e-24 * scale:
        r2 = 1.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    if abs(slope) < 1e-13:
        slope = 0.0
    return float(slope), float(intercept), r2


class PowerLawFit(BaseEstimator, RegressorMixin):
    """``norm ~ exp(intercept) * R ** slope`` by least squares on logs.

    ``fit(R, norms)`` with ``R`` of shape (n,) or (n, 1).
    """

    def fit(self, X, y):
        X, y = check_X_y(np.asarray(X, dtype=float).reshape(len(X), -1), y, y_numeric=True)
        if X.shape[1] != 1:
            raise ValueError("PowerLawFit takes a single column of R values")
        if np.any(X <= 0) or np.any(y <= 0):
            raise ValueError("R and norms must be positive")
        if len(np.unique(X[:, 0])) < 3:
            raise ValueError("need at least 3 distinct R values")
        self.slope_, self.intercept_, self.r_squared_ = _ols_loglog(X[:, 0], y)
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "slope_")
        X = check_array(np.asarray(X, dtype=float).reshape(len(X), -1))
        return np.exp(self.intercept_) * X[:, 0] ** self.slope_


def fit_exponent(records: Sequence[ScalingRecord], surface: str | None = None,
                 family: str | None = None, beta=None) -> ExponentFit:
    """OLS slope of ``log norm`` on ``log R`` for records sharing one beta."""
    ok = [r for r in records if r.ok]
    betas = {Fraction(r.beta) if not isinstance(r.beta, float) else r.beta for r in ok}
    if len(betas) > 1:
        raise ValueError("fit_exponent expects records for a single beta")
    if len({float(r.R) for r in ok}) < 3:
        raise ValueError("need at least 3 successful records at distinct R")
    model = PowerLawFit().fit(np.array([float(r.R) for r in ok]), np.array([r.norm for r in ok]))
    pred = None
    if surface is not None and family is not None:
        b = beta if beta is not None else next(iter(betas))
        pred = predicted_slope(surface, family, b)
    fit = ExponentFit(model.slope_, model.intercept_, model.r_squared_)
    if pred is not None:
        fit.predicted_slope, fit.prediction_kind, fit.prediction_source = pred
    return fit


def identity_check(beta, R, surface: str = "circle", solver: str = "power", tol: float = 1e-9,
                   X=None, grid_steps: int | None = None) -> dict:
    """``rho = M^2 / (R^(1 - 3 beta) * max_count)`` on the anisotropic lattice.

    ``max_count`` is the largest number of dual-lattice points within
    ``1/R`` (box-thickened) of a translated unit circle.
    """
    if surface_kind(surface) != "circle":
        raise ValueError("identity_check is defined for the circle")
    if X is None:
        lattice, box = weight_set(R, beta, "aniso")
        X = enumerate_in_box(lattice, box)
    est = gram_norm(X, SurfaceKernel("circle"), tol=tol, solver=solver)
    count = dual_circle_count(beta, R, grid_steps=grid_steps)
    scale = float(R) ** (1 - 3 * float(beta))
    M2 = est.value ** 2
    return {"beta": _fmt(beta), "R": float(R), "M": est.value, "M_squared": M2, "scale": scale,
            "max_count": count.count, "ratio": M2 / (scale * count.count),
            "translation": [float(t) for t in count.translation],
            "grid_pitch": count.details.get("grid_pitch"), "converged": est.converged}


def write_records_csv(records: Sequence[ScalingRecord], path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_FIELDS)
        for r in records:
            writer.writerow([_fmt(r.beta), _fmt(r.R), r.method,
                             "" if r.norm is None else repr(float(r.norm)),
                             "" if r.count is None else r.count, repr(float(r.runtime_s)),
                             r.error or ""])


def read_records_csv(path) -> list[ScalingRecord]:
    out = []
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_FIELDS[:-1]) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            out.append(ScalingRecord(
                beta=parse_number(row["beta"]), R=parse_number(row["R"]), method=row["method"],
                norm=float(row["norm"]) if row["norm"] else None,
                count=int(row["count"]) if row["count"] else None,
                runtime_s=float(row["runtime_s"]), error=row.get("error") or None))
    return out


def write_sidecar(config: ExperimentConfig, path, extra: dict | None = None) -> Path:
    path = Path(path)
    side = path.with_suffix(path.suffix + ".json")
    payload = {"config": config.to_json()}
    if extra:
        payload.update(extra)
    side.write_text(json.dumps(payload, indent=2, default=str))
    return side


def records_to_json(records: Sequence[ScalingRecord]) -> list[dict]:
    return [{"beta": _fmt(r.beta), "R": _fmt(r.R), "method": r.method, "norm": r.norm,
             "count": r.count, "runtime_s": r.runtime_s, "error": r.error} for r in records]


def square_regime_R(beta, candidates: Sequence[int]) -> list[int]:
    """Those R whose ``R^(beta/2)`` is an integer (float-snapped)."""
    out = []
    for R in candidates:
        v = scale_power(R, float(beta) / 2)
        if abs(v - round(v)) < 1e-9:
            out.append(R)
    return out


def cell_size(beta, R, family: str = "aniso", d: int = 2) -> float:
    lattice, box = weight_set(R, beta, family, d)
    return point_count_estimate(lattice, box)


__all__ = [
    "CSV_FIELDS", "DEFAULT_BETAS", "ExperimentConfig", "ExponentFit", "PowerLawFit", "ScalingRecord",
    "cell_size", "dual_circle_count", "fit_exponent", "identity_check", "parse_number",
    "predicted_slope", "read_records_csv", "records_to_json", "run_cell", "run_sweep",
    "square_regime_R", "write_records_csv", "write_sidecar",
]
