"""Command-line entry point: ``wrestrict <subcommand> ...``.

Exit status is 0 on success, 2 when a sweep finished with failed cells and
1 on any fatal error.
"""
from __future__ import annotations

import argparse
import json
import sys
from collections import defaultdict
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import finite_field, incidence, scaling
from .conics import NeighborhoodSpec, Quadric
from .counting import count_in_neighborhood, max_count_over_translations
from .curve_detect import detect_common_quadric
from .extension import SurfaceKernel, gram_norm, poisson_upper_bound, svd_discretized_norm
from .lattice import DiagonalLattice, enumerate_in_box, weight_set

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2


def _num(text: str):
    return scaling.parse_number(text)


def _vec(text: str) -> tuple:
    return tuple(_num(t) for t in text.split(",") if t.strip())


def _emit(payload, out: str | None = None) -> None:
    text = json.dumps(payload, indent=2, default=_default)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _default(x):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    return str(x)


def _load_points(path: str) -> list:
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        data = data["points"]
    return data


def cmd_norm(args) -> int:
    surface = scaling.surface_kind(args.surface)
    d = 3 if surface == "sphere3d" else 2
    if args.lattice == "custom":
        if not args.points:
            raise ValueError("--lattice custom needs --points FILE")
        X = np.asarray(_load_points(args.points), dtype=float)
        lattice = None
    else:
        lattice, box = weight_set(args.R, args.beta, args.lattice, d)
        X = enumerate_in_box(lattice, box)
    if args.method == "gram":
        est = gram_norm(X, SurfaceKernel(surface), tol=args.tol, max_iter=args.max_iter,
                        solver=args.solver, seed=args.seed)
    elif args.method == "svd":
        est = svd_discretized_norm(X, surface, n_nodes=args.n_nodes, tol=args.tol,
                                   max_iter=args.max_iter, solver=args.solver, seed=args.seed)
    else:
        if lattice is None:
            raise ValueError("the poisson method needs a lattice family, not custom points")
        est = poisson_upper_bound(lattice, surface, float(args.R))
    payload = {"surface": surface, "lattice": args.lattice, "R": args.R, "beta": args.beta,
               "n_points": len(X), **est.to_json()}
    if args.out and args.out.endswith(".csv"):
        rec = scaling.ScalingRecord(args.beta, args.R, args.method, est.value,
                                    runtime_s=est.details.get("runtime_s", 0.0))
        scaling.write_records_csv([rec], args.out)
    else:
        _emit(payload, args.out)
    return EXIT_OK


def _count_lattice(args) -> DiagonalLattice:
    if args.scales:
        return DiagonalLattice(_vec(args.scales))
    if args.lattice == "integer":
        return DiagonalLattice.integer(len(_vec(args.axes)))
    L = {"aniso": DiagonalLattice.anisotropic, "square": DiagonalLattice.square}[args.lattice]
    lat = L(args.R, args.beta, len(_vec(args.axes)))
    return lat.dual() if args.dual else lat


def cmd_count(args) -> int:
    lattice = _count_lattice(args)
    axes = _vec(args.axes)
    translation = _vec(args.translation) if args.translation else (0,) * len(axes)
    spec = NeighborhoodSpec(axes, translation, _vec(args.thickness))
    if args.maximize:
        res = max_count_over_translations(lattice, spec, grid_steps=args.grid_steps)
    else:
        res = count_in_neighborhood(lattice, spec)
    _emit(res.to_json(), args.out)
    return EXIT_OK


def cmd_detect(args) -> int:
    raw = json.loads(Path(args.points).read_text())
    points = raw["points"] if isinstance(raw, dict) else raw
    target = args.target or (raw.get("target") if isinstance(raw, dict) else None)
    if target is None:
        raise ValueError("target coefficients needed (--target or 'target' in the input)")
    coeffs = _vec(target) if isinstance(target, str) else tuple(Fraction(str(c)) for c in target)
    tol = args.tolerance
    if tol is None:
        tol = float(raw.get("tolerance", 1e-6)) if isinstance(raw, dict) else 1e-6
    cert = detect_common_quadric([tuple(int(x) for x in p) for p in points], Quadric(coeffs), tol,
                                 C1=args.C1)
    _emit(cert.to_json(), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = scaling.ExperimentConfig.from_file(args.config)
    out = args.out or config.output
    if out:
        # fail fast on an unwritable destination, before any compute
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).touch()
    records = scaling.run_sweep(config)
    if out:
        scaling.write_records_csv(records, out)
        scaling.write_sidecar(config, out, {"records": scaling.records_to_json(records)})
    else:
        _emit(scaling.records_to_json(records))
    failed = [r for r in records if not r.ok]
    for r in failed:
        print(f"cell beta={r.beta} R={r.R} failed: {r.error}", file=sys.stderr)
    return EXIT_PARTIAL if failed else EXIT_OK


def cmd_fit(args) -> int:
    records = scaling.read_records_csv(args.input)
    groups = defaultdict(list)
    for r in records:
        if r.ok:
            groups[r.beta].append(r)
    fits = []
    for beta in sorted(groups, key=float):
        entry = {"beta": scaling._fmt(beta), "n_records": len(groups[beta])}
        try:
            fit = scaling.fit_exponent(groups[beta], args.surface, args.lattice, beta)
            entry.update(fit.to_json())
            entry["meets_prediction"] = fit.meets_prediction(args.slack)
        except ValueError as exc:
            entry["error"] = str(exc)
        fits.append(entry)
    _emit({"fits": fits}, args.out)
    return EXIT_PARTIAL if any("error" in f for f in fits) else EXIT_OK


def cmd_identity(args) -> int:
    _emit(scaling.identity_check(args.beta, args.R, solver=args.solver, tol=args.tol), args.out)
    return EXIT_OK


def cmd_ffield(args) -> int:
    _emit(finite_field.ffield_report(args.p, args.variety, args.census_exponent), args.out)
    return EXIT_OK


def cmd_incidence(args) -> int:
    grid = None
    if args.grid:
        nx, ny = args.grid.lower().split("x")
        grid = (int(nx), int(ny))
    _emit(incidence.incidence_report(args.R, grid, args.k), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wrestrict", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm", help="restriction norm on a lattice weight set")
    p.add_argument("--surface", choices=["circle", "parabola", "sphere3"], default="circle")
    p.add_argument("--lattice", choices=["aniso", "square", "custom"], default="aniso")
    p.add_argument("--R", type=_num, default=32)
    p.add_argument("--beta", type=_num, default=Fraction(0))
    p.add_argument("--method", choices=["gram", "svd", "poisson"], default="gram")
    p.add_argument("--solver", choices=["power", "lanczos"], default="power")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int, default=20000)
    p.add_argument("--n-nodes", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--points", help="JSON list of points for --lattice custom")
    p.add_argument("--out", help="output file; .csv writes a record, anything else JSON")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("count", help="lattice points in a thin ellipse neighbourhood")
    p.add_argument("--lattice", choices=["integer", "aniso", "square"], default="integer")
    p.add_argument("--scales", help="explicit lattice scales, e.g. 1,1/2")
    p.add_argument("--R", type=_num, default=32)
    p.add_argument("--beta", type=_num, default=Fraction(0))
    p.add_argument("--dual", action="store_true", help="use the dual of the chosen lattice")
    p.add_argument("--axes", required=True, help="semi-axes, e.g. 5,5")
    p.add_argument("--translation")
    p.add_argument("--thickness", required=True)
    p.add_argument("--maximize", action="store_true", help="maximise over translations")
    p.add_argument("--grid-steps", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("detect", help="certify a common quadric through integer points")
    p.add_argument("--points", required=True, help="JSON: list of points or {points, target, tolerance}")
    p.add_argument("--target", help="coefficients (1, x, y, x^2, y^2, xy), comma separated")
    p.add_argument("--tolerance", type=float, default=None)
    p.add_argument("--C1", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("sweep", help="run an (beta, R) sweep from an INI config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="CSV path (overrides the config's output)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="log-log slopes per beta from a sweep CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--surface", default=None)
    p.add_argument("--lattice", choices=["aniso", "square"], default=None)
    p.add_argument("--slack", type=float, default=0.1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("identity", help="M^2 / (R^(1-3 beta) max count) for the circle")
    p.add_argument("--beta", type=_num, required=True)
    p.add_argument("--R", type=_num, required=True)
    p.add_argument("--solver", choices=["power", "lanczos"], default="lanczos")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out")
    p.set_defaults(func=cmd_identity)

    p = sub.add_parser("ffield", help="Fourier coefficients of conics over F_p^2")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--variety", choices=list(finite_field.VARIETIES), default="circle")
    p.add_argument("--census-exponent", type=float, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ffield)

    p = sub.add_parser("incidence", help="rich points of the parabola convolution")
    p.add_argument("--R", type=int, required=True)
    p.add_argument("--grid", help="NxM grid [0,N) x [0,M); default [-R,R] x [-R^2,R^2]")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_incidence)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print(f"wrestrict {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
