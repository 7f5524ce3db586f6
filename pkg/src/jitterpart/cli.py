"""Command-line front end: discrepancy evaluation, solver, sweep, MC oracle.

Each command prints one JSON record ``{command, params, value, error,
extra}`` on stdout.  Exit codes: 0 success, 1 usage error, 2 numerical
quality failure, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .discrepancy import WrongAreaError, expected_l2sq, expected_l2sq_reformulated
from .mc_oracle import estimate_expected_l2sq
from .regions import Region, RegionError, make_half_plane, make_polyline, make_quarter_disk, unpartitioned
from .solver import SolverConfig, SymmetrizedCurve, argmin_row, solve_for_p, sweep

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_SOLVER = 3


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def write_curve_file(path: Path, curve: SymmetrizedCurve, p: float, n_rows: int = 1001) -> None:
    """Header with the curve parameters, then n_rows of x,g_sym(x)."""
    coeffs = ",".join(_fmt(c) for c in curve.coefficients)
    lines = [
        f"# p={_fmt(p)} alpha={_fmt(curve.alpha)} x0={_fmt(curve.x0)}"
        f" x_max={_fmt(curve.x_max)} y_max={_fmt(curve.y_max)} coeffs={coeffs}",
        "x,g_sym",
    ]
    xs = np.linspace(0.0, curve.alpha, n_rows)
    ys = curve.evaluate(xs)
    lines.extend(f"{_fmt(x)},{_fmt(y)}" for x, y in zip(xs, ys))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_curve_file(path: Path) -> tuple[SymmetrizedCurve, float]:
    try:
        header = path.read_text(encoding="utf-8").splitlines()[0]
    except (OSError, IndexError) as exc:
        raise UsageError(f"cannot read curve file {path}: {exc}") from exc
    if not header.startswith("# "):
        raise UsageError(f"curve file {path} has no parameter header")
    fields = {}
    for token in header[2:].split():
        key, _, value = token.partition("=")
        fields[key] = value
    try:
        coeffs = np.array([float(v) for v in fields["coeffs"].split(",")])
        curve = SymmetrizedCurve(
            coeffs, float(fields["alpha"]), float(fields["x0"]),
            float(fields["x_max"]), float(fields["y_max"]),
        )
        return curve, float(fields["p"])
    except (KeyError, ValueError) as exc:
        raise UsageError(f"malformed curve file header in {path}: {exc}") from exc


def parse_region_spec(spec: str) -> Region:
    """Grammar: uniform | halfplane:a,b,c | quarterdisk:r |
    polyline:x0,y0;x1,y1;... | curvefile:PATH."""
    kind, _, rest = spec.partition(":")
    try:
        if kind == "uniform" and not rest:
            return unpartitioned()
        if kind == "halfplane":
            a, b, c = (float(v) for v in rest.split(","))
            return make_half_plane(a, b, c)
        if kind == "quarterdisk":
            return make_quarter_disk(float(rest))
        if kind == "polyline":
            vertices = []
            for chunk in rest.split(";"):
                x, y = (float(v) for v in chunk.split(","))
                vertices.append((x, y))
            return make_polyline(vertices)
        if kind == "curvefile":
            curve, _ = read_curve_file(Path(rest))
            return curve.region()
    except UsageError:
        raise
    except (ValueError, RegionError) as exc:
        raise UsageError(f"invalid region spec {spec!r}: {exc}") from exc
    raise UsageError(f"unknown region spec {spec!r}")


def _emit(record: dict) -> None:
    print(json.dumps(record))


def _cmd_eval(args) -> int:
    try:
        region = parse_region_spec(args.region)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.route == "reformulated":
            result = expected_l2sq_reformulated(region, args.tol)
        else:
            result = expected_l2sq(region, args.tol)
    except WrongAreaError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    _emit({
        "command": "eval",
        "params": {"region": args.region, "tol": args.tol, "route": args.route},
        "value": result.value,
        "error": result.error_estimate,
        "extra": {
            "converged": result.converged,
            "area": region.area,
            "provenance": {"route": result.route, "tolerances": {"quad": args.tol},
                           "seed": None, "version": __version__},
        },
    })
    return EXIT_OK if result.converged else EXIT_NUMERICAL


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        degree=args.degree,
        n_nodes=args.n_nodes,
        constraint_weight=args.constraint_weight,
        gn_max_iter=args.gn_max_iter,
        gn_step_tol=args.gn_step_tol,
        area_tol=args.area_tol,
        quad_tol_residual=args.quad_tol_residual,
        quad_tol_disc=args.quad_tol_disc,
        clamp_window=args.clamp_window,
        area_on_raw_polynomial=args.area_on_raw_poly,
    )


def _outcome_extra(outcome, cfg: SolverConfig) -> dict:
    curve = outcome.curve
    return {
        "p_target": outcome.p_target,
        "p_achieved": outcome.p_achieved,
        "alpha": outcome.alpha,
        "x0": curve.x0 if curve else None,
        "x_max": curve.x_max if curve else None,
        "y_max": curve.y_max if curve else None,
        "clamp_applied": bool(curve and curve.x_max > 0.0),
        "residual_rms": outcome.residual_rms,
        "iterations": outcome.iterations,
        "converged": outcome.converged,
        "message": outcome.message,
        "coefficients": list(curve.coefficients) if curve else None,
        "provenance": {
            "route": "general",
            "tolerances": {
                "area": cfg.area_tol,
                "quad_residual": cfg.quad_tol_residual,
                "quad_discrepancy": cfg.quad_tol_disc,
            },
            "seed": None,
            "version": __version__,
        },
    }


def _cmd_solve(args) -> int:
    try:
        cfg = _solver_config(args)
        outcome = solve_for_p(args.p, cfg)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    extra = _outcome_extra(outcome, cfg)
    if outcome.converged and outcome.curve is not None:
        out_path = Path(args.out) if args.out else Path(f"curve_p{args.p:g}.csv")
        write_curve_file(out_path, outcome.curve, outcome.p_achieved)
        extra["curve_file"] = str(out_path)
    _emit({
        "command": "solve",
        "params": {"p": args.p},
        "value": outcome.discrepancy.value if outcome.discrepancy else None,
        "error": outcome.discrepancy.error_estimate if outcome.discrepancy else None,
        "extra": extra,
    })
    return EXIT_OK if outcome.converged else EXIT_SOLVER


def _cmd_sweep(args) -> int:
    if args.p_list:
        try:
            p_values = [float(v) for v in args.p_list.split(",")]
        except ValueError:
            print(f"invalid --p-list {args.p_list!r}", file=sys.stderr)
            return EXIT_USAGE
    elif args.p_min is not None and args.p_max is not None and args.step:
        p_values = list(np.arange(args.p_min, args.p_max + 0.5 * args.step, args.step))
    else:
        print("need --p-list or --p-min/--p-max/--step", file=sys.stderr)
        return EXIT_USAGE
    cfg = _solver_config(args)
    rows = sweep(p_values, cfg)
    out_path = Path(args.out) if args.out else Path("sweep.csv")
    lines = ["p,discrepancy,residual_rms,converged"]
    for row in rows:
        disc = row.discrepancy.value if row.discrepancy else float("nan")
        lines.append(f"{_fmt(row.p_target)},{_fmt(disc)},{_fmt(row.residual_rms)},{row.converged}")
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    best = argmin_row(rows)
    _emit({
        "command": "sweep",
        "params": {"p_values": p_values},
        "value": best.discrepancy.value if best else None,
        "error": best.discrepancy.error_estimate if best else None,
        "extra": {
            "argmin_p": best.p_target if best else None,
            "csv": str(out_path),
            "rows": [
                {"p": r.p_target,
                 "discrepancy": r.discrepancy.value if r.discrepancy else None,
                 "residual_rms": r.residual_rms if r.residual_rms == r.residual_rms else None,
                 "converged": r.converged,
                 "message": r.message}
                for r in rows
            ],
            "provenance": {"route": "general",
                           "tolerances": {"area": cfg.area_tol,
                                          "quad_discrepancy": cfg.quad_tol_disc},
                           "seed": None, "version": __version__},
        },
    })
    return EXIT_OK if any(r.converged for r in rows) else EXIT_SOLVER


def _cmd_oracle(args) -> int:
    try:
        region = parse_region_spec(args.region)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    quad = expected_l2sq(region, args.tol)
    est = estimate_expected_l2sq(region, args.samples, args.seed, args.shards)
    gap = abs(est.mean - quad.value)
    sigma = gap / est.std_error if est.std_error > 0 else float("inf")
    verdict = "AGREE" if sigma <= 3.0 else ("MARGINAL" if sigma <= 5.0 else "DISAGREE")
    _emit({
        "command": "oracle",
        "params": {"region": args.region, "samples": args.samples,
                   "seed": args.seed, "shards": args.shards},
        "value": est.mean,
        "error": est.std_error,
        "extra": {
            "quadrature_value": quad.value,
            "quadrature_error": quad.error_estimate,
            "z_score": sigma,
            "verdict": verdict,
            "provenance": {"route": "closed_form_sample",
                           "tolerances": {"quad": args.tol},
                           "seed": args.seed, "version": __version__},
        },
    })
    if verdict == "DISAGREE":
        return EXIT_NUMERICAL
    if not quad.converged:
        return EXIT_NUMERICAL
    return EXIT_OK


def _add_solver_flags(parser) -> None:
    parser.add_argument("--degree", type=int, default=10)
    parser.add_argument("--n-nodes", type=int, default=200)
    parser.add_argument("--constraint-weight", type=float, default=1e3)
    parser.add_argument("--gn-max-iter", type=int, default=100)
    parser.add_argument("--gn-step-tol", type=float, default=1e-10)
    parser.add_argument("--area-tol", type=float, default=1e-6)
    parser.add_argument("--quad-tol-residual", type=float, default=1e-9)
    parser.add_argument("--quad-tol-disc", type=float, default=1e-6)
    parser.add_argument("--clamp-window", type=float, default=0.1)
    parser.add_argument("--area-on-raw-poly", action="store_true",
                        help="bisect the raw polynomial's area instead of the symmetrized curve's")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="jitterpart",
                     description="Expected squared L2 discrepancy of two-point jittered sampling")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_eval = sub.add_parser("eval", help="evaluate the expected discrepancy of a region")
    p_eval.add_argument("region", help="uniform | halfplane:a,b,c | quarterdisk:r | "
                                       "polyline:x0,y0;x1,y1;... | curvefile:PATH")
    p_eval.add_argument("--tol", type=float, default=1e-6)
    p_eval.add_argument("--route", choices=["general", "reformulated"], default="general")
    p_eval.set_defaults(func=_cmd_eval)

    p_solve = sub.add_parser("solve", help="solve for the optimal curve at an area split")
    p_solve.add_argument("--p", type=float, required=True)
    p_solve.add_argument("--out", default=None, help="curve CSV path (default curve_p<p>.csv)")
    _add_solver_flags(p_solve)
    p_solve.set_defaults(func=_cmd_solve)

    p_sweep = sub.add_parser("sweep", help="solve over a grid of area splits")
    p_sweep.add_argument("--p-list", default=None)
    p_sweep.add_argument("--p-min", type=float, default=None)
    p_sweep.add_argument("--p-max", type=float, default=None)
    p_sweep.add_argument("--step", type=float, default=None)
    p_sweep.add_argument("--out", default=None, help="sweep CSV path (default sweep.csv)")
    _add_solver_flags(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_oracle = sub.add_parser("oracle", help="Monte Carlo check of a region's discrepancy")
    p_oracle.add_argument("region")
    p_oracle.add_argument("--samples", type=int, default=1_000_000)
    p_oracle.add_argument("--seed", type=int, default=0)
    p_oracle.add_argument("--shards", type=int, default=1)
    p_oracle.add_argument("--tol", type=float, default=1e-6)
    p_oracle.set_defaults(func=_cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
