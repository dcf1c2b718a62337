"""Command-line front end.

Exit status: 0 on success, 2 on usage errors, 3 when a numeric check or
precondition fails (including a failed verification suite).
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .errors import ParseError, TreePoissonError, UnknownSuiteError
from .kernels import coeff_matrix
from .polyharmonic import (
    PolyFunction,
    evaluate_ball,
    norm,
    orbit,
    orbit_to_csv,
    right_inverse,
)
from .spectral import (
    EigenParam,
    complex_to_json,
    gamma,
    in_l2_spectrum,
    parse_complex_literal,
    spectral_radius,
    z_from_lambda,
)
from .verify import SUITES, SuiteConfig, Tolerances, run_suite

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class CommandError(Exception):
    def __init__(self, message, code=EXIT_NUMERIC):
        super().__init__(message)
        self.code = code


def _complex_arg(text: str) -> complex:
    try:
        return parse_complex_literal(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_eigen_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--q", type=int, default=2, help="tree degree (each vertex has q+1 neighbours)")
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--z", type=_complex_arg, help="spectral parameter, e.g. 1.5+0.3i")
    g.add_argument("--lambda", dest="lam", type=_complex_arg, help="eigenvalue of P, e.g. 1.2")


def _param(args) -> EigenParam:
    if args.z is not None:
        return EigenParam.from_z(args.z, args.q)
    return EigenParam.from_lambda(args.lam, args.q)


def _read_function(path: str) -> PolyFunction:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CommandError(f"cannot read {path}: {exc.strerror}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CommandError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return PolyFunction.from_json(obj)
    except ParseError as exc:
        raise CommandError(f"{path}: {exc}") from None


def _write(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def cmd_gamma(args) -> int:
    q = args.q
    record = {"q": q, "rho": spectral_radius(q)}
    if args.z is not None:
        z = complex(args.z)
        lam = gamma(z, q)
        record.update(z=complex_to_json(z), **{"lambda": complex_to_json(lam)})
        record["in_spectrum"] = in_l2_spectrum(lam, q)
        _write(_dump(record), None)
        return EXIT_OK
    lam = complex(args.lam)
    record["lambda"] = complex_to_json(lam)
    record["in_spectrum"] = in_l2_spectrum(lam, q)
    if record["in_spectrum"]:
        record["z"] = None
        _write(_dump(record), None)
        raise CommandError(f"lambda={lam} lies in the l2 spectrum [-rho, rho], rho={record['rho']:.6g}")
    record["z"] = complex_to_json(z_from_lambda(lam, q))
    _write(_dump(record), None)
    return EXIT_OK


def cmd_eval(args) -> int:
    f = _read_function(args.input)
    _write(evaluate_ball(f, args.radius).to_csv(), args.out)
    return EXIT_OK


def cmd_orbit(args) -> int:
    f = _read_function(args.input)
    if args.operator == "heat" and args.t == 0:
        raise CommandError("the heat orbit needs t != 0", EXIT_USAGE)
    _write(orbit_to_csv(orbit(f, args.t, args.steps, args.operator)), args.out)
    return EXIT_OK


def cmd_right_inverse(args) -> int:
    h = _read_function(args.input)
    f = right_inverse(h)
    _write(json.dumps(f.to_json(), indent=2) + "\n", args.out)
    summary = {"input_order": h.order, "input_norm": norm(h), "output_order": f.order, "output_norm": norm(f)}
    stream = sys.stderr if args.out in (None, "-") else sys.stdout
    stream.write(_dump(summary))
    return EXIT_OK


def cmd_coeffs(args) -> int:
    _write(_dump(coeff_matrix(_param(args), args.order).to_json()), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    tol = Tolerances()
    overrides = {k: getattr(args, f"tol_{k}") for k in tol.__dataclass_fields__ if getattr(args, f"tol_{k}") is not None}
    cfg = SuiteConfig(seed=args.seed, radius=args.radius, tol=replace(tol, **overrides))
    if args.qs:
        cfg = replace(cfg, qs=tuple(args.qs))
    if args.zs:
        cfg = replace(cfg, zs=tuple(args.zs))
    names = list(SUITES) if args.suite == "all" else [args.suite]
    ok = True
    reports = []
    for name in names:
        try:
            report = run_suite(name, cfg)
        except UnknownSuiteError as exc:
            raise CommandError(str(exc.args[0]), EXIT_USAGE) from None
        print(report.to_table())
        reports.append(report)
        ok &= report.passed
    if args.out:
        text = reports[0].to_json() if len(reports) == 1 else "[\n" + ",\n".join(r.to_json() for r in reports) + "\n]"
        _write(text + "\n", args.out)
    return EXIT_OK if ok else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treepoisson",
        description="Poisson kernels, polyharmonic functions and heat semigroups on homogeneous trees.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gamma", help="eigenvalue map, principal branch and spectral radius")
    _add_eigen_args(p)
    p.set_defaults(func=cmd_gamma)

    p = sub.add_parser("eval", help="evaluate a polyharmonic function on a ball (CSV)")
    p.add_argument("--input", required=True, help="PolyFunction JSON file")
    p.add_argument("--radius", type=int, default=4)
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("orbit", help="norms along a heat or shifted-Laplacian orbit (CSV)")
    p.add_argument("--input", required=True)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=5)
    p.add_argument("--operator", choices=["heat", "shifted-laplacian"], default="heat")
    p.add_argument("--out")
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("right-inverse", help="norm-preserving preimage under P - lambda I (JSON)")
    p.add_argument("--input", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_right_inverse)

    p = sub.add_parser("coeffs", help="dump the coefficient matrix a[k, r]")
    _add_eigen_args(p)
    p.add_argument("--order", type=int, default=4, help="n: entries 1 <= k <= r <= n-1")
    p.add_argument("--out")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("verify", help="run a cross-validation suite")
    p.add_argument("suite", help=f"one of: {', '.join(SUITES)}, all")
    p.add_argument("--q", dest="qs", type=int, nargs="+")
    p.add_argument("--z", dest="zs", type=_complex_arg, nargs="+")
    p.add_argument("--radius", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the JSON report here")
    for name in Tolerances.__dataclass_fields__:
        p.add_argument(f"--tol-{name}", type=float, dest=f"tol_{name}")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CommandError as exc:
        print(f"treepoisson: error: {exc}", file=sys.stderr)
        return exc.code
    except (TreePoissonError, ValueError, ArithmeticError) as exc:
        print(f"treepoisson: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
