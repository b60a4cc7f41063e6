"""Command-line driver: ``klreg {verify,search,bounds,certify,reduce}``.

Exit codes: 0 success, 1 usage or input error, 2 violation found,
3 pipeline failure.  Every command prints a JSON report
``{command, parameters, results, seed, wall_time_ms, version}``.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import bounds_table
from .errors import ReductionFailed, RegularityError
from .lift import DEFAULT_TOL
from .parsing import parse_map, parse_rational_list, read_configuration
from .reduction import reduce_dimension
from .roots import MONOMIAL, TRIGONOMETRIC, IncidencePolynomial, count_roots_with_multiplicity
from .search import SEARCH_DELTA_MIN, adversarial_search, sample_verify
from .verifier import check_configuration, confluent_vandermonde_certificate

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, EXIT_FAILURE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def jsonable(obj):
    """Recursively convert to plain JSON types; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _common(p, search=False):
    p.add_argument("--map", required=True, help="map expression, e.g. moment:3")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    default_delta = SEARCH_DELTA_MIN if search else 1e-6
    p.add_argument("--delta", type=float, default=default_delta, help="minimum point separation")
    p.add_argument("--box", type=float, default=1.0, help="half-width of the parameter box")
    p.add_argument("--out", type=Path, help="also write the report here")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="klreg", description="(k,l)-regularity tools")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify", help="check a configuration file or random samples")
    _common(p)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--config", type=Path, help="configuration CSV")
    src.add_argument("--samples", type=int, default=10_000)

    p = sub.add_parser("search", help="adversarial search for a violation")
    _common(p, search=True)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--iters", type=int, default=500)

    p = sub.add_parser("bounds", help="dimension bounds")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--closed", action="store_true")
    p.add_argument("--range", action="store_true", help="grid 1..n x 0..k x 0..l")
    p.add_argument("--format", choices=("json", "table"), default="json")
    p.add_argument("--out", type=Path)

    p = sub.add_parser("certify", help="exact certificates")
    p.add_argument("--simple", help="comma separated rational nodes")
    p.add_argument("--double", help="comma separated rational double nodes")
    p.add_argument("--poly", help="comma separated coefficients")
    p.add_argument("--basis", choices=("monomial", "trig"), default="monomial")
    p.add_argument("--domain", help="closed interval lo,hi for monomial root counts")
    p.add_argument("--out", type=Path)

    p = sub.add_parser("reduce", help="reduce the target dimension by central projections")
    _common(p)
    p.set_defaults(delta=1e-3)
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--budget", type=int, default=10_000)
    p.add_argument("--retries", type=int, default=32)
    return parser


def _witness_results(spec, config, tol):
    verdict = check_configuration(spec, config, tol, delta_min=0.0, exact=False)
    return verdict.to_dict()


def cmd_verify(args):
    spec = parse_map(args.map)
    if args.config is not None:
        config = read_configuration(args.config, spec.domain.dim)
        if (config.k, config.l) != (args.k, args.l):
            raise UsageError(
                f"config has (k,l)=({config.k},{config.l}), flags say ({args.k},{args.l})"
            )
        verdict = check_configuration(spec, config, args.tol, args.delta)
        code = EXIT_OK if verdict.regular else EXIT_VIOLATION
        return code, {"mode": "config", "verdict": verdict.to_dict()}
    report = sample_verify(
        spec, args.k, args.l, args.samples, args.delta, args.seed, args.tol, args.box
    )
    results = {"mode": "samples", "report": report.to_dict(), "witness": None}
    if report.converged:
        results["witness"] = _witness_results(spec, report.best_configuration, args.tol)
        return EXIT_VIOLATION, results
    return EXIT_OK, results


def cmd_search(args):
    spec = parse_map(args.map)
    report = adversarial_search(
        spec,
        args.k,
        args.l,
        restarts=args.restarts,
        iters=args.iters,
        delta_min=args.delta,
        box=args.box,
        seed=args.seed,
        tol=args.tol,
    )
    results = {"report": report.to_dict(), "witness": None}
    if report.converged:
        results["witness"] = _witness_results(spec, report.best_configuration, args.tol)
        return EXIT_VIOLATION, results
    return EXIT_OK, results


def cmd_bounds(args):
    if args.range:
        grid = []
        for n in range(1, args.n + 1):
            for k in range(args.k + 1):
                for l in range(args.l + 1):
                    if k + l:
                        grid.append(bounds_table(n, k, l, args.closed))
        return EXIT_OK, {"grid": [r.to_dict() for r in grid]}, grid
    res = bounds_table(args.n, args.k, args.l, args.closed)
    return EXIT_OK, res.to_dict(), [res]


def _grid_text(rows) -> str:
    cols = ["n", "k", "l", "closed", "lower_count", "lower_main", "lower_closed",
            "brs_lower", "upper_main", "exact"]
    cells = [cols] + [
        ["-" if getattr(r, c) is None else str(getattr(r, c)) for c in cols] for r in rows
    ]
    widths = [max(len(row[i]) for row in cells) for i in range(len(cols))]
    return "\n".join(
        "  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells
    )


def cmd_certify(args):
    if args.poly is not None:
        if args.simple is not None or args.double is not None:
            raise UsageError("--poly cannot be combined with --simple/--double")
        coeffs = parse_rational_list(args.poly)
        if not coeffs:
            raise UsageError("--poly needs at least one coefficient")
        basis = MONOMIAL if args.basis == "monomial" else TRIGONOMETRIC
        if basis == TRIGONOMETRIC and len(coeffs) % 2 == 0:
            raise UsageError("trig coefficients are a0,a1,b1,...,ah,bh (odd count)")
        poly = IncidencePolynomial(basis, tuple(coeffs))
        domain = None
        if args.domain is not None:
            if basis != MONOMIAL:
                raise UsageError("--domain only applies to the monomial basis")
            ends = [float(t) for t in args.domain.split(",")]
            if len(ends) != 2 or ends[0] > ends[1]:
                raise UsageError("--domain must be lo,hi with lo <= hi")
            domain = tuple(ends)
        count = count_roots_with_multiplicity(poly, domain)
        bound = poly.degree if basis == MONOMIAL else 2 * poly.degree
        results = {
            "basis": basis,
            "coefficients": coeffs,
            "root_count": count,
            "bound": bound,
            "within_bound": count <= bound,
        }
        return (EXIT_OK if count <= bound else EXIT_VIOLATION), results
    if args.simple is None and args.double is None:
        raise UsageError("give --simple/--double nodes or --poly")
    simple = parse_rational_list(args.simple or "")
    double = parse_rational_list(args.double or "")
    det = confluent_vandermonde_certificate(simple, double)
    results = {
        "simple": simple,
        "double": double,
        "dimension": len(simple) + 2 * len(double) - 1,
        "determinant": det,
        "nonzero": det != 0,
    }
    return (EXIT_OK if det != 0 else EXIT_VIOLATION), results


def cmd_reduce(args):
    spec = parse_map(args.map)
    try:
        plan = reduce_dimension(
            spec,
            args.k,
            args.l,
            args.target,
            max_retries=args.retries,
            seed=args.seed,
            budget=args.budget,
            tol=args.tol,
            delta_min=args.delta,
            box=args.box,
        )
    except ReductionFailed as exc:
        return EXIT_FAILURE, {"error": str(exc), "diagnostics": exc.diagnostics}
    results = plan.to_dict()
    results["final_map"] = plan.final_spec.describe()
    return EXIT_OK, results


COMMANDS = {
    "verify": cmd_verify,
    "search": cmd_search,
    "bounds": cmd_bounds,
    "certify": cmd_certify,
    "reduce": cmd_reduce,
}


def _parameters(args) -> dict:
    skip = {"command", "out", "verbose", "format"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    start = time.perf_counter()
    text = None
    try:
        outcome = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RegularityError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ArithmeticError as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    if args.command == "bounds":
        code, results, rows = outcome
        if args.format == "table":
            text = rows[0].to_text() if len(rows) == 1 and not args.range else _grid_text(rows)
    else:
        code, results = outcome
    report = {
        "command": args.command,
        "parameters": _parameters(args),
        "results": results,
        "seed": getattr(args, "seed", 0),
        "wall_time_ms": int(round((time.perf_counter() - start) * 1000)),
        "version": __version__,
    }
    payload = json.dumps(jsonable(report), sort_keys=True, indent=2)
    print(text if text is not None else payload)
    if getattr(args, "out", None) is not None:
        try:
            args.out.write_text(payload + "\n")
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc.strerror}", file=sys.stderr)
            return EXIT_FAILURE
    return code


if __name__ == "__main__":
    sys.exit(main())
