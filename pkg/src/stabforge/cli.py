"""Command-line front end.

Exit codes: 0 all checks passed, 1 at least one failed, 2 invalid
configuration, 3 runtime failure inside a pipeline.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigInvalid, StabforgeError
from .oscillatory import LGModel, circle_charge, circle_closed_form
from .reporting import emit_paths, make_record, render_report
from .scenarios import Scenario, load_scenario, run_scenario
from .slag import SLagProblem, trace_slag


def _complex_arg(text: str) -> complex:
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected 're' or 're,im', got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stabforge",
        description="construction and verification of product stability data",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario config")
    run_p.add_argument("config", help="path to a key = value config file")

    va = sub.add_parser("verify-all", help="run the full check battery")
    va.add_argument("--window", type=int, default=6, help="degree window half-width")
    va.add_argument("--tol", type=float, default=1e-9, help="relative tolerance for quadrature checks")
    va.add_argument("--seed", type=int, default=0)

    slag_p = sub.add_parser("slag", help="special Lagrangian tracing")
    slag_sub = slag_p.add_subparsers(dest="subcommand", required=True)
    trace_p = slag_sub.add_parser("trace", help="trace one curve and emit CSV")
    trace_p.add_argument("--a", type=_complex_arg, required=True, metavar="RE,IM")
    trace_p.add_argument("--c", type=_complex_arg, default=0j, metavar="RE,IM")
    trace_p.add_argument("--phi", type=float, required=True)
    trace_p.add_argument("--seed", type=_complex_arg, required=True, metavar="RE,IM")
    trace_p.add_argument("--extent", type=float, default=12.0)
    trace_p.add_argument("--out", default=".", help="directory for the CSV output")

    mirror_p = sub.add_parser("mirror", help="oscillatory-integral charges")
    mirror_sub = mirror_p.add_subparsers(dest="subcommand", required=True)
    circ = mirror_sub.add_parser("circle", help="compact-cycle charge with weight k")
    circ.add_argument("--a", type=_complex_arg, required=True, metavar="RE,IM")
    circ.add_argument("--c", type=_complex_arg, default=0j, metavar="RE,IM")
    circ.add_argument("--k", type=int, required=True)
    circ.add_argument("--radius", type=float, default=1.0)

    return parser


def _finish(records, stream) -> int:
    stream.write(render_report(records))
    return 0 if all(r.status != "fail" for r in records) else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = sys.stdout
    try:
        if args.command == "run":
            scenario = load_scenario(args.config)
            records, _ = run_scenario(scenario)
            return _finish(records, out)

        if args.command == "verify-all":
            scenario = Scenario(
                "verify-all",
                {"window": args.window, "tol.rel": args.tol, "seed": args.seed},
            )
            records, _ = run_scenario(scenario)
            return _finish(records, out)

        if args.command == "slag" and args.subcommand == "trace":
            problem = SLagProblem(
                a=args.a, c=args.c, phase=args.phi, seed=args.seed,
                max_extent=args.extent,
            )
            path = trace_slag(problem)
            files = emit_paths([path], args.out)
            record = make_record(
                "slag.trace", path.phase_drift <= 1e-6, "slag_tracer",
                "trace_slag",
                values={
                    "phase_drift": path.phase_drift,
                    "mass": path.mass,
                    "ends": list(path.ends),
                    "csv": str(files[0]),
                },
                witness=None if path.phase_drift <= 1e-6 else "drift above tolerance",
                params={"a": args.a, "c": args.c, "phi": args.phi, "seed": args.seed},
            )
            return _finish([record], out)

        if args.command == "mirror" and args.subcommand == "circle":
            model = LGModel((args.a,), args.c)
            value = circle_charge(model, args.k, args.radius)
            series = circle_closed_form(model, args.k)
            rel = abs(value - series) / max(abs(series), 1e-300)
            record = make_record(
                "mirror.circle", rel <= 1e-9, "mirror_numeric", "circle_charge",
                values={"value": value, "series": series, "rel_error": rel},
                witness=None if rel <= 1e-9 else "quadrature/series mismatch",
                params={"a": args.a, "c": args.c, "k": args.k, "radius": args.radius},
            )
            return _finish([record], out)

        parser.error("unknown command")
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except StabforgeError as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
