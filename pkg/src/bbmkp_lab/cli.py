"""Command-line entry point: ``bbmkp-lab <subcommand> --scenario FILE --out DIR``.

Exit codes: 0 pass, 1 verdict fail, 2 usage or configuration error,
3 numerical error during a run.  Errors are reported on stderr as one JSON
object.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import pipelines
from .errors import (
    BBMKPError,
    GridMismatch,
    InvalidGrid,
    ScenarioError,
)
from .scenario import load_scenario

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="bbmkp-lab", description="Spectral BBM and BBM-KP runs with transverse-limit checks."
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--scenario", required=True, help="scenario JSON file")
        sp.add_argument("--out", required=True, help="output directory")

    common(sub.add_parser("simulate-bbm", help="integrate the two limiting BBM flows"))
    common(sub.add_parser("simulate-bbmkp", help="integrate the BBM-KP flow"))

    v = sub.add_parser("verify-limit", help="check the transverse limit and Gronwall bounds")
    common(v)
    v.add_argument("--k", type=_ints, help="Sobolev indices, e.g. 1,2")
    v.add_argument("--slack", type=float, help="relative slack on bound satisfaction")
    v.add_argument("--tail-ratio", type=float, help="tail ratio threshold")
    v.add_argument("--corrupt-uplus", action="store_true", help="negative control: use 2 u+")

    c = sub.add_parser("convergence-study", help="dt and resolution self-convergence")
    common(c)
    c.add_argument("--dts", type=_floats, help="time steps, coarse to fine")
    c.add_argument("--ns", type=_ints, help="x resolutions for a spatial study")
    c.add_argument("--t-end", type=float, help="study horizon (default: scenario t_end)")

    e = sub.add_parser("energy-audit", help="mass and energy time series")
    common(e)
    e.add_argument("--no-dealias", action="store_true", help="diagnostic run without dealiasing")
    return p


def _error(exc: BaseException, code: int) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return code


def _run(args) -> int:
    scn = load_scenario(args.scenario)
    if args.command == "simulate-bbm":
        print(json.dumps(pipelines.run_simulate_bbm(scn, args.out), sort_keys=True))
        return EXIT_PASS
    if args.command == "simulate-bbmkp":
        print(json.dumps(pipelines.run_simulate_bbmkp(scn, args.out), sort_keys=True))
        return EXIT_PASS
    if args.command == "verify-limit":
        if args.slack is not None and args.slack < 0:
            raise ValueError("--slack must be non-negative")
        if args.tail_ratio is not None and args.tail_ratio <= 0:
            raise ValueError("--tail-ratio must be positive")
        res = pipelines.run_verify_limit(
            scn,
            args.out,
            ks=args.k,
            slack=args.slack,
            tail_ratio=args.tail_ratio,
            corrupt_uplus=args.corrupt_uplus,
        )
        print(json.dumps({"verdict": res.report["verdict"], "k": res.report["k"]}, sort_keys=True))
        return EXIT_PASS if res.passed else EXIT_FAIL
    if args.command == "convergence-study":
        rows = pipelines.run_convergence_study(scn, args.out, args.dts, args.ns, args.t_end)
        print(f"wrote {len(rows)} rows to orders.csv")
        return EXIT_PASS
    summary = pipelines.run_energy_audit(scn, args.out, dealias=False if args.no_dealias else None)
    print(json.dumps(summary, sort_keys=True))
    if args.no_dealias:
        return EXIT_PASS  # diagnostic only
    return EXIT_PASS if pipelines.audit_passed(summary) else EXIT_FAIL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except (ScenarioError, InvalidGrid, GridMismatch, OSError) as exc:
        return _error(exc, EXIT_CONFIG)
    except BBMKPError as exc:
        return _error(exc, EXIT_NUMERIC)
    except ValueError as exc:
        return _error(exc, EXIT_CONFIG)
    except (ArithmeticError, FloatingPointError) as exc:
        return _error(exc, EXIT_NUMERIC)


if __name__ == "__main__":
    sys.exit(main())
