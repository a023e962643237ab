"""Command line interface.

Every subcommand builds a :class:`~chalkmotion.scenario.Scenario` and runs it.
The JSON report (results, residuals, tolerance) is printed on stdout; ``--out``
additionally writes the results to a file.

Exit codes: 0 success, 1 numerical failure, 2 input error.
"""

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .scenario import NUMERICAL_ERRORS, Scenario, SchemaError, run_scenario, write_json

log = logging.getLogger("chalkmotion")

EXIT_OK, EXIT_NUMERICAL, EXIT_INPUT = 0, 1, 2


def _load(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise SchemaError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from exc


def _common(p):
    p.add_argument("--out", help="write results here")
    p.add_argument("--format", choices=("csv", "json"), help="output format (default from --out suffix)")
    p.add_argument("--tol", type=float, help="residual tolerance for the run")
    p.add_argument("--seed", type=int, default=0, help="seed for random inputs")
    p.add_argument("--T", type=float, default=None, help="final time")
    p.add_argument("--dt", type=float, default=None, help="time step")
    p.add_argument("--debug-crosscheck", action="store_true", help="compare independent routes")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="chalkmotion", description="Symplectic ball motion toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", help="symplectic capacity of an ellipsoid")
    p.add_argument("--ellipsoid", required=True)
    _common(p)

    p = sub.add_parser("williamson", help="Williamson normal form of an SPD matrix")
    p.add_argument("--matrix", required=True)
    _common(p)

    p = sub.add_parser("mvee", help="minimum-volume enclosing ellipsoid of a point cloud")
    p.add_argument("--points", required=True, help="CSV of points, one per row")
    p.add_argument("--mvee-tol", type=float, default=None)
    _common(p)

    p = sub.add_parser("factor", help="factorize a symplectic matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--mode", choices=("pre-iwasawa", "free", "sp0"), default="pre-iwasawa")
    _common(p)

    p = sub.add_parser("flow", help="integrate a quadratic Hamiltonian")
    p.add_argument("--hamiltonian", required=True)
    p.add_argument("--order", type=int, choices=(2, 4), default=4)
    _common(p)

    p = sub.add_parser("generator", help="recover the Hamiltonian of an isotopy")
    p.add_argument("--isotopy", required=True)
    p.add_argument("--order", choices=("S-then-T", "T-then-S"), default="S-then-T")
    _common(p)

    p = sub.add_parser("iwasawa-sum", help="split a generator into local and rotation parts")
    p.add_argument("--isotopy", required=True)
    _common(p)

    p = sub.add_parser("chalkboard", help="move a symplectic ball along an isotopy")
    p.add_argument("--scenario", required=True)
    _common(p)

    g = sub.add_parser("gaussian", help="Gaussian state operations")
    gsub = g.add_subparsers(dest="op", required=True)
    p = gsub.add_parser("apply", help="apply a metaplectic operator")
    p.add_argument("--matrix", required=True)
    p.add_argument("--state", required=True)
    p.add_argument("--maslov", type=int, default=0)
    _common(p)
    p = gsub.add_parser("wigner", help="Wigner function parameters")
    p.add_argument("--state", required=True)
    p.add_argument("--numeric", action="store_true", help="also evaluate the integral (n=1)")
    _common(p)
    p = gsub.add_parser("transport", help="transport one Gaussian onto another")
    p.add_argument("--from", dest="src", required=True)
    p.add_argument("--to", dest="dst", required=True)
    _common(p)

    p = sub.add_parser("run", help="run a scenario file (object or list of objects)")
    p.add_argument("--scenario", required=True)
    p.add_argument("--jobs", type=int, default=1, help="parallel workers for scenario lists")
    _common(p)
    return parser


def _scenario_from_args(args):
    """Translate a subcommand into a scenario dict."""
    cmd = args.command
    if cmd == "capacity":
        kind, inputs = "capacity", {"ellipsoid": _load(args.ellipsoid)}
    elif cmd == "williamson":
        kind, inputs = "williamson", {"matrix": _load(args.matrix)}
    elif cmd == "mvee":
        kind, inputs = "mvee", {"points_csv": str(Path(args.points).resolve())}
        if args.mvee_tol is not None:
            inputs["tol"] = args.mvee_tol
    elif cmd == "factor":
        kind, inputs = "factor", {"matrix": _load(args.matrix), "mode": args.mode}
    elif cmd == "flow":
        kind, inputs = "flow", {"hamiltonian": _load(args.hamiltonian), "order": args.order}
    elif cmd == "generator":
        kind, inputs = "generator", {"isotopy": _load(args.isotopy), "order": args.order}
    elif cmd == "iwasawa-sum":
        kind, inputs = "iwasawa-sum", {"isotopy": _load(args.isotopy)}
    elif cmd == "gaussian":
        kind = "gaussian"
        if args.op == "apply":
            inputs = {"op": "apply", "matrix": _load(args.matrix), "state": _load(args.state), "maslov": args.maslov}
        elif args.op == "wigner":
            inputs = {"op": "wigner", "state": _load(args.state), "numeric": args.numeric}
        else:
            inputs = {"op": "transport", "from": _load(args.src), "to": _load(args.dst)}
    else:
        raise SchemaError(f"unknown command {cmd}")
    obj = {"kind": kind, "inputs": inputs, "seed": args.seed}
    grid = {}
    if args.T is not None:
        grid["T"] = args.T
    if args.dt is not None:
        grid["dt"] = args.dt
    if grid:
        obj["grid"] = grid
    return obj


def _apply_overrides(obj, args, with_out=True):
    """Command line flags take precedence over fields in the scenario file."""
    obj = dict(obj)
    if args.out and with_out:
        fmt = args.format or ("csv" if args.out.endswith(".csv") else "json")
        obj["output"] = {"path": str(Path(args.out).resolve()), "format": fmt}
    elif args.format and "output" in obj:
        obj["output"] = dict(obj["output"], format=args.format)
    if args.tol is not None:
        obj["tol"] = args.tol
    if args.debug_crosscheck:
        obj["debug_crosscheck"] = True
    if args.command in ("run", "chalkboard") and args.seed:
        obj["seed"] = args.seed
    grid = dict(obj.get("grid", {}))
    if args.T is not None:
        grid["T"] = args.T
    if args.dt is not None:
        grid["dt"] = args.dt
    if grid:
        obj["grid"] = grid
    return obj


def _run_one(obj, base_dir):
    """Run one scenario object; returns ``(exit_code, report)``."""
    try:
        sc = Scenario.from_json(obj, base_dir)
        return EXIT_OK, run_scenario(sc)
    except NUMERICAL_ERRORS as exc:
        return EXIT_NUMERICAL, {"status": "numerical-failure", "error": str(exc), "kind": obj.get("kind")}
    except (SchemaError, ValueError, TypeError, KeyError) as exc:
        return EXIT_INPUT, {"status": "input-error", "error": str(exc), "kind": obj.get("kind") if isinstance(obj, dict) else None}


def _run_star(item):
    return _run_one(*item)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    try:
        if args.command in ("run", "chalkboard"):
            raw = _load(args.scenario)
            base = Path(args.scenario).resolve().parent
            if args.command == "chalkboard" and isinstance(raw, dict):
                raw.setdefault("kind", "chalkboard")
        else:
            raw = _scenario_from_args(args)
            base = Path.cwd()
    except SchemaError as exc:
        print(json.dumps({"status": "input-error", "error": str(exc)}), file=sys.stdout)
        return EXIT_INPUT

    if isinstance(raw, dict) and "scenarios" in raw:
        raw = raw["scenarios"]
    items = raw if isinstance(raw, list) else [raw]
    if not items:
        print(json.dumps({"status": "input-error", "error": "empty scenario list"}))
        return EXIT_INPUT
    single = len(items) == 1
    items = [(_apply_overrides(o, args, with_out=single) if isinstance(o, dict) else o, base) for o in items]
    jobs = max(1, getattr(args, "jobs", 1))
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_star, items))
    else:
        outcomes = [_run_one(*it) for it in items]

    reports = [r for _, r in outcomes]
    if args.out and not single:
        write_json(args.out, reports)
    print(json.dumps(reports[0] if len(reports) == 1 else reports, sort_keys=True, indent=2))
    codes = [c for c, _ in outcomes]
    if EXIT_INPUT in codes:
        return EXIT_INPUT
    return EXIT_NUMERICAL if EXIT_NUMERICAL in codes else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
