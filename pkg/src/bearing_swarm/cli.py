"""Command-line front end: ``run``, ``validate`` and ``sweep``.

Exit codes: 0 success, 1 configuration error, 2 collision or non-finite state,
3 (``validate`` only) initial conditions violated.
"""

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .config import check_sweep_param, from_dict, load_raw, with_override
from .errors import CollisionFailure, ConfigError, NonFiniteState
from .report import write_rows_csv, write_run_outputs
from .sim import check_initial_conditions, format_report, integrate

EXIT_OK, EXIT_CONFIG, EXIT_FAILURE, EXIT_VIOLATED = 0, 1, 2, 3

SWEEP_FIELDS = ("value", "delta_norm", "ptilde_norm", "min_edge_dist", "exit_status")

log = logging.getLogger("bearing_swarm")


def execute(raw, out_dir, stream=sys.stdout):
    """Validate, integrate and write outputs for one parsed config. Returns (exit code, summary)."""
    config = from_dict(raw)
    print(format_report(check_initial_conditions(config)), file=stream)
    try:
        trace = integrate(config)
        status, code = "completed", EXIT_OK
    except CollisionFailure as exc:
        trace, status, code = exc.trace, "collision", EXIT_FAILURE
        print(f"error: CollisionFailure: {exc}", file=sys.stderr)
    except NonFiniteState as exc:
        trace, status, code = exc.trace, "non_finite", EXIT_FAILURE
        print(f"error: NonFiniteState: {exc}", file=sys.stderr)
    summary = write_run_outputs(trace, config, out_dir, status)
    return code, summary


def cmd_run(args):
    try:
        raw = load_raw(args.config)
        code, summary = execute(raw, args.out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if code == EXIT_OK:
        print(f"final |delta| = {summary['delta_norm']:.3e} m, |ptilde| = {summary['ptilde_norm']:.3e} m, "
              f"bearing error = {summary['bearing_err_max']:.3e}; outputs in {args.out}")
    return code


def cmd_validate(args):
    try:
        config = from_dict(load_raw(args.config))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report = check_initial_conditions(config)
    print(format_report(report))
    return EXIT_OK if report.all_ok else EXIT_VIOLATED


def _sweep_one(job):
    raw, out_dir = job
    with open(os.devnull, "w") as sink:
        try:
            code, summary = execute(raw, out_dir, stream=sink)
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG, None
    return code, summary


def _parse_values(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"--values must be a comma-separated list of numbers: {exc}") from exc


def cmd_sweep(args):
    try:
        raw = load_raw(args.config)
        check_sweep_param(raw, args.param)
        values = _parse_values(args.values)
        if not values:
            raise ConfigError("--values is empty")
        jobs = []
        for v in values:
            sub = os.path.join(args.out, f"{args.param}={v:g}")
            jobs.append((with_override(raw, args.param, v), sub))
        for job in jobs:
            from_dict(job[0])
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    os.makedirs(args.out, exist_ok=True)
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_one, jobs))
    else:
        results = [_sweep_one(j) for j in jobs]
    rows = []
    nan = float("nan")
    for v, (code, summary) in zip(values, results):
        summary = summary or {}
        rows.append({
            "value": float(v),
            "delta_norm": summary.get("delta_norm", nan),
            "ptilde_norm": summary.get("ptilde_norm", nan),
            "min_edge_dist": summary.get("min_edge_dist_run", nan),
            "exit_status": code,
        })
        print(f"{args.param}={v:g}: exit {code}, |delta| = {rows[-1]['delta_norm']:.3e}, "
              f"|ptilde| = {rows[-1]['ptilde_norm']:.3e}")
    write_rows_csv(rows, SWEEP_FIELDS, os.path.join(args.out, "sweep_summary.csv"))
    return EXIT_OK if all(code == EXIT_OK for code, _ in results) else EXIT_FAILURE


def build_parser():
    parser = argparse.ArgumentParser(prog="bearing-swarm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate one configuration and write traces and plots")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="check the sufficient initial conditions only")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="run one configuration over several values of a parameter")
    p.add_argument("--config", required=True)
    p.add_argument("--param", required=True, help="gains.k_p, sim.dt or scenario.params.<name>")
    p.add_argument("--values", required=True, help="comma-separated list, e.g. 0.5,1,2")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
