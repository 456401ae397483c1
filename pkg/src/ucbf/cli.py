"""Command-line front end: run, verify, sweep, and list scenarios.

Exit codes are part of the contract: 0 for a passing verdict, 1 for usage or
config problems, 2 for a failing verdict (monitor or certificate), 3 when a
scenario premise is violated (inadmissible gain, infeasible start, rejection
at load).
"""

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import (
    ConfigurationError,
    InfeasibleStartError,
    PreconditionError,
    PremiseViolationError,
)
from .scenarios import (
    build_scenario,
    gallery_config,
    gallery_document,
    grid_certificate,
    scenario_ids,
    set_config_value,
)
from .sim import monitor_report, run, sweep, write_sweep_csv, write_trace_csv

EXIT_PASS = 0
EXIT_USAGE = 1
EXIT_FAIL = 2
EXIT_PREMISE = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser():
    parser = _Parser(prog="ucbf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_source_flags(p):
        p.add_argument("--scenario", help="built-in scenario id (see `ucbf list`)")
        p.add_argument("--config", help="path to a scenario config JSON file")
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override one config key (dotted path), repeatable",
        )
        p.add_argument("--out", help="output directory (default $UCBF_OUT or ./out)")
        p.add_argument("--json", action="store_true", help="print a JSON summary")

    p_run = sub.add_parser("run", help="simulate a scenario and write trace + report")
    add_source_flags(p_run)

    p_verify = sub.add_parser("verify", help="grid-check the availability condition")
    add_source_flags(p_verify)

    p_sweep = sub.add_parser("sweep", help="re-run a scenario across one parameter axis")
    add_source_flags(p_sweep)
    p_sweep.add_argument("--param", required=True, choices=("gamma", "eta", "sigma", "dt"))
    p_sweep.add_argument("--values", required=True, help="comma-separated numbers")
    p_sweep.add_argument("--jobs", type=int, default=1, help="parallel runs")

    p_list = sub.add_parser("list", help="show the built-in scenario gallery")
    p_list.add_argument("--json", action="store_true", help="emit the gallery as JSON")
    p_list.add_argument("--filter", help="keep scenarios whose id, law, or description matches")
    return parser


def _parse_value(raw):
    try:
        return json.loads(raw)
    except ValueError:
        return raw


def _load_config(args):
    if (args.scenario is None) == (args.config is None):
        raise _UsageError("exactly one of --scenario or --config is required")
    if args.scenario is not None:
        config = gallery_config(args.scenario)
    else:
        with open(args.config) as fh:
            config = json.load(fh)
    for item in args.set:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigurationError(f"--set needs KEY=VALUE, got {item!r}")
        set_config_value(config, key, _parse_value(raw))
    return config


def _out_dir(args):
    out = args.out or os.environ.get("UCBF_OUT") or "out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _cmd_run(args):
    scenario = build_scenario(_load_config(args))
    result = run(scenario)
    report = monitor_report(scenario, result.trace, result.abort_reason)
    out = _out_dir(args)
    trace_path = out / "trace.csv"
    report_path = out / "report.txt"
    write_trace_csv(result.trace, trace_path)
    report_path.write_text(
        f"scenario: {scenario.name}\nruntime_s: {result.runtime_s:.3f}\n" + report.to_text()
    )
    if args.json:
        print(json.dumps({
            "scenario": scenario.name,
            "verdict": report.verdict,
            "abort_reason": result.abort_reason,
            "min_h": report.min_h,
            "runtime_s": result.runtime_s,
            "trace": str(trace_path),
            "report": str(report_path),
        }))
    else:
        print(f"{scenario.name}: {report.verdict} "
              f"(trace {trace_path}, report {report_path})")
    return EXIT_PASS if report.verdict == "PASS" else EXIT_FAIL


def _cmd_verify(args):
    scenario = build_scenario(_load_config(args), check_certificate=False)
    cert = grid_certificate(scenario)
    out = _out_dir(args)
    cert_path = out / "certificate.txt"
    cert_path.write_text(cert.to_text())
    if args.json:
        print(json.dumps({
            "scenario": scenario.name,
            "passed": cert.passed,
            "min_margin": cert.min_margin,
            "certificate": str(cert_path),
        }))
    else:
        print(f"{scenario.name}: {cert}")
    return EXIT_PASS if cert.passed else EXIT_FAIL


def _cmd_sweep(args):
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise _UsageError("--values needs at least one number")
    try:
        values = [float(v) for v in values]
    except ValueError as exc:
        raise _UsageError(f"--values must be numbers: {exc}") from None
    scenario = build_scenario(_load_config(args))
    rows = sweep(scenario, args.param, values, jobs=max(1, args.jobs))
    out = _out_dir(args)
    sweep_path = out / "sweep.csv"
    write_sweep_csv(rows, sweep_path)
    if args.json:
        print(json.dumps([{
            "parameter": r.parameter,
            "value": r.value,
            "admissible": r.admissible,
            "verdict": r.verdict,
            "min_h": r.min_h,
            "abort_reason": r.abort_reason,
        } for r in rows]))
    else:
        for r in rows:
            flag = "" if r.admissible in (None, True) else " [premise violated]"
            print(f"{r.parameter}={r.value:g}: {r.verdict}{flag}")
        print(f"table: {sweep_path}")
    gated = [r for r in rows if r.admissible is not False]
    return EXIT_PASS if all(r.verdict == "PASS" for r in gated) else EXIT_FAIL


def _cmd_list(args):
    doc = gallery_document()
    kept = []
    for sid in scenario_ids():
        cfg = doc[sid]
        law = cfg["adaptation"]["law"]
        if args.filter and args.filter not in (sid, law) \
                and args.filter not in cfg["description"]:
            continue
        kept.append(sid)
    if args.json:
        print(json.dumps({sid: doc[sid] for sid in kept}, indent=2))
    else:
        for sid in kept:
            cfg = doc[sid]
            print(f"{sid}  law={cfg['adaptation']['law']:<10}  {cfg['description']}")
    return EXIT_PASS


_COMMANDS = {
    "run": _cmd_run,
    "verify": _cmd_verify,
    "sweep": _cmd_sweep,
    "list": _cmd_list,
}


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (json.JSONDecodeError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PreconditionError, PremiseViolationError, InfeasibleStartError) as exc:
        print(f"premise violation: {exc}", file=sys.stderr)
        return EXIT_PREMISE


if __name__ == "__main__":
    sys.exit(main())
