"""`lab` command line: list the experiment registry, run one experiment.

Exit codes: 0 all verdicts pass/informational, 2 any verdict failed,
3 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .experiments import ExperimentConfig, list_experiments, run_experiment

USAGE_ERROR = 3
FAIL_EXIT = 2


def _parse_scalar(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


def _cmd_list(args) -> int:
    entries = list_experiments()
    if args.json:
        json.dump(entries, sys.stdout, indent=1)
        sys.stdout.write("\n")
        return 0
    for e in entries:
        print(f"{e['id']}  {e['name']:28s} {e['description']}")
    return 0


def _cmd_run(args) -> int:
    params: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as f:
            loaded = json.load(f)
        params.update(loaded.get("params", loaded))
    for item in args.set or []:
        if "=" not in item:
            print(f"--set expects key=value, got {item!r}", file=sys.stderr)
            return USAGE_ERROR
        key, _, value = item.partition("=")
        params[key] = _parse_scalar(value)
    if args.seed is not None:
        params["seed"] = args.seed
    if args.jobs is not None:
        params["jobs"] = args.jobs
    out_dir = Path(args.out) if args.out else Path("runs") / args.experiment
    try:
        report = run_experiment(ExperimentConfig(args.experiment, params, out_dir))
    except KeyError as exc:
        print(exc.args[0], file=sys.stderr)
        return USAGE_ERROR
    for name, value in report.metrics.items():
        print(f"{name} = {value}")
    failed = [k for k, v in report.verdict.items() if v == "fail"]
    for name, value in report.verdict.items():
        print(f"[{value.upper():4s}] {name}")
    print(f"report: {out_dir / 'results.json'}  ({report.wall_time:.1f}s)")
    return FAIL_EXIT if failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_list = sub.add_parser("list", help="list registered experiments")
    p_list.add_argument("--json", action="store_true", help="machine-readable listing")
    p_list.set_defaults(func=_cmd_list)

    p_run = sub.add_parser("run", help="run one experiment")
    p_run.add_argument("experiment", help="registry id, e.g. E2")
    p_run.add_argument("--config", help="JSON file with a params map")
    p_run.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override one parameter (repeatable)")
    p_run.add_argument("--out", help="output directory (default runs/<id>)")
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--jobs", type=int)
    p_run.set_defaults(func=_cmd_run)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code not in (0, None) else 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
