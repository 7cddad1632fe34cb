"""Command line entry point: ``sdstein run|list|catalog``."""
from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigInvalid, SDSteinError, UnknownExperiment

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _parser():
    p = argparse.ArgumentParser(prog="sdstein", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one registry experiment from a JSON config")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    run.add_argument("--out", default=None, help="directory for the JSON report and side outputs")
    sub.add_parser("list", help="list registry experiments")
    sub.add_parser("catalog", help="list the standard catalog laws")
    return p


def _run(args):
    from .experiments import ExperimentConfig, report_json, report_passed, run_experiment

    cfg = ExperimentConfig.load(args.config, seed=args.seed, output_dir=args.out)
    report = run_experiment(cfg)
    if cfg.output_dir is None:
        sys.stdout.write(report_json(report))
    for c in report["checks"]:
        print(f"{c['verdict'].upper():4s}  {c['name']}", file=sys.stderr)
    for r in report["wall_clock"]["budgets"]:
        if "verdict" in r:
            print(f"{r['verdict'].upper():4s}  runtime {r['name']}: {r['seconds']} s <= {r['limit']} s",
                  file=sys.stderr)
    return EXIT_PASS if report_passed(report) else EXIT_FAIL


def main(argv=None):
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    try:
        if args.command == "run":
            return _run(args)
        if args.command == "list":
            from .experiments import list_registry

            for row in list_registry():
                print(f"{row['id']:22s} {row['description']}  [{row['anchor']}]")
            return EXIT_PASS
        from .catalog import standard_catalog

        for name, law in standard_catalog().items():
            print(name, json.dumps(law.describe(), sort_keys=True, default=str))
        return EXIT_PASS
    except (ConfigInvalid, UnknownExperiment, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SDSteinError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
