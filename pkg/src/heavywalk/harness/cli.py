"""``heavywalk run <config> | list-presets | accept <preset> | schema``."""
import argparse
import json
import sys

from .config import SCHEMA, ConfigError, ExperimentConfig
from .presets import accept, list_presets
from .runner import run


def _print_report(report, out):
    p = report.payload
    for c in p["checks"]:
        tag = "PASS" if c["passed"] else "FAIL"
        if not c["gating"]:
            tag += " (info)"
        value = c.get("value")
        extra = f"  error: {c['error']}" if "error" in c else ""
        print(f"{tag:12s} {p['name'] or '-'} / {c['label']}: value={value}{extra}", file=out)
    if p["aborted"]:
        print(f"aborted replicas: {len(p['aborted'])} of {p['replicas_requested']}", file=out)
    print(f"overall: {'PASS' if p['passed'] else 'FAIL'}  "
          f"(config {p['config_hash'][:12]}, {report.wall_clock:.1f}s)", file=out)


def main(argv=None):
    parser = argparse.ArgumentParser(prog="heavywalk", description=__doc__)
    sub = parser.add_subparsers(dest="cmd", required=True)
    p_run = sub.add_parser("run", help="run an experiment config (JSON)")
    p_run.add_argument("config")
    p_run.add_argument("--output-dir", help="override output_dir from the config")
    sub.add_parser("list-presets", help="list acceptance presets")
    p_acc = sub.add_parser("accept", help="run a named acceptance preset")
    p_acc.add_argument("preset")
    p_acc.add_argument("--output-dir")
    sub.add_parser("schema", help="print the config JSON schema")
    args = parser.parse_args(argv)

    try:
        if args.cmd == "list-presets":
            for name, desc in list_presets().items():
                print(f"{name:18s} {desc}")
            return 0
        if args.cmd == "schema":
            print(json.dumps(SCHEMA, indent=2))
            return 0
        if args.cmd == "run":
            cfg = ExperimentConfig.load(args.config)
            if args.output_dir:
                cfg.output_dir = args.output_dir
            report = run(cfg)
        else:
            report = accept(args.preset, args.output_dir)
    except ConfigError as exc:
        print("invalid config:", file=sys.stderr)
        for field, msg in exc.problems:
            print(f"  {field}: {msg}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _print_report(report, sys.stdout)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
