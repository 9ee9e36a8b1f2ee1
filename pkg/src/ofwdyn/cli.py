"""Command-line entry point.

Verbs: ``run`` executes a config and writes results, ``verify`` runs the
configured checkers and fails on any broken certificate, ``sweep`` overrides
the horizon list, ``selftest`` runs the sampled property suites.  Exit
codes: 0 success, 1 config error, 2 certificate failure, 3 runtime error.
"""

import argparse
import sys

from . import _backend, harness, selfcheck
from .exceptions import ConfigError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ofwdyn",
        description="Projection-free online convex optimization with "
        "dynamic-regret certificates",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("config", help="path to a YAML experiment config")
        p.add_argument("--parallel", type=int, default=1,
                       help="number of concurrent scenario units")
        p.add_argument("--csv", help="override the CSV output path")
        p.add_argument("--json", help="override the JSON output path")

    add_common(sub.add_parser("run", help="run the experiment and write results"))
    p_verify = sub.add_parser("verify", help="run checkers; nonzero exit on failure")
    p_verify.add_argument("config")
    p_verify.add_argument("--parallel", type=int, default=1)
    p_sweep = sub.add_parser("sweep", help="run with an overridden horizon list")
    add_common(p_sweep)
    p_sweep.add_argument("--T", type=int, nargs="+", required=True, dest="horizons")
    p_self = sub.add_parser("selftest", help="run the sampled property suites")
    p_self.add_argument("--samples", type=int, default=2000)
    p_self.add_argument("--seed", type=int, default=0)
    return parser


def _emit(config, rows, csv_override, json_override) -> None:
    csv_path = csv_override or config.csv_path
    json_path = json_override or config.json_path
    if csv_path:
        harness.emit_results(rows, "csv", csv_path)
    if json_path:
        harness.emit_results(rows, "json", json_path)
    if not csv_path and not json_path:
        sys.stdout.write(harness.rows_to_csv(rows))


def _cmd_run(args, override_T=None) -> int:
    config = harness.load_config(args.config)
    if override_T is not None:
        config = harness.ExperimentConfig(
            **{**config.__dict__, "T_values": tuple(override_T)}
        )
    rows = harness.run_experiment(config, parallel=args.parallel)
    _emit(config, rows, args.csv, args.json)
    errored = [r for r in rows if r.lemma_failures.startswith("error:")]
    for row in errored:
        print(f"unit failed: {row.learner}@T={row.T}: {row.lemma_failures}", file=sys.stderr)
    return 3 if errored else 0


def _cmd_verify(args) -> int:
    config = harness.load_config(args.config)
    rows, failures = harness.verify_experiment(config, parallel=args.parallel)
    checked = sum(
        1 for r in rows if not r.lemma_failures.startswith("error:")
    )
    print(f"backend={_backend.active_name()} units={len(rows)} clean={checked}")
    for message in failures:
        print(f"FAIL {message}")
    if not failures:
        print("OK all certificates hold")
        return 0
    return 2


def _cmd_selftest(args) -> int:
    results = selfcheck.run_all(samples=args.samples, seed=args.seed)
    failed = 0
    for name, ok, worst in results:
        print(f"{'ok  ' if ok else 'FAIL'} {name} (worst violation {worst:.3e})")
        failed += 0 if ok else 1
    return 2 if failed else 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "sweep":
            return _cmd_run(args, override_T=args.horizons)
        return _cmd_selftest(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
