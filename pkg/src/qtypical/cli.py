"""Command-line interface: scenario runs, verification suites, replay.

Exit codes: 0 success, 2 failed verdicts or suite violations, 3 bad
configuration or arguments.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .consistency import (
    SuiteConfig,
    replay_certificate,
    run_equal_time_reduction_suite,
    run_implication_suite,
    run_inequality_suite,
    run_pathspace_diagnostics_suite,
)
from .errors import ConfigError, TypicalityError
from .scenarios import (
    builtin_scenario_names,
    load_builtin_scenario,
    load_scenario_file,
    run_scenario,
    write_json,
)

EXIT_OK = 0
EXIT_VIOLATION = 2
EXIT_CONFIG = 3

SUITES = {
    "inequalities": run_inequality_suite,
    "implications": run_implication_suite,
    "equal-time-reduction": run_equal_time_reduction_suite,
    "pathspace-diagnostics": run_pathspace_diagnostics_suite,
}


def _default_out_dir() -> str:
    return os.environ.get("QTYPICAL_OUT_DIR", "qtypical_out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qtypical",
        description="Typicality functions, packet overlap and branch "
                    "diagnostics for 1D quantum systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run-scenario", help="run a scenario config")
    run.add_argument("--config", required=True,
                     help="path to a scenario JSON, or a bundled scenario name")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--eps", type=float, default=None,
                     help="override the scenario's primary epsilon")
    run.add_argument("--out-dir", default=None)
    run.add_argument("--threads", type=int, default=1)

    suite = sub.add_parser("run-suite", help="run a verification suite")
    suite.add_argument("suite", help=f"one of {sorted(SUITES)}")
    suite.add_argument("--dims", default="2,4,8,16",
                       help="comma-separated Hilbert dimensions")
    suite.add_argument("--count", type=int, default=10000)
    suite.add_argument("--seed", type=int, default=7)
    suite.add_argument("--eps", default="1e-2,1e-3,1e-4",
                       help="comma-separated premise levels (implications)")
    suite.add_argument("--tolerance", type=float, default=1e-9)
    suite.add_argument("--out-dir", default=None)
    suite.add_argument("--threads", type=int, default=1)

    replay = sub.add_parser("replay", help="replay a violation certificate")
    replay.add_argument("--certificate", required=True)

    sub.add_parser("list-scenarios", help="list bundled scenarios")
    return parser


def _cmd_run_scenario(args) -> int:
    out_dir = args.out_dir or _default_out_dir()
    cfg = load_scenario_file(args.config)
    report = run_scenario(cfg, out_dir, seed=args.seed, eps=args.eps)
    for verdict in report["verdicts"]:
        flag = "PASS" if verdict["passed"] else "FAIL"
        print(f"[{flag}] {report['run_id']} {verdict['name']} "
              f"(eps={verdict['eps']}, value={verdict['value']})")
    print(f"report: {Path(out_dir) / cfg['name'] / 'report.json'}")
    return EXIT_OK if report["passed"] else EXIT_VIOLATION


def _cmd_run_suite(args) -> int:
    if args.suite not in SUITES:
        raise ConfigError(
            f"unknown suite {args.suite!r}; expected one of {sorted(SUITES)}")
    if args.count < 1:
        raise ConfigError("--count must be >= 1")
    dims = tuple(int(d) for d in args.dims.split(",") if d)
    eps_levels = tuple(float(e) for e in args.eps.split(",") if e)
    cfg = SuiteConfig(dims=dims, count=args.count, seed=args.seed,
                      eps_levels=eps_levels, tolerance=args.tolerance,
                      threads=max(args.threads, 1))
    report = SUITES[args.suite](cfg)
    out_dir = Path(args.out_dir or _default_out_dir())
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / f"suite_{args.suite}.json"
    write_json(out_path, report.to_dict())
    total_viol = 0
    for name, stats in report.checks.items():
        flag = "PASS" if stats.violations == 0 else "FAIL"
        print(f"[{flag}] {args.suite}:{name} evaluated={stats.evaluated} "
              f"vacuous={stats.vacuous} violations={stats.violations} "
              f"max_violation={stats.max_violation:.3g}")
        total_viol += stats.violations
    print(f"report: {out_path}")
    return EXIT_OK if total_viol == 0 else EXIT_VIOLATION


def _cmd_replay(args) -> int:
    path = Path(args.certificate)
    if not path.is_file():
        raise ConfigError(f"certificate file not found: {path}")
    try:
        cert = json.loads(path.read_text())
    except json.JSONDecodeError as err:
        raise ConfigError(
            f"{path}:{err.lineno}:{err.colno}: malformed JSON ({err.msg})")
    result = replay_certificate(cert)
    flag = "MATCH" if result["matches"] else "MISMATCH"
    print(f"[{flag}] {result['check']}: observed={result['observed']!r} "
          f"bound={result['bound']!r}")
    return EXIT_OK if result["matches"] else EXIT_VIOLATION


def _cmd_list_scenarios(_args) -> int:
    for name in builtin_scenario_names():
        cfg = load_builtin_scenario(name)
        print(f"{name}: {cfg.get('description', '')}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run-scenario": _cmd_run_scenario,
        "run-suite": _cmd_run_suite,
        "replay": _cmd_replay,
        "list-scenarios": _cmd_list_scenarios,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except TypicalityError as err:
        print(f"run failed: {err}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
