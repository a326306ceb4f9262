"""Batch command line: ``pursuitlab run|battery|list|solve|sweep``.

Exit codes: 0 success, 1 battery with failed expectations, 2 strategy
fault, 3 invalid scenario or arguments.  A battery reports the most severe
code among its scenarios, with invalid files outranking faults.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .errors import PursuitLabError, ScenarioError, UsageError
from .geometry import MetricGraph
from .output import write_fixed_point_csv, write_play_csv, write_svg, write_sweep_csv

EXIT_OK, EXIT_FAILED, EXIT_FAULT, EXIT_INVALID = 0, 1, 2, 3


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get("PURSUITLAB_OUT") or "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _overrides(args) -> dict:
    return {"dt": args.dt, "tol": args.tol, "seed": args.seed}


def _write_artifacts(result, out: Path) -> list:
    from .solver import save_tables

    sc = result.scenario
    written = []
    if result.record is not None:
        p = out / f"{sc.name}.csv"
        write_play_csv(result.record, p)
        written.append(p)
        if not isinstance(sc.space, MetricGraph):
            p = out / f"{sc.name}.svg"
            write_svg(result.record, p)
            written.append(p)
    if result.value is not None:
        p = out / f"{sc.name}.plab"
        save_tables(result.value, p)
        written.append(p)
    if result.sweep:
        p = out / f"{sc.name}.sweep.csv"
        write_sweep_csv(result.sweep, p)
        written.append(p)
    if result.report is not None:
        p = out / f"{sc.name}.fixedpoint.csv"
        write_fixed_point_csv(result.report, p)
        written.append(p)
    p = out / f"{sc.name}.summary.txt"
    p.write_text(result.summary() + "\n")
    written.append(p)
    return written


def _run_file(args, want_mode=None) -> int:
    from .scenario import execute, load

    sc = load(args.file)
    if want_mode and sc.mode not in want_mode:
        raise UsageError(f"{args.file}: mode {sc.mode!r} cannot be run by this command (expects {'/'.join(want_mode)})")
    result = execute(sc, jobs=args.jobs, **_overrides(args))
    _write_artifacts(result, _out_dir(args))
    print(result.summary())
    if result.fault:
        print(f"strategy fault: {result.fault}", file=sys.stderr)
        return EXIT_FAULT
    return EXIT_OK


def cmd_run(args) -> int:
    return _run_file(args)


def cmd_solve(args) -> int:
    return _run_file(args, ("solve",))


def cmd_sweep(args) -> int:
    return _run_file(args, ("sweep",))


def cmd_list(args) -> int:
    from .scenario import shipped

    for sc in shipped(args.tag):
        tags = ",".join(sc.tags)
        print(f"{sc.name:32s} [{tags}] {sc.description}")
    return EXIT_OK


def cmd_battery(args) -> int:
    from .analysis import BatteryRow, format_battery, run_battery
    from .scenario import load

    files = sorted(Path(args.dir).glob("*.json"))
    if not files:
        raise UsageError(f"no scenario files in {args.dir}")
    scenarios, broken = [], []
    for f in files:
        try:
            scenarios.append(load(f))
        except ScenarioError as e:
            broken.append(BatteryRow(f.stem, "error", {}, str(e)))
    rows = run_battery(scenarios, jobs=args.jobs, overrides=_overrides(args)) + broken
    text = format_battery(rows)
    print(text)
    (_out_dir(args) / "battery.txt").write_text(text + "\n")
    if broken:
        return EXIT_INVALID
    if any(r.status in ("fault", "error") for r in rows):
        return EXIT_FAULT
    if any(r.status == "fail" for r in rows):
        return EXIT_FAILED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dt", type=float, help="override the scenario's time step")
    common.add_argument("--tol", type=float, help="override the capture tolerance")
    common.add_argument("--out", help="output directory (default: $PURSUITLAB_OUT or ./out)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("--seed", type=int, help="seed for randomised path generators")

    p = argparse.ArgumentParser(prog="pursuitlab", description="Lion-and-man pursuit experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("run", parents=[common], help="run one scenario file")
    s.add_argument("file")
    s.set_defaults(func=cmd_run)
    s = sub.add_parser("solve", parents=[common], help="solve a discrete game scenario")
    s.add_argument("file")
    s.set_defaults(func=cmd_solve)
    s = sub.add_parser("sweep", parents=[common], help="tabulate the discrete value over eps")
    s.add_argument("file")
    s.set_defaults(func=cmd_sweep)
    s = sub.add_parser("battery", parents=[common], help="run every scenario in a directory")
    s.add_argument("dir")
    s.set_defaults(func=cmd_battery)
    s = sub.add_parser("list", parents=[common], help="list shipped scenarios")
    s.add_argument("--tag", help="only scenarios with this tag")
    s.set_defaults(func=cmd_list)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INVALID
    try:
        return args.func(args)
    except ScenarioError as e:
        print(f"{getattr(args, 'file', getattr(args, 'dir', ''))}: {e}", file=sys.stderr)
        return EXIT_INVALID
    except PursuitLabError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
