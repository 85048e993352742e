"""Command-line front end: run presets, export traces, render reports.

Subcommands map to the experiment protocols: ``run`` executes the complete
fixation, ``drill-test`` / ``hammer-test`` / ``nut-test`` exercise one tool
each, and ``frame-test`` runs the wall orientation estimation. Exit code 0
means success, 1 a failed step, 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields

from .engine import Trace, run
from .errors import IoFailure, ScenarioInvalid
from .procedure import FixationReport
from .scenario import Scenario, load_scenario, _SECTION_TYPES

SUBCOMMAND_MISSIONS = {
    "run": "full",
    "drill-test": "drill",
    "hammer-test": "hammer",
    "insert-test": "insert",
    "nut-test": "nut",
    "frame-test": "frame",
}


def export_traces(traces: dict[str, Trace], out_dir) -> list[str]:
    """One delimited text file per channel plus a machine-readable manifest.

    Files use LF line endings, ASCII, and a fixed float format so identical
    runs export byte-identical data.
    """
    import os

    written = []
    try:
        os.makedirs(out_dir, exist_ok=True)
        for trace_id in sorted(traces):
            trace = traces[trace_id]
            name = trace_id.replace("/", "_") + ".csv"
            path = os.path.join(out_dir, name)
            with open(path, "w", encoding="ascii", newline="\n") as fh:
                fh.write(f"t,{trace.channel}\n")
                for t, v in zip(trace.times, trace.values):
                    fh.write(f"{t:.4f},{v!r}\n")
            written.append(name)
    except OSError as exc:
        raise IoFailure(f"cannot export traces to {out_dir}: {exc}") from None
    return written


def write_manifest(report: FixationReport, out_dir, trace_files: list[str]):
    import os

    payload = {
        "scenario_hash": report.scenario_hash,
        "seed": report.seed,
        "success": report.success,
        "failure": report.failure,
        "total_duration": round(report.total_duration, 6),
        "steps": [
            {"step": r.step.value, "point": r.point_index, "arm": r.arm,
             "status": r.status, "duration": round(r.duration, 6)}
            for r in report.steps
        ],
        "trace_files": trace_files,
    }
    try:
        path = os.path.join(out_dir, "manifest.json")
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise IoFailure(f"cannot write manifest: {exc}") from None


def render_text_report(report: FixationReport) -> str:
    lines = []
    lines.append(f"seed {report.seed}  scenario {report.scenario_hash[:12]}")
    lines.append(f"{'step':24s} {'pt':>2s} {'arm':8s} {'status':8s} {'duration':>10s}")
    for r in report.steps:
        lines.append(
            f"{r.step.value:24s} {r.point_index:2d} {r.arm:8s} {r.status:8s} {r.duration:9.2f}s"
        )
        if r.error:
            lines.append(f"    {r.error}")
    minutes, seconds = divmod(report.total_duration, 60.0)
    lines.append(f"total {report.total_duration:.2f} s ({int(minutes)} min {seconds:.0f} s)")
    lines.append("result: " + ("success" if report.success else f"FAILED ({report.failure})"))
    return "\n".join(lines) + "\n"


def render_machine_report(report: FixationReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def print_config(stream=None) -> None:
    """Print every scenario key with its default value and unit comment."""
    stream = stream or sys.stdout
    scenario = Scenario()
    for section, cls in _SECTION_TYPES.items():
        stream.write(f"[{section}]\n")
        target = getattr(scenario, section)
        for f in fields(cls):
            stream.write(f"{f.name} = {getattr(target, f.name)}\n")
        stream.write("\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anchorsim",
        description="Deterministic simulator for dual-arm anchor-bolt fixation to concrete.",
    )
    parser.add_argument("--print-config", action="store_true",
                        help="print all scenario defaults and exit")
    sub = parser.add_subparsers(dest="command")
    for name, mission in SUBCOMMAND_MISSIONS.items():
        p = sub.add_parser(name, help=f"run the {mission} mission")
        p.add_argument("--scenario", metavar="PATH", default=None,
                       help="scenario file (defaults to the nominal setup)")
        p.add_argument("--seed", type=int, default=7, help="random seed (default 7)")
        p.add_argument("--trace-out", metavar="DIR", default=None,
                       help="export per-channel trace files and a manifest")
        p.add_argument("--variant", default=None,
                       help="override the drill tool variant")
        p.add_argument("--report", choices=("text", "machine-readable"), default="text",
                       help="report format on stdout")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_config:
        print_config()
        return 0
    if args.command is None:
        parser.print_help()
        return 2
    try:
        scenario = load_scenario(args.scenario)
        if args.variant is not None:
            scenario.tools.variant = args.variant
            scenario.validate()
    except ScenarioInvalid as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return 2

    mission = SUBCOMMAND_MISSIONS[args.command]
    report, traces = run(scenario, seed=args.seed, mission=mission)

    if args.trace_out:
        try:
            files = export_traces(traces, args.trace_out)
            write_manifest(report, args.trace_out, files)
        except IoFailure as exc:
            print(str(exc), file=sys.stderr)
            return 2

    if args.report == "machine-readable":
        sys.stdout.write(render_machine_report(report))
    else:
        sys.stdout.write(render_text_report(report))
    return 0 if report.success else 1


if __name__ == "__main__":
    sys.exit(main())
