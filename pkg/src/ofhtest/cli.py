"""Command line front end.

Three subcommands: ``list`` prints the catalog, ``run`` executes a campaign
and persists its report directory, ``report`` re-renders a persisted run.
The process exits 0 only when every executed case passed; any FAIL or
BLOCKED verdict (and any usage or selection error) is non-zero, so CI can
gate on the exit code alone.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from ofhtest.runner.campaign import (
    EmptySelectionError,
    UnknownCaseError,
    run_campaign,
)
from ofhtest.runner.catalog import load_catalog
from ofhtest.runner.profile import LabProfile, load_profile
from ofhtest.runner.report import (
    exit_code_for,
    load_report,
    render_human,
    render_structured,
    write_run_dir,
)

REPORT_DIR_ENV = "OFHTEST_REPORT_DIR"
DEFAULT_REPORT_DIR = "reports"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ofhtest",
        description="Fronthaul conformance harness: emulated radio, scripted tester, "
        "catalog-driven campaigns.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("list", help="print the case catalog, one id and title per line")

    run = commands.add_parser("run", help="execute a campaign and persist its report")
    run.add_argument("--profile", metavar="FILE", help="lab profile JSON (defaults built in)")
    run.add_argument(
        "--case",
        metavar="ID",
        nargs="+",
        action="extend",
        default=None,
        help="run only these case ids (repeatable); default is the whole catalog",
    )
    run.add_argument("--seed", type=int, metavar="N", help="override the profile seed")
    run.add_argument(
        "--out",
        metavar="DIR",
        help=f"report root (default ${REPORT_DIR_ENV} or ./{DEFAULT_REPORT_DIR})",
    )

    rep = commands.add_parser("report", help="render a persisted run")
    rep.add_argument("--in", dest="run_dir", required=True, metavar="DIR", help="run directory")
    rep.add_argument(
        "--format",
        choices=("structured", "human"),
        default="human",
        help="output form (default human)",
    )
    return parser


def _cmd_list() -> int:
    for case in load_catalog():
        print(f"{case.id:<11} {case.title}")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        profile = load_profile(args.profile) if args.profile else LabProfile()
    except (OSError, ValueError) as exc:
        print(f"ofhtest: cannot load profile: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        profile = dataclasses.replace(profile, seed=args.seed)

    def progress(record) -> None:
        print(f"{record.case_id:<11} {record.verdict:<8} {record.title}")

    try:
        report = run_campaign(profile, args.case, on_case=progress)
    except (UnknownCaseError, EmptySelectionError) as exc:
        print(f"ofhtest: {exc}", file=sys.stderr)
        return 2

    out_root = args.out or os.environ.get(REPORT_DIR_ENV) or DEFAULT_REPORT_DIR
    run_dir = write_run_dir(report, out_root)
    doc = report.to_doc()
    summary = doc["summary"]
    print()
    print(
        f"{summary['total']} cases: {summary['PASS']} pass, "
        f"{summary['FAIL']} fail, {summary['BLOCKED']} blocked"
    )
    print(f"report written to {run_dir}")
    return exit_code_for(doc)


def _cmd_report(args: argparse.Namespace) -> int:
    try:
        doc = load_report(args.run_dir)
    except (OSError, ValueError) as exc:
        print(f"ofhtest: cannot read report: {exc}", file=sys.stderr)
        return 2
    if args.format == "structured":
        sys.stdout.write(render_structured(doc).decode())
    else:
        sys.stdout.write(render_human(doc))
    return exit_code_for(doc)


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "list":
        return _cmd_list()
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_report(args)


if __name__ == "__main__":
    raise SystemExit(main())
