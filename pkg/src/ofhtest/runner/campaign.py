"""Campaign execution.

The campaign walks the catalog in its published order (management plane
first), builds a fresh environment per case, runs the bound procedure, and
folds the outcomes into one report. Procedures never abort the campaign: a
missing prerequisite turns into BLOCKED, an unexpected exception into FAIL
with the error recorded, and the remaining cases still run.

Cases are independent by construction (separate timelines, separate
emulators), so they could run concurrently; execution here is sequential
and the report is assembled in catalog order either way.
"""

from __future__ import annotations

import time
from typing import Callable

from ofhtest.runner import procedures_cu, procedures_m, procedures_s  # noqa: F401  (binds procedures)
from ofhtest.runner.catalog import TestCase, load_catalog
from ofhtest.runner.environment import PrerequisiteMissing, TestEnv
from ofhtest.runner.profile import LabProfile
from ofhtest.runner.report import CaseRecord, TestReport, new_run_id, utc_now
from ofhtest.runner.scenario import (
    SCENARIOS,
    VERDICT_BLOCKED,
    VERDICT_FAIL,
    CaseOutcome,
    mgmt_capture,
)


class UnknownCaseError(ValueError):
    """A selection named a case the catalog does not contain."""


class EmptySelectionError(ValueError):
    """A selection was given but matched nothing."""


def bound_catalog() -> list[TestCase]:
    """The catalog, refused unless every entry has a bound procedure."""
    catalog = load_catalog()
    missing = [case.id for case in catalog if case.procedure not in SCENARIOS]
    if missing:
        raise RuntimeError(
            "catalog entries without a bound procedure: " + ", ".join(missing)
        )
    stray = sorted(set(SCENARIOS) - {case.procedure for case in catalog})
    if stray:
        raise RuntimeError("procedures bound to no catalog entry: " + ", ".join(stray))
    return catalog


def select_cases(catalog: list[TestCase], selection: list[str] | None) -> list[TestCase]:
    if selection is None:
        return list(catalog)
    if not selection:
        raise EmptySelectionError("case selection is empty")
    known = {case.id for case in catalog}
    unknown = [case_id for case_id in selection if case_id not in known]
    if unknown:
        raise UnknownCaseError("unknown case id(s): " + ", ".join(unknown))
    wanted = set(selection)
    return [case for case in catalog if case.id in wanted]


def run_case(profile: LabProfile, case: TestCase) -> CaseRecord:
    """One case in one fresh world."""
    env = TestEnv(profile, case.id)
    try:
        outcome = SCENARIOS[case.procedure](env)
    except PrerequisiteMissing as exc:
        outcome = CaseOutcome(
            verdict=VERDICT_BLOCKED,
            blocked_reason=str(exc),
            notes=[f"prerequisite missing: {exc}"],
        )
    except Exception as exc:  # a broken procedure fails its case, not the campaign
        outcome = CaseOutcome(
            verdict=VERDICT_FAIL,
            notes=[f"procedure raised {type(exc).__name__}: {exc}"],
        )
    finally:
        env.close()

    evidence = dict(outcome.evidence)
    session_trace = mgmt_capture(env.ru)
    if session_trace is not None:
        evidence.setdefault("mplane.cap", session_trace)

    return CaseRecord(
        case_id=case.id,
        title=case.title,
        plane=case.plane.value,
        category=case.category,
        expected=case.expected,
        verdict=outcome.verdict,
        sim_duration_ns=env.timeline.now_ns,
        metrics=outcome.metrics,
        notes=outcome.notes,
        blocked_reason=outcome.blocked_reason,
        evidence=evidence,
    )


def run_campaign(
    profile: LabProfile,
    selection: list[str] | None = None,
    on_case: Callable[[CaseRecord], None] | None = None,
) -> TestReport:
    catalog = bound_catalog()
    cases = select_cases(catalog, selection)

    started = utc_now()
    wall_start = time.monotonic()
    records: list[CaseRecord] = []
    for case in cases:
        record = run_case(profile, case)
        records.append(record)
        if on_case is not None:
            on_case(record)

    report = TestReport(
        profile_doc=profile.to_doc(),
        records=records,
        run_id=new_run_id(),
        started_utc=started,
        finished_utc=utc_now(),
        wall_seconds=round(time.monotonic() - wall_start, 3),
    )
    summary = report.summary()
    assert summary["total"] == summary["PASS"] + summary["FAIL"] + summary["BLOCKED"]
    return report
