"""Automated conformance campaign: catalog, profiles, execution, reports."""

from ofhtest.runner.campaign import (
    EmptySelectionError,
    UnknownCaseError,
    bound_catalog,
    run_campaign,
    run_case,
    select_cases,
)
from ofhtest.runner.catalog import Plane, TestCase, case_by_id, load_catalog
from ofhtest.runner.environment import PrerequisiteMissing, TestEnv
from ofhtest.runner.profile import LabProfile, load_profile, save_profile
from ofhtest.runner.report import (
    CaseRecord,
    TestReport,
    exit_code_for,
    load_report,
    render_human,
    render_structured,
    stable_body,
    write_run_dir,
)
from ofhtest.runner.scenario import SCENARIOS, CaseOutcome, CheckList, scenario

__all__ = [
    "CaseOutcome",
    "CaseRecord",
    "CheckList",
    "EmptySelectionError",
    "LabProfile",
    "Plane",
    "PrerequisiteMissing",
    "SCENARIOS",
    "TestCase",
    "TestEnv",
    "TestReport",
    "UnknownCaseError",
    "bound_catalog",
    "case_by_id",
    "exit_code_for",
    "load_catalog",
    "load_profile",
    "load_report",
    "render_human",
    "render_structured",
    "run_campaign",
    "run_case",
    "select_cases",
    "save_profile",
    "scenario",
    "stable_body",
    "write_run_dir",
]
