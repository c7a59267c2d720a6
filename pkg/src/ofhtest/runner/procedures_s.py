"""Synchronization-plane conformance procedures.

Functional: the radio must select the best grandmaster, lock over each
fronthaul topology class (direct fiber, switched, switch chain), and
report LOCKED through its management interface. Performance: once locked,
the two-way time error measured at the radio connector, corrected by the
lab calibration entry, must stay inside the telecom profile's limit.

Loss of the management session during either test blocks the case rather
than failing it: without the M-plane there is no conformant way to read
the radio's view of its own clock.
"""

from __future__ import annotations

from ofhtest.mplane.client import RpcFault
from ofhtest.runner.environment import PrerequisiteMissing, TestEnv
from ofhtest.runner.scenario import CaseOutcome, CheckList, scenario
from ofhtest.splane.measurement import (
    MplaneUnavailable,
    run_functional_test,
    run_performance_test,
)
from ofhtest.splane.ptp import Announce, lls_c1, lls_c2, lls_c3

ANNOUNCES = [
    Announce(priority1=128, clock_class=6, clock_accuracy=0x21,
             priority2=128, clock_identity="gm-primary"),
    Announce(priority1=128, clock_class=7, clock_accuracy=0x21,
             priority2=128, clock_identity="gm-backup"),
]


def _reported_over_mplane(env: TestEnv) -> str:
    """The radio's own view of its clock, read through the session."""
    client = env.client
    if client is None:
        raise MplaneUnavailable("no management session")
    try:
        doc = client.get("sync/state")
    except RpcFault as exc:
        raise MplaneUnavailable(str(exc)) from exc
    return doc.get("state", "")


@scenario("3.3.2")
def ptp_functional(env: TestEnv) -> CaseOutcome:
    """Lock and report it, once per topology class."""
    checks = CheckList()
    topologies = (
        ("LLS-C1", lls_c1()),
        ("LLS-C2", lls_c2()),
        ("LLS-C3", lls_c3()),
    )
    metrics: dict = {}
    report_lines: list[str] = []

    for position, (topology, path) in enumerate(topologies):
        world = env if position == 0 else env.fresh(topology.lower())
        world.require_session()
        runner = world.start_sync(path=path)
        result = run_functional_test(
            runner, ANNOUNCES, report_sync_state=lambda w=world: _reported_over_mplane(w)
        )
        if result.verdict == "BLOCKED":
            raise PrerequisiteMissing(
                f"{topology}: {result.blocked_reason or 'management view unavailable'}"
            )
        checks.add(f"{topology}: clock locked within budget", result.locked)
        checks.add(
            f"{topology}: best grandmaster selected",
            result.selected_master == "gm-primary",
        )
        checks.add(f"{topology}: profile conformant", result.profile_violations == [])
        checks.add(
            f"{topology}: radio reports LOCKED over the management plane",
            result.reported_state == "LOCKED",
        )
        metrics[topology] = {
            "lock_time_s": result.lock_time_s,
            "selected_master": result.selected_master,
        }
        report_lines.append(
            f"{topology} verdict={result.verdict} lock_time_s={result.lock_time_s} "
            f"master={result.selected_master} reported={result.reported_state}"
        )

    return checks.outcome(
        metrics=metrics,
        evidence={"sync_functional.txt": ("\n".join(report_lines) + "\n").encode()},
    )


@scenario("3.3.3")
def ptp_performance(env: TestEnv) -> CaseOutcome:
    """Max |TE| against the telecom profile limit, calibration applied."""
    checks = CheckList()
    env.require_session()
    runner = env.start_sync(path=lls_c2())

    result = run_performance_test(
        runner,
        duration_s=1.0,
        calibration_offset_ns=env.profile.calibration_offset_ns,
        limit_ns=1500.0,
    )
    if result.verdict == "BLOCKED":
        raise PrerequisiteMissing(result.blocked_reason or "clock never locked")

    checks.add("measurement completed with a locked clock", result.max_abs_te_ns is not None)
    checks.add(
        "max |TE| stays inside the profile limit",
        result.max_abs_te_ns is not None and result.max_abs_te_ns <= result.limit_ns,
    )
    checks.add(
        "radio still reports LOCKED after the measurement window",
        _reported_over_mplane(env) == "LOCKED",
    )
    checks.add("time error series is populated", len(result.series.samples) > 0)

    return checks.outcome(
        metrics={
            "max_abs_te_ns": result.max_abs_te_ns,
            "limit_ns": result.limit_ns,
            "samples": len(result.series.samples),
            "calibration_offset_ns": env.profile.calibration_offset_ns,
        },
        evidence={"time_error.txt": result.series.to_text().encode()},
    )
