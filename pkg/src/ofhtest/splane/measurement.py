"""Sync acquisition loops and time-error measurement.

run_functional_test answers "does the radio lock over this topology with a
conformant profile, and does it say so over the management plane". The
performance flavor measures time error at the virtual RF boundary after
lock, subtracting the lab calibration offset from every sample the way a
real bench subtracts the known probe-path bias before judging the limit.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

from ofhtest.simtime import SimTimeline
from ofhtest.splane.clock import (
    ClockState,
    ServoConfig,
    SimClock,
    SyncState,
    mark_timeout,
    servo_update,
)
from ofhtest.splane.ptp import (
    Announce,
    PathModel,
    PtpExchange,
    PtpProfileConfig,
    bmca_select,
    ptp_exchange,
)


class MplaneUnavailable(Exception):
    """The management-plane prerequisite for an S-plane case is missing."""


class SyncRunner:
    """Drives periodic exchanges between one master and one slave clock."""

    def __init__(
        self,
        timeline: SimTimeline,
        master: SimClock,
        slave: SimClock,
        path: PathModel,
        profile: PtpProfileConfig | None = None,
        servo: ServoConfig | None = None,
        rng: random.Random | None = None,
        participating: Callable[[], bool] = lambda: True,
        on_transition: Callable[[SyncState], None] | None = None,
    ) -> None:
        self.timeline = timeline
        self.master = master
        self.slave = slave
        self.path = path
        self.profile = profile or PtpProfileConfig()
        self.servo = servo or ServoConfig()
        self.state = ClockState()
        self.rng = rng or random.Random(0)
        self.participating = participating
        self.on_transition = on_transition
        self.exchange_log: list[PtpExchange] = []

    @property
    def interval_ns(self) -> int:
        return int(1e9 / self.profile.sync_rate_hz)

    def step(self) -> PtpExchange | None:
        """One sync interval: exchange timestamps and feed the servo."""
        now = self.timeline.now_ns
        if not self.participating():
            # the radio is ignoring timing traffic; its clock free-runs
            self.timeline.run_until(now + self.interval_ns)
            return None
        exchange = ptp_exchange(self.master, self.slave, self.path, now, self.rng)
        before = self.state.sync_state
        servo_update(
            self.state,
            self.slave,
            exchange.offset_est_ns,
            self.servo,
            dt_s=self.interval_ns * 1e-9,
            now_ns=now,
        )
        if self.on_transition and self.state.sync_state != before:
            self.on_transition(self.state.sync_state)
        self.exchange_log.append(exchange)
        self.timeline.run_until(now + self.interval_ns)
        return exchange

    def run_exchanges(self, count: int) -> None:
        for _ in range(count):
            self.step()

    def run_until_locked(self, budget_s: float) -> bool:
        deadline = self.timeline.now_ns + int(budget_s * 1e9)
        while self.timeline.now_ns < deadline:
            self.step()
            if self.state.sync_state == SyncState.LOCKED:
                return True
        return self.state.sync_state == SyncState.LOCKED

    def declare_timeout(self) -> None:
        before = self.state.sync_state
        mark_timeout(self.state, self.servo, self.timeline.now_ns)
        if self.on_transition and self.state.sync_state != before:
            self.on_transition(self.state.sync_state)

    def time_error_ns(self) -> float:
        """Instantaneous slave-vs-master error at the RF boundary."""
        t = self.timeline.now_ns
        return self.slave.offset_ns(t) - self.master.offset_ns(t)


@dataclass
class TimeErrorSeries:
    """Sampled time error with a lab calibration offset applied on read."""

    calibration_offset_ns: float = 0.0
    samples: list[tuple[int, float]] = field(default_factory=list)

    def add(self, t_ns: int, te_ns: float) -> None:
        self.samples.append((t_ns, te_ns))

    def reported(self) -> list[tuple[int, float]]:
        return [(t, te - self.calibration_offset_ns) for t, te in self.samples]

    def max_abs_ns(self) -> float:
        if not self.samples:
            return 0.0
        return max(abs(te - self.calibration_offset_ns) for _, te in self.samples)

    def to_text(self) -> str:
        lines = ["# t_ns te_ns"]
        lines += [f"{t} {te:.3f}" for t, te in self.reported()]
        return "\n".join(lines) + "\n"


@dataclass
class FunctionalSyncResult:
    verdict: str  # PASS / FAIL / BLOCKED
    locked: bool
    lock_time_s: float | None
    selected_master: str | None
    profile_violations: list[str]
    reported_state: str | None
    blocked_reason: str | None = None


def run_functional_test(
    runner: SyncRunner,
    announces: list[Announce],
    report_sync_state: Callable[[], str],
    budget_s: float = 30.0,
) -> FunctionalSyncResult:
    """Lock over the given topology and confirm it via the management view."""
    violations = runner.profile.violations()
    best = bmca_select(announces)
    start_ns = runner.timeline.now_ns
    locked = False
    if best is not None and not violations:
        locked = runner.run_until_locked(budget_s)
    lock_time_s = (
        (runner.timeline.now_ns - start_ns) * 1e-9 if locked else None
    )
    try:
        reported = report_sync_state()
    except MplaneUnavailable as exc:
        return FunctionalSyncResult(
            verdict="BLOCKED",
            locked=locked,
            lock_time_s=lock_time_s,
            selected_master=best.clock_identity if best else None,
            profile_violations=violations,
            reported_state=None,
            blocked_reason=str(exc),
        )
    ok = bool(best) and not violations and locked and reported == SyncState.LOCKED.value
    return FunctionalSyncResult(
        verdict="PASS" if ok else "FAIL",
        locked=locked,
        lock_time_s=lock_time_s,
        selected_master=best.clock_identity if best else None,
        profile_violations=violations,
        reported_state=reported,
    )


@dataclass
class PerformanceSyncResult:
    verdict: str  # PASS / FAIL / BLOCKED
    max_abs_te_ns: float | None
    limit_ns: float
    series: TimeErrorSeries
    blocked_reason: str | None = None


def run_performance_test(
    runner: SyncRunner,
    duration_s: float = 1.0,
    calibration_offset_ns: float = 0.0,
    limit_ns: float = 1500.0,
    settle_exchanges: int = 200,
    lock_budget_s: float = 30.0,
) -> PerformanceSyncResult:
    """Measure max |TE| over a window that starts after lock plus settling."""
    series = TimeErrorSeries(calibration_offset_ns=calibration_offset_ns)
    if not runner.run_until_locked(lock_budget_s):
        return PerformanceSyncResult(
            verdict="BLOCKED",
            max_abs_te_ns=None,
            limit_ns=limit_ns,
            series=series,
            blocked_reason="clock never reached LOCKED within the budget",
        )
    runner.run_exchanges(settle_exchanges)
    n_samples = max(1, int(duration_s * runner.profile.sync_rate_hz))
    for _ in range(n_samples):
        runner.step()
        series.add(runner.timeline.now_ns, runner.time_error_ns())
    max_te = series.max_abs_ns()
    return PerformanceSyncResult(
        verdict="PASS" if max_te <= limit_ns else "FAIL",
        max_abs_te_ns=max_te,
        limit_ns=limit_ns,
        series=series,
    )
