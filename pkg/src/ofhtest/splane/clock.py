"""Simulated clocks and the phase-locked loop that disciplines them.

A clock's reading at simulated instant t is t plus its phase offset, a
frequency-error term, and optional gaussian read noise from a seeded
generator. The servo is a classic PI controller acting on phase: the
proportional part bleeds off the measured offset, the integral part learns
the drift rate so a constant frequency error settles to zero residual.

Lock state uses hold-count hysteresis in both directions, so the state
cannot flap between FREERUN and LOCKED faster than the hold count allows.
Holdover is entered from LOCKED when exchanges stop arriving.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field


class SyncState(enum.Enum):
    FREERUN = "FREERUN"
    HOLDOVER = "HOLDOVER"
    LOCKED = "LOCKED"


@dataclass
class SimClock:
    """Free-running oscillator with phase and frequency error."""

    phase_offset_ns: float = 0.0
    freq_offset_ppb: float = 0.0
    noise_std_ns: float = 0.0
    rng: random.Random = field(default_factory=lambda: random.Random(0))

    def offset_ns(self, t_ns: float) -> float:
        """Noiseless clock error at simulated instant t."""
        return self.phase_offset_ns + self.freq_offset_ppb * t_ns * 1e-9

    def read(self, t_ns: float) -> float:
        """Timestamp the instant t as this clock sees it."""
        value = t_ns + self.offset_ns(t_ns)
        if self.noise_std_ns:
            value += self.rng.gauss(0.0, self.noise_std_ns)
        return value


@dataclass(frozen=True)
class ServoConfig:
    kp: float = 0.1
    ki: float = 0.01
    lock_threshold_ns: float = 100.0
    hold_count: int = 8
    holdover_timeout_s: float = 1.0


@dataclass
class ClockState:
    sync_state: SyncState = SyncState.FREERUN
    estimated_offset_ns: float = 0.0
    estimated_freq_ppb: float = 0.0
    integrator: float = 0.0
    good_streak: int = 0
    bad_streak: int = 0
    exchanges: int = 0
    last_exchange_ns: int | None = None
    transitions: list[tuple[int, SyncState]] = field(default_factory=list)

    def _move(self, now_ns: int, new_state: SyncState) -> None:
        if new_state != self.sync_state:
            self.sync_state = new_state
            self.transitions.append((now_ns, new_state))


def servo_update(
    state: ClockState,
    slave: SimClock,
    offset_est_ns: float,
    cfg: ServoConfig,
    dt_s: float,
    now_ns: int,
) -> None:
    """Feed one offset measurement into the loop and step the lock logic."""
    state.integrator += cfg.ki * offset_est_ns
    correction = cfg.kp * offset_est_ns + state.integrator
    slave.phase_offset_ns -= correction
    state.estimated_offset_ns = offset_est_ns
    if dt_s > 0:
        # the integrator holds the per-exchange phase feed needed to cancel
        # drift, which is the frequency estimate in disguise
        state.estimated_freq_ppb = state.integrator / dt_s
    state.exchanges += 1
    state.last_exchange_ns = now_ns

    if abs(offset_est_ns) < cfg.lock_threshold_ns:
        state.good_streak += 1
        state.bad_streak = 0
    else:
        state.bad_streak += 1
        state.good_streak = 0

    if state.sync_state in (SyncState.FREERUN, SyncState.HOLDOVER):
        if state.good_streak >= cfg.hold_count:
            state._move(now_ns, SyncState.LOCKED)
    elif state.sync_state == SyncState.LOCKED:
        if state.bad_streak >= cfg.hold_count:
            state._move(now_ns, SyncState.FREERUN)


def mark_timeout(state: ClockState, cfg: ServoConfig, now_ns: int) -> None:
    """Declare the exchange stream dead (no message within the timeout)."""
    if state.sync_state == SyncState.LOCKED:
        state._move(now_ns, SyncState.HOLDOVER)
        state.good_streak = 0
