"""Procedure plumbing shared by every catalog case.

A procedure is a plain function taking a :class:`TestEnv` and returning a
:class:`CaseOutcome`. Registration happens through the ``scenario``
decorator keyed by catalog id; the campaign refuses to start while any
catalog entry lacks a registered procedure, so the binding is checked
before a single case runs.

Procedures phrase their observations as named checks. The checklist both
decides the verdict (every check must hold) and becomes part of the
evidence, so a failed run says which observation broke, not just that one
did.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from io import BytesIO
from typing import Callable

import numpy as np

from ofhtest.codec.capture import (
    DIR_RU_TO_TESTER,
    DIR_TESTER_TO_RU,
    CaptureRecord,
    write_capture,
)
from ofhtest.codec.ecpri import decode_ecpri
from ofhtest.codec.bfp import bfp_decompress
from ofhtest.codec.sections import decode_uplane
from ofhtest.cuplane.carrier import RES_PER_PRB, SYMBOLS_PER_SLOT
from ofhtest.cuplane.flows import TimedFrame
from ofhtest.emulator.ru import RuEmulator
from ofhtest.mplane.client import MplaneClient, Notification
from ofhtest.runner.environment import TestEnv

VERDICT_PASS = "PASS"
VERDICT_FAIL = "FAIL"
VERDICT_BLOCKED = "BLOCKED"

SCENARIOS: dict[str, Callable[[TestEnv], "CaseOutcome"]] = {}


def scenario(case_id: str):
    """Register a procedure under its catalog id."""

    def register(fn: Callable[[TestEnv], "CaseOutcome"]):
        if case_id in SCENARIOS:
            raise ValueError(f"duplicate procedure for {case_id}")
        SCENARIOS[case_id] = fn
        return fn

    return register


@dataclass
class CaseOutcome:
    verdict: str
    metrics: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    evidence: dict[str, bytes] = field(default_factory=dict)
    blocked_reason: str | None = None


class CheckList:
    """Named pass/fail observations; the verdict is their conjunction."""

    def __init__(self) -> None:
        self.entries: list[tuple[str, bool]] = []

    def add(self, name: str, ok: bool) -> bool:
        self.entries.append((name, bool(ok)))
        return bool(ok)

    def failures(self) -> list[str]:
        return [name for name, ok in self.entries if not ok]

    def to_text(self) -> bytes:
        lines = [f"[{'ok' if ok else 'FAIL'}] {name}" for name, ok in self.entries]
        return ("\n".join(lines) + "\n").encode()

    def outcome(self, metrics: dict | None = None, evidence: dict[str, bytes] | None = None) -> CaseOutcome:
        failed = self.failures()
        out = CaseOutcome(
            verdict=VERDICT_PASS if not failed else VERDICT_FAIL,
            metrics=dict(metrics or {}),
            notes=[f"check failed: {name}" for name in failed],
            evidence=dict(evidence or {}),
        )
        out.evidence.setdefault("checks.txt", self.to_text())
        return out


# -- timeline and traffic helpers -------------------------------------------


def coords_after(env: TestEnv, kind: str, margin_ns: int = 2_000_000) -> tuple[int, int, int, int]:
    """Coordinates and absolute index of the next slot of `kind` at least
    `margin_ns` ahead of now (so scheduled frames land in the future even
    after negative timing offsets)."""
    start = (env.timeline.now_ns + margin_ns) // env.carrier.slot_ns + 1
    f, sf, sl = env.carrier.next_slot_of_kind(kind, int(start))
    return f, sf, sl, env.carrier.slot_index(f, sf, sl)


def shift_user_frames(
    frames: list[TimedFrame], offsets_ns: list[int], cplane_offset_ns: int = 0
) -> list[TimedFrame]:
    """Displace each U-plane frame's departure by the matching offset.

    Control frames move by cplane_offset_ns instead. When data frames are
    pushed toward their early edge they would otherwise overtake the grant
    that schedules them, so edge-case timing sends the control message at
    its own early edge to keep the causal order a real scheduler preserves.
    """
    shifted: list[TimedFrame] = []
    it = iter(offsets_ns)
    for tf in frames:
        if tf.plane == "U":
            shifted.append(replace(tf, time_ns=tf.time_ns + next(it)))
        else:
            shifted.append(replace(tf, time_ns=tf.time_ns + cplane_offset_ns))
    return shifted


def deliver_frames(env: TestEnv, frames: list[TimedFrame], settle_ns: int = 1_000_000) -> None:
    """Inject frames at their departure instants and run the world until
    the slot's aftermath (captures, counter updates) has settled."""
    if not frames:
        return
    for tf in frames:
        env.timeline.schedule_at(tf.time_ns, lambda tf=tf: env.ru.receive_frame(tf.frame))
    env.timeline.run_until(max(tf.time_ns for tf in frames) + settle_ns)


def await_notifications(client: MplaneClient, count: int, timeout_s: float = 2.0) -> list[Notification]:
    """Wait for at least `count` pushed notifications. In-memory transport
    delivers synchronously so the first look already succeeds; the socket
    transport needs a moment for the reader thread."""
    deadline = time.monotonic() + timeout_s
    while len(client.notifications) < count and time.monotonic() < deadline:
        time.sleep(0.005)
    return list(client.notifications)


def gate_clean(ru: RuEmulator) -> bool:
    """True when every radiating probe saw a locked clock and an active
    carrier (the radiation gate never leaked)."""
    return all(
        probe.sync_state.value == "LOCKED" and probe.active_carriers > 0
        for probe in ru.gate_log
        if probe.radiating
    )


# -- evidence builders --------------------------------------------------------


def mgmt_capture(ru: RuEmulator) -> bytes | None:
    """Management envelopes tapped at the radio, as a capture file."""
    if not ru.mgmt_frames:
        return None
    records = [
        CaptureRecord(time_ns=t, direction=direction, frame=frame)
        for direction, t, frame in ru.mgmt_frames
    ]
    buf = BytesIO()
    write_capture(buf, records)
    return buf.getvalue()


def fronthaul_capture(sent: list[TimedFrame], emitted: list[TimedFrame]) -> bytes:
    """Both fronthaul directions merged into one time-ordered capture."""
    records = [
        CaptureRecord(time_ns=tf.time_ns, direction=DIR_TESTER_TO_RU, frame=tf.frame)
        for tf in sent
    ]
    records += [
        CaptureRecord(time_ns=tf.time_ns, direction=DIR_RU_TO_TESTER, frame=tf.frame)
        for tf in emitted
    ]
    records.sort(key=lambda r: (r.time_ns, r.direction))
    buf = BytesIO()
    write_capture(buf, records)
    return buf.getvalue()


def rebuild_ul_grid(env: TestEnv, captured: list[TimedFrame]) -> np.ndarray:
    """Decode captured uplink frames back into a resource grid for
    comparison against what was injected at the antenna."""
    n_re = env.carrier.n_prb * RES_PER_PRB
    grid = np.zeros((n_re, SYMBOLS_PER_SLOT), dtype=complex)
    for tf in captured:
        _, payload = decode_ecpri(tf.frame)
        msg = decode_uplane(payload, all_prb_count=env.carrier.n_prb)
        for section in msg.sections:
            num_prb = section.num_prb or env.carrier.n_prb
            samples: list[complex] = []
            for block in section.prbs:
                samples.extend(i + 1j * q for i, q in bfp_decompress(block))
            lo = section.start_prb * RES_PER_PRB
            hi = lo + num_prb * RES_PER_PRB
            grid[lo:hi, msg.symbol_id] = samples
    return grid
