"""Virtual signal analyzer: waveform comparison and window bookkeeping.

The waveform metric is a power-normalized squared difference: the emitted
grid is first scaled by the complex least-squares factor that best aligns
it with the reference (absorbing any overall gain the emission path applies
uniformly), then the residual energy is expressed as a fraction of the
reference energy. Identical grids score 0, an empty emission scores 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ofhtest.cuplane.carrier import SYMBOLS_PER_SLOT, CarrierConfig
from ofhtest.cuplane.flows import DelayWindow

DEFAULT_ERROR_THRESHOLD = 1e-3


@dataclass
class Counters:
    sent: int = 0
    received: int = 0
    dropped_early: int = 0
    dropped_late: int = 0

    def conserved(self) -> bool:
        return self.received + self.dropped_early + self.dropped_late == self.sent


@dataclass
class MeasurementResult:
    verdict: str  # PASS / FAIL
    normalized_error: float = 0.0
    detected_azimuth_deg: float | None = None
    counters: Counters = field(default_factory=Counters)
    notes: list[str] = field(default_factory=list)


def normalized_grid_error(emitted: np.ndarray, reference: np.ndarray) -> float:
    """Residual energy fraction after least-squares gain alignment."""
    emitted = np.asarray(emitted, dtype=np.complex128)
    reference = np.asarray(reference, dtype=np.complex128)
    if emitted.shape != reference.shape:
        raise ValueError(f"grid shapes differ: {emitted.shape} vs {reference.shape}")
    ref_energy = float(np.sum(np.abs(reference) ** 2))
    if ref_energy == 0.0:
        raise ValueError("reference grid carries no energy")
    emit_energy = float(np.sum(np.abs(emitted) ** 2))
    if emit_energy == 0.0:
        return 1.0
    if np.array_equal(emitted, reference):
        return 0.0
    gain = np.vdot(emitted, reference) / emit_energy
    residual = float(np.sum(np.abs(gain * emitted - reference) ** 2))
    return residual / ref_energy


def analyze_dl_output(
    emitted: np.ndarray | None,
    reference: np.ndarray,
    counters: Counters | None = None,
    threshold: float = DEFAULT_ERROR_THRESHOLD,
) -> MeasurementResult:
    """Judge an emission against its reference grid."""
    counters = counters or Counters()
    if emitted is None or not np.any(emitted):
        return MeasurementResult(
            verdict="FAIL",
            normalized_error=1.0,
            counters=counters,
            notes=["no emission observed"],
        )
    error = normalized_grid_error(emitted, reference)
    return MeasurementResult(
        verdict="PASS" if error < threshold else "FAIL",
        normalized_error=error,
        counters=counters,
    )


def classify_arrival(
    windows: DelayWindow, plane: str, arrival_ns: int, symbol_time_ns: int
) -> str:
    """'ok', 'early', or 'late' for one frame against its symbol deadline.

    Time-to-air is symbol_time - arrival; both window bounds are inclusive,
    so a frame landing exactly on a bound is accepted.
    """
    lo, hi = windows.bounds(plane)
    t2a = symbol_time_ns - arrival_ns
    if t2a > hi:
        return "early"
    if t2a < lo:
        return "late"
    return "ok"


def evaluate_dlm(
    carrier: CarrierConfig,
    windows: DelayWindow,
    offsets_ns: list[int],
    plane: str = "U",
    expect: str | None = None,
) -> MeasurementResult:
    """Window arithmetic oracle for delay-management scenarios.

    Message i targets symbol i (mod 14) of consecutive slots at its nominal
    mid-window send instant shifted by offsets_ns[i]; the result counts how
    many land in-window versus early/late. ``expect`` names the scenario's
    intended outcome: 'all_received', 'all_early', or 'all_late'; when given,
    the verdict is PASS only if every message matched it.
    """
    counters = Counters(sent=len(offsets_ns))
    for i, off in enumerate(offsets_ns):
        slot_index = i // SYMBOLS_PER_SLOT
        symbol = i % SYMBOLS_PER_SLOT
        frame, subframe, slot = carrier.slot_coords(slot_index)
        symbol_time = carrier.slot_start_ns(frame, subframe, slot) + carrier.symbol_offset_ns(symbol)
        arrival = windows.nominal_send_ns(plane, symbol_time) + off
        outcome = classify_arrival(windows, plane, arrival, symbol_time)
        if outcome == "ok":
            counters.received += 1
        elif outcome == "early":
            counters.dropped_early += 1
        else:
            counters.dropped_late += 1

    if not counters.conserved():
        return MeasurementResult(verdict="FAIL", counters=counters, notes=["counter mismatch"])
    if expect is None:
        return MeasurementResult(verdict="PASS", counters=counters)
    matched = {
        "all_received": counters.received,
        "all_early": counters.dropped_early,
        "all_late": counters.dropped_late,
    }.get(expect)
    if matched is None:
        raise ValueError(f"unknown expectation {expect!r}")
    verdict = "PASS" if matched == counters.sent else "FAIL"
    return MeasurementResult(verdict=verdict, counters=counters)
