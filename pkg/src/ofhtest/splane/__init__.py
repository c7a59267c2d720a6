"""Timing-plane engine: simulated clocks, PTP exchanges, servo, measurement.

Models a telecom-profile (G.8275.1 style, full timing support) distribution
chain between a grandmaster on the test equipment and the radio's local
clock: two-way timestamp exchanges over a path model with optional
asymmetry and per-hop jitter, a PI servo with lock/holdover hysteresis,
best-master selection, and time-error measurement with the calibration
handling a lab needs when the probe path itself biases the numbers.
"""

from ofhtest.splane.clock import ClockState, ServoConfig, SimClock, SyncState, servo_update
from ofhtest.splane.ptp import (
    Announce,
    HopModel,
    PathModel,
    PtpExchange,
    PtpProfileConfig,
    bmca_select,
    lls_c1,
    lls_c2,
    lls_c3,
    ptp_exchange,
)
from ofhtest.splane.measurement import (
    FunctionalSyncResult,
    PerformanceSyncResult,
    SyncRunner,
    TimeErrorSeries,
    run_functional_test,
    run_performance_test,
)

__all__ = [
    "ClockState",
    "ServoConfig",
    "SimClock",
    "SyncState",
    "servo_update",
    "Announce",
    "HopModel",
    "PathModel",
    "PtpExchange",
    "PtpProfileConfig",
    "bmca_select",
    "lls_c1",
    "lls_c2",
    "lls_c3",
    "ptp_exchange",
    "FunctionalSyncResult",
    "PerformanceSyncResult",
    "SyncRunner",
    "TimeErrorSeries",
    "run_functional_test",
    "run_performance_test",
]
