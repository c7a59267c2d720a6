"""Reference radio-unit emulator.

A simulated O-RU that implements the server side of all four planes with
the bring-up ordering real radios exhibit: DHCP, call home, management
session, timing lock, configuration, and only then carrier activation and
CU-plane processing. The emulator is conformant by construction; every
misbehavior a negative test needs is switched on through a FaultPlan
toggle so failures are reproducible.
"""

from ofhtest.emulator.faults import TOGGLE_CASE_MAP, AlarmSpec, FaultPlan
from ofhtest.emulator.rf import SignalGenerator, VirtualRf
from ofhtest.emulator.ru import RuEmulator, RuPhase

__all__ = [
    "AlarmSpec",
    "FaultPlan",
    "RuEmulator",
    "RuPhase",
    "SignalGenerator",
    "TOGGLE_CASE_MAP",
    "VirtualRf",
]
