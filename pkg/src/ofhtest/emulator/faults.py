"""Fault-injection plan for the radio emulator.

Each toggle switches exactly one misbehavior that one negative conformance
case needs; the mapping is recorded here so reports can name the case a
forced toggle belongs to. Unknown toggle names are rejected loudly: a typo
in a lab profile must not silently run a clean radio through a negative
procedure.
"""

from __future__ import annotations

from dataclasses import dataclass, fields


@dataclass(frozen=True)
class AlarmSpec:
    fault_id: int = 9
    source: str = "radio"
    severity: str = "MAJOR"
    text: str = "operator-requested test alarm"


@dataclass
class FaultPlan:
    withhold_supervision_ack: bool = False
    corrupt_software_checksum: bool = False
    reject_config_node: str | None = None
    drop_callhome_auth: bool = False
    raise_alarm: AlarmSpec | None = None
    disable_sync: bool = False

    def active(self, name: str) -> bool:
        """Truthiness test used by the management server's fault hook."""
        if name not in _TOGGLE_NAMES:
            raise ValueError(f"unknown fault toggle {name!r}")
        return bool(getattr(self, name))

    def set_toggle(self, name: str, value: object) -> None:
        if name not in _TOGGLE_NAMES:
            raise ValueError(f"unknown fault toggle {name!r}")
        if name == "reject_config_node":
            setattr(self, name, None if not value else str(value))
        elif name == "raise_alarm":
            if value is True:
                value = AlarmSpec()
            setattr(self, name, value if isinstance(value, AlarmSpec) else None)
        else:
            setattr(self, name, bool(value))

    def active_toggles(self) -> list[str]:
        return [f.name for f in fields(self) if getattr(self, f.name)]


_TOGGLE_NAMES = {f.name for f in fields(FaultPlan)}

# which conformance case each toggle's misbehavior belongs to
TOGGLE_CASE_MAP = {
    "drop_callhome_auth": "3.1.1.8",
    "withhold_supervision_ack": "3.1.3.2",
    "raise_alarm": "3.1.5.1",
    "corrupt_software_checksum": "3.1.6.2",
    "reject_config_node": "3.1.10.2",
    "disable_sync": "3.1.10.2",
}
