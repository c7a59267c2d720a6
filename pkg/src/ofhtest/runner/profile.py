"""Lab profile: everything a campaign needs to be repeatable.

A profile pins the knobs two different benches must agree on before their
reports are comparable: RNG seeding, supervision defaults, the transport
carrying management envelopes, and the recorded-but-physically-irrelevant
facts (attenuation, termination) that certification paperwork tracks. Two
campaigns run with the same profile and seed produce the same verdicts,
metrics, and evidence bytes.

Fault forcing comes in two scopes. ``case_faults`` applies a toggle only to
the environment of the case that toggle belongs to (per the toggle/case
map), which is how a profile parameterizes a negative procedure without
touching any other case. ``global_faults`` applies a toggle to every
environment in the campaign, deliberately breaking prerequisites so the
dependency handling (BLOCKED verdicts) can be demonstrated.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Any

from ofhtest.emulator.faults import TOGGLE_CASE_MAP, AlarmSpec, FaultPlan

TRANSPORT_MODES = ("in-memory", "tcp")


@dataclass
class LabProfile:
    name: str = "default"
    calibration_offset_ns: float = 0.0
    attenuation_db: float = 30.0
    termination_ohm: float = 50.0
    supervision_interval_s: float = 1.0
    supervision_guard_s: float = 0.5
    seed: int = 1
    transport: str = "in-memory"
    case_faults: dict[str, Any] = field(default_factory=dict)
    global_faults: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.transport not in TRANSPORT_MODES:
            raise ValueError(
                f"transport {self.transport!r} is not one of {TRANSPORT_MODES}"
            )
        if self.supervision_interval_s <= 0 or self.supervision_guard_s <= 0:
            raise ValueError("supervision interval and guard must be positive")
        for scope in (self.case_faults, self.global_faults):
            for toggle, value in list(scope.items()):
                coerced = _coerce_toggle(toggle, value)
                # round-trip through a plan so typos fail at load time
                FaultPlan().set_toggle(toggle, coerced)
                scope[toggle] = coerced

    # -- serialization ----------------------------------------------------

    def to_doc(self) -> dict:
        doc = asdict(self)
        for scope_name in ("case_faults", "global_faults"):
            doc[scope_name] = {
                toggle: asdict(v) if isinstance(v, AlarmSpec) else v
                for toggle, v in doc[scope_name].items()
            }
        return doc

    @classmethod
    def from_doc(cls, doc: dict) -> "LabProfile":
        known = {f for f in cls.__dataclass_fields__}  # noqa: C416
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"profile document has unknown fields: {sorted(unknown)}")
        return cls(**doc)

    # -- per-case derivations ----------------------------------------------

    def seed_for(self, label: str) -> int:
        """Stable 63-bit seed for one case (or sub-run) of this campaign."""
        digest = hashlib.sha256(f"{self.seed}:{label}".encode()).digest()
        return int.from_bytes(digest[:8], "big") >> 1

    def plan_for_case(self, case_id: str) -> FaultPlan:
        """Fault plan for one case's environment: global toggles always,
        scoped toggles only when this is the case they belong to."""
        plan = FaultPlan()
        for toggle, value in self.global_faults.items():
            plan.set_toggle(toggle, value)
        for toggle, value in self.case_faults.items():
            if TOGGLE_CASE_MAP.get(toggle) == case_id:
                plan.set_toggle(toggle, value)
        return plan


def _coerce_toggle(toggle: str, value: Any) -> Any:
    if toggle == "raise_alarm" and isinstance(value, dict):
        return AlarmSpec(**value)
    if toggle == "raise_alarm" and value is True:
        return AlarmSpec()
    return value


def load_profile(path: str) -> LabProfile:
    with open(path, encoding="utf-8") as fp:
        return LabProfile.from_doc(json.load(fp))


def save_profile(profile: LabProfile, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(profile.to_doc(), fp, indent=2, sort_keys=True)
        fp.write("\n")
