"""Software slot inventory: download, verify, install, activate, reset.

The radio keeps two image slots. Exactly one is ever marked running; at
most one is marked active (the one a reset will switch to). Downloads are
checksum-verified with SHA-256 before a slot may be installed.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field


class SlotState(enum.Enum):
    EMPTY = "EMPTY"
    VALID = "VALID"
    INVALID = "INVALID"
    INSTALLED = "INSTALLED"


class SoftwareError(Exception):
    def __init__(self, tag: str, message: str) -> None:
        super().__init__(f"{tag}: {message}")
        self.tag = tag
        self.message = message


@dataclass
class SoftwareSlot:
    name: str
    build_id: str = ""
    checksum: str = ""
    state: SlotState = SlotState.EMPTY
    active: bool = False
    running: bool = False
    image: bytes = field(default=b"", repr=False)


class SoftwareInventory:
    def __init__(self, factory_build: str = "ru-base-1.0.0") -> None:
        image = factory_build.encode()
        self.slots: dict[str, SoftwareSlot] = {
            "A": SoftwareSlot(
                name="A",
                build_id=factory_build,
                checksum=hashlib.sha256(image).hexdigest(),
                state=SlotState.INSTALLED,
                active=True,
                running=True,
                image=image,
            ),
            "B": SoftwareSlot(name="B"),
        }

    def slot(self, name: str) -> SoftwareSlot:
        if name not in self.slots:
            raise SoftwareError("unknown-node", f"no software slot named {name}")
        return self.slots[name]

    def running_slot(self) -> SoftwareSlot:
        running = [s for s in self.slots.values() if s.running]
        if len(running) != 1:
            raise AssertionError(f"inventory invariant broken: {len(running)} running slots")
        return running[0]

    def active_slot(self) -> SoftwareSlot | None:
        active = [s for s in self.slots.values() if s.active]
        if len(active) > 1:
            raise AssertionError(f"inventory invariant broken: {len(active)} active slots")
        return active[0] if active else None

    def download(self, name: str, build_id: str, image: bytes, checksum: str) -> SlotState:
        slot = self.slot(name)
        if slot.running:
            raise SoftwareError("operation-failed", f"slot {name} is running")
        slot.build_id = build_id
        slot.image = image
        slot.checksum = checksum
        computed = hashlib.sha256(image).hexdigest()
        slot.state = SlotState.VALID if computed == checksum else SlotState.INVALID
        return slot.state

    def install(self, name: str) -> None:
        slot = self.slot(name)
        if slot.state != SlotState.VALID:
            raise SoftwareError(
                "operation-failed",
                f"slot {name} is {slot.state.value}; only a VALID download can be installed",
            )
        slot.state = SlotState.INSTALLED

    def activate(self, name: str) -> None:
        slot = self.slot(name)
        if slot.state != SlotState.INSTALLED:
            raise SoftwareError(
                "operation-failed", f"slot {name} is {slot.state.value}, not INSTALLED"
            )
        for other in self.slots.values():
            other.active = False
        slot.active = True

    def apply_reset(self) -> SoftwareSlot:
        """Atomically move 'running' to the active slot (reset semantics)."""
        target = self.active_slot() or self.running_slot()
        previous = self.running_slot()
        previous.running = False
        target.running = True
        return target
