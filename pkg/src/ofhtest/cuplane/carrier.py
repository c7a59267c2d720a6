"""Carrier numerology, TDD pattern, and symbol timing arithmetic.

Defaults describe the configuration exercised throughout the harness: FR1
band n77, 50 MHz channel at 30 kHz subcarrier spacing (numerology 1, 133
resource blocks), 32 RU ports, 9-bit compressed IQ, and a repeating DDDSU
slot pattern. Times are integer nanoseconds on the shared simulated
timeline; symbol k of a slot starts at k * slot_ns // 14 past slot start,
which keeps all fourteen boundaries exact integers that re-sum to the slot.
"""

from __future__ import annotations

from dataclasses import dataclass

SYMBOLS_PER_SLOT = 14
RES_PER_PRB = 12
SUBFRAMES_PER_FRAME = 10
NS_PER_SUBFRAME = 1_000_000


@dataclass(frozen=True)
class CarrierConfig:
    band: str = "n77"
    bandwidth_mhz: int = 50
    mu: int = 1
    n_prb: int = 133
    ru_ports: int = 32
    iq_bitwidth: int = 9
    tdd_pattern: str = "DDDSU"

    def __post_init__(self) -> None:
        if self.mu < 0 or self.n_prb <= 0 or self.ru_ports <= 0:
            raise ValueError("numerology, PRB count, and port count must be positive")
        if not self.tdd_pattern or set(self.tdd_pattern) - set("DSU"):
            raise ValueError(f"TDD pattern {self.tdd_pattern!r} must be non-empty over D/S/U")

    @property
    def scs_khz(self) -> int:
        return 15 * (1 << self.mu)

    @property
    def slots_per_subframe(self) -> int:
        return 1 << self.mu

    @property
    def slot_ns(self) -> int:
        return NS_PER_SUBFRAME // self.slots_per_subframe

    @property
    def slots_per_frame(self) -> int:
        return SUBFRAMES_PER_FRAME * self.slots_per_subframe

    def symbol_offset_ns(self, symbol: int) -> int:
        """Start of symbol k relative to its slot start."""
        if not 0 <= symbol < SYMBOLS_PER_SLOT:
            raise ValueError(f"symbol {symbol} out of range")
        return symbol * self.slot_ns // SYMBOLS_PER_SLOT

    def slot_start_ns(self, frame: int, subframe: int, slot: int) -> int:
        """Absolute start time of the addressed slot from timeline zero."""
        if not 0 <= subframe < SUBFRAMES_PER_FRAME:
            raise ValueError(f"subframe {subframe} out of range")
        if not 0 <= slot < self.slots_per_subframe:
            raise ValueError(f"slot {slot} out of range for mu={self.mu}")
        index = (frame * SUBFRAMES_PER_FRAME + subframe) * self.slots_per_subframe + slot
        return index * self.slot_ns

    def slot_index(self, frame: int, subframe: int, slot: int) -> int:
        return (frame * SUBFRAMES_PER_FRAME + subframe) * self.slots_per_subframe + slot

    def slot_coords(self, index: int) -> tuple[int, int, int]:
        """Inverse of slot_index: absolute slot number to (frame, subframe, slot)."""
        per_frame = self.slots_per_frame
        frame = index // per_frame
        rem = index % per_frame
        return frame, rem // self.slots_per_subframe, rem % self.slots_per_subframe

    def slot_kind(self, frame: int, subframe: int, slot: int) -> str:
        """'D', 'S', or 'U' per the repeating TDD pattern."""
        return self.tdd_pattern[self.slot_index(frame, subframe, slot) % len(self.tdd_pattern)]

    def next_slot_of_kind(self, kind: str, from_index: int = 0) -> tuple[int, int, int]:
        """First slot at or after ``from_index`` whose pattern letter matches."""
        if kind not in "DSU" or len(kind) != 1:
            raise ValueError(f"unknown slot kind {kind!r}")
        period = len(self.tdd_pattern)
        for probe in range(from_index, from_index + period):
            if self.tdd_pattern[probe % period] == kind:
                return self.slot_coords(probe)
        raise ValueError(f"pattern {self.tdd_pattern!r} contains no {kind!r} slot")
