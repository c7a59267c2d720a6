"""Virtual RF boundary: emitted energy capture and receive-path injection.

VirtualRf stands in for the analyzer's probes: every downlink emission the
radio makes lands in a per-slot (ports, subcarriers, symbols) array that
the measurement code reads back. SignalGenerator is the opposite direction,
holding uplink grids and PRACH preambles the radio samples when control
messages schedule a capture.
"""

from __future__ import annotations

import numpy as np

from ofhtest.cuplane.carrier import RES_PER_PRB, SYMBOLS_PER_SLOT, CarrierConfig
from ofhtest.cuplane.flows import PrachOccasion
from ofhtest.cuplane.zadoff_chu import zadoff_chu


class VirtualRf:
    """Accumulates per-port downlink emissions, addressable by slot."""

    def __init__(self, carrier: CarrierConfig) -> None:
        self.carrier = carrier
        self._slots: dict[int, np.ndarray] = {}

    def _slot_array(self, slot_index: int) -> np.ndarray:
        if slot_index not in self._slots:
            self._slots[slot_index] = np.zeros(
                (self.carrier.ru_ports, self.carrier.n_prb * RES_PER_PRB, SYMBOLS_PER_SLOT),
                dtype=np.complex128,
            )
        return self._slots[slot_index]

    def add_emission(
        self,
        slot_index: int,
        symbol: int,
        re_start: int,
        samples: np.ndarray,
        port_weights: np.ndarray,
    ) -> None:
        arr = self._slot_array(slot_index)
        arr[:, re_start : re_start + samples.size, symbol] += np.outer(port_weights, samples)

    def emitted_slots(self) -> list[int]:
        return sorted(self._slots)

    def port_grid(self, slot_index: int, port: int = 0) -> np.ndarray:
        """(subcarriers, symbols) view of one port's emission for a slot."""
        if slot_index not in self._slots:
            return np.zeros(
                (self.carrier.n_prb * RES_PER_PRB, SYMBOLS_PER_SLOT), dtype=np.complex128
            )
        return self._slots[slot_index][port]

    def port_snapshot(self, slot_index: int, symbol: int, re_index: int) -> np.ndarray:
        """All ports' amplitudes at one resource element."""
        if slot_index not in self._slots:
            return np.zeros(self.carrier.ru_ports, dtype=np.complex128)
        return self._slots[slot_index][:, re_index, symbol].copy()

    def total_energy(self, slot_index: int | None = None) -> float:
        if slot_index is not None:
            if slot_index not in self._slots:
                return 0.0
            return float(np.sum(np.abs(self._slots[slot_index]) ** 2))
        return float(sum(np.sum(np.abs(a) ** 2) for a in self._slots.values()))


class SignalGenerator:
    """Holds waveforms for the radio to sample on its receive path."""

    def __init__(self, carrier: CarrierConfig) -> None:
        self.carrier = carrier
        self._ul_grids: dict[int, np.ndarray] = {}
        self._prach: dict[int, tuple[int, np.ndarray]] = {}

    def inject_ul_grid(self, slot_index: int, grid: np.ndarray) -> None:
        expected = (self.carrier.n_prb * RES_PER_PRB, SYMBOLS_PER_SLOT)
        if grid.shape != expected:
            raise ValueError(f"grid shape {grid.shape} does not match the carrier {expected}")
        self._ul_grids[slot_index] = np.asarray(grid, dtype=np.complex128)

    def sample_ul(self, slot_index: int, symbol: int, re_start: int, n_re: int) -> np.ndarray:
        grid = self._ul_grids.get(slot_index)
        if grid is None:
            return np.zeros(n_re, dtype=np.complex128)
        return grid[re_start : re_start + n_re, symbol].copy()

    def inject_prach(
        self,
        occasion: PrachOccasion,
        amplitude: float = 4096.0,
        cyclic_shift: int = 0,
        start_ns: int | None = None,
    ) -> None:
        """Place a preamble at the occasion (or deliberately off-time).

        Components are rounded to integers at injection, matching what the
        capture path's converter would hand the compressor.
        """
        raw = np.roll(zadoff_chu(occasion.root, occasion.length), cyclic_shift) * amplitude
        waveform = np.round(raw.real) + 1j * np.round(raw.imag)
        slot_index = self.carrier.slot_index(occasion.frame, occasion.subframe, occasion.slot)
        at = occasion.start_ns if start_ns is None else start_ns
        self._prach[slot_index] = (at, waveform)

    def sample_prach(self, slot_index: int, start_ns: int) -> tuple[np.ndarray | None, bool]:
        """(waveform, mistimed): waveform present only when on time.

        mistimed is True when an injection exists for the slot but its
        start does not line up with the scheduled occasion start.
        """
        entry = self._prach.get(slot_index)
        if entry is None:
            return None, False
        at, waveform = entry
        if at != start_ns:
            return None, True
        return waveform.copy(), False
