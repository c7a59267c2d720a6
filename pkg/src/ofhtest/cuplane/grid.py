"""Resource-grid construction from a PN23 payload.

The grid for one slot is a (n_prb * 12, 14) complex array of integer-valued
samples: PN23 bits feed the Gray-coded mapper, points are scaled to a target
RMS inside the signed 16-bit range, rounded, and laid into the allocated
region symbol-major. Everything outside the allocation stays zero, so a
grid is both the stimulus payload and the analyzer's reference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ofhtest.cuplane.carrier import RES_PER_PRB, SYMBOLS_PER_SLOT, CarrierConfig
from ofhtest.cuplane.modulation import Modulation, bits_per_symbol, modulate
from ofhtest.cuplane.pn23 import pn23_bits

RMS_TARGET = 8192.0


@dataclass(frozen=True)
class WaveformSpec:
    """Verification-relevant skeleton of a 3GPP test model."""

    model_tag: str = "NR-RF1-TM1.1"
    modulation: Modulation = Modulation.QPSK
    pn23_seed: int = 0x7FFFFF

    def __post_init__(self) -> None:
        if not 0 < self.pn23_seed < (1 << 23):
            raise ValueError("payload seed must be a non-zero 23-bit value")


@dataclass(frozen=True)
class Allocation:
    start_prb: int = 0
    num_prb: int = 133
    start_symbol: int = 0
    num_symbol: int = SYMBOLS_PER_SLOT

    def check_against(self, carrier: CarrierConfig) -> None:
        if self.start_prb < 0 or self.num_prb < 0:
            raise ValueError("allocation PRB fields must be non-negative")
        if self.start_prb + self.num_prb > carrier.n_prb:
            raise ValueError(
                f"allocation [{self.start_prb}, {self.start_prb + self.num_prb}) "
                f"exceeds carrier width {carrier.n_prb}"
            )
        if self.start_symbol < 0 or self.num_symbol < 0:
            raise ValueError("allocation symbol fields must be non-negative")
        if self.start_symbol + self.num_symbol > SYMBOLS_PER_SLOT:
            raise ValueError("allocation exceeds the slot's symbol budget")


def generate_grid(
    carrier: CarrierConfig,
    waveform: WaveformSpec,
    allocation: Allocation,
) -> np.ndarray:
    """One slot of integer-valued IQ, shape (n_prb * 12, 14)."""
    allocation.check_against(carrier)
    grid = np.zeros((carrier.n_prb * RES_PER_PRB, SYMBOLS_PER_SLOT), dtype=np.complex128)
    n_re = allocation.num_prb * RES_PER_PRB * allocation.num_symbol
    if n_re == 0:
        return grid
    bits = pn23_bits(waveform.pn23_seed, n_re * bits_per_symbol(waveform.modulation))
    points = modulate(bits, waveform.modulation) * RMS_TARGET
    samples = np.round(points.real) + 1j * np.round(points.imag)
    re_lo = allocation.start_prb * RES_PER_PRB
    re_hi = re_lo + allocation.num_prb * RES_PER_PRB
    sym_lo = allocation.start_symbol
    block = samples.reshape(allocation.num_symbol, re_hi - re_lo).T
    grid[re_lo:re_hi, sym_lo : sym_lo + allocation.num_symbol] = block
    return grid
