"""Gray-coded constellation mappers from 3GPP TS 38.211 section 5.1.

Each mapper consumes bits MSB-first in the order the standard writes them
(b0 is the first bit of a symbol) and produces unit-average-power complex
points; QPSK uses 2 bits per symbol, 64QAM six, 256QAM eight.
"""

from __future__ import annotations

import enum

import numpy as np


class Modulation(enum.Enum):
    QPSK = "QPSK"
    QAM64 = "QAM64"
    QAM256 = "QAM256"


_BITS = {Modulation.QPSK: 2, Modulation.QAM64: 6, Modulation.QAM256: 8}


def bits_per_symbol(modulation: Modulation) -> int:
    return _BITS[modulation]


def _sign(b: np.ndarray) -> np.ndarray:
    return 1 - 2 * b.astype(np.int64)


def modulate(bits: np.ndarray, modulation: Modulation) -> np.ndarray:
    """Map a bit vector to constellation points per TS 38.211 5.1.3-5.1.6."""
    k = _BITS[modulation]
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.ndim != 1 or bits.size % k:
        raise ValueError(f"bit count {bits.size} is not a multiple of {k}")
    b = bits.reshape(-1, k)
    if modulation is Modulation.QPSK:
        i = _sign(b[:, 0])
        q = _sign(b[:, 1])
        return (i + 1j * q) / np.sqrt(2.0)
    if modulation is Modulation.QAM64:
        i = _sign(b[:, 0]) * (4 - _sign(b[:, 2]) * (2 - _sign(b[:, 4])))
        q = _sign(b[:, 1]) * (4 - _sign(b[:, 3]) * (2 - _sign(b[:, 5])))
        return (i + 1j * q) / np.sqrt(42.0)
    i = _sign(b[:, 0]) * (8 - _sign(b[:, 2]) * (4 - _sign(b[:, 4]) * (2 - _sign(b[:, 6]))))
    q = _sign(b[:, 1]) * (8 - _sign(b[:, 3]) * (4 - _sign(b[:, 5]) * (2 - _sign(b[:, 7]))))
    return (i + 1j * q) / np.sqrt(170.0)
