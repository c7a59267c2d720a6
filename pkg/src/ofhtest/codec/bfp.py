"""Block floating point compression for 9-bit IQ.

One PRB (12 subcarriers) shares a 4-bit exponent; each complex sample keeps
a pair of 9-bit two's-complement mantissas in [-256, 255]. Compression picks
the smallest exponent that brings every component of the block into mantissa
range and then truncates with an arithmetic shift (rounds toward negative
infinity); decompression is the exact left shift. The reconstruction error
is therefore bounded by 2^e - 1 per component and is zero when e == 0.

Two independent routes exist on purpose: the scalar per-block functions are
the reference semantics, and the numpy array paths used by the IQ flows are
asserted against them in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

SAMPLES_PER_PRB = 12
MANTISSA_MIN = -256
MANTISSA_MAX = 255
EXPONENT_MAX = 15

_COMPONENT_MIN = -(1 << 15)
_COMPONENT_MAX = (1 << 15) - 1


@dataclass(frozen=True)
class PrbBlock:
    """Compressed PRB: shared exponent plus 12 (i, q) mantissa pairs."""

    exponent: int
    mantissas: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if not 0 <= self.exponent <= EXPONENT_MAX:
            raise ValueError(f"exponent {self.exponent} out of [0, {EXPONENT_MAX}]")
        if len(self.mantissas) != SAMPLES_PER_PRB:
            raise ValueError(f"expected {SAMPLES_PER_PRB} mantissa pairs, got {len(self.mantissas)}")
        for i, q in self.mantissas:
            if not (MANTISSA_MIN <= i <= MANTISSA_MAX and MANTISSA_MIN <= q <= MANTISSA_MAX):
                raise ValueError(f"mantissa pair ({i}, {q}) out of 9-bit range")


def _needed_shift(component: int) -> int:
    # Smallest e with component >> e inside [-256, 255]. For x >= 0 that is
    # bit_length(x) - 8; for x < 0, x >> e >= -256 iff (-x - 1) >> e <= 255.
    if component >= 0:
        return max(0, component.bit_length() - 8)
    return max(0, (-component - 1).bit_length() - 8)


def bfp_compress(samples: Sequence[tuple[int, int]]) -> PrbBlock:
    """Compress 12 complex samples of 16-bit components into one block."""
    if len(samples) != SAMPLES_PER_PRB:
        raise ValueError(f"expected {SAMPLES_PER_PRB} samples, got {len(samples)}")
    exponent = 0
    for i, q in samples:
        for comp in (i, q):
            if not _COMPONENT_MIN <= comp <= _COMPONENT_MAX:
                raise ValueError(f"component {comp} out of signed 16-bit range")
        exponent = max(exponent, _needed_shift(i), _needed_shift(q))
    mantissas = tuple((i >> exponent, q >> exponent) for i, q in samples)
    return PrbBlock(exponent=exponent, mantissas=mantissas)


def bfp_decompress(block: PrbBlock) -> list[tuple[int, int]]:
    """Expand a block back to component samples (mantissa << exponent)."""
    return [(i << block.exponent, q << block.exponent) for i, q in block.mantissas]


def compress_array(iq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized compression of shape (n_blocks, 12) complex int components.

    ``iq`` is an integer-valued complex array; returns (exponents of shape
    (n_blocks,), mantissas of shape (n_blocks, 12) complex). Semantics match
    :func:`bfp_compress` exactly, including arithmetic-shift truncation.
    """
    if iq.ndim != 2 or iq.shape[1] != SAMPLES_PER_PRB:
        raise ValueError(f"expected shape (n, {SAMPLES_PER_PRB}), got {iq.shape}")
    re = np.asarray(np.real(iq), dtype=np.int64)
    im = np.asarray(np.imag(iq), dtype=np.int64)
    if (
        re.min(initial=0) < _COMPONENT_MIN
        or re.max(initial=0) > _COMPONENT_MAX
        or im.min(initial=0) < _COMPONENT_MIN
        or im.max(initial=0) > _COMPONENT_MAX
    ):
        raise ValueError("component out of signed 16-bit range")

    exponents = np.zeros(iq.shape[0], dtype=np.int64)
    for comp in (re, im):
        # x >> e fits iff e >= needed(x); needed(x) = bitlen(x or ~x) - 8.
        mag = np.where(comp >= 0, comp, -comp - 1)
        needed = np.zeros_like(mag)
        nz = mag > 0
        needed[nz] = np.maximum(0, np.floor(np.log2(mag[nz])).astype(np.int64) + 1 - 8)
        # floating log2 can be off by one at exact powers of two; repair both ways
        under = nz & ((mag >> needed) > MANTISSA_MAX)
        needed[under] += 1
        over = needed > 0
        over &= (mag >> np.maximum(needed - 1, 0)) <= MANTISSA_MAX
        needed[over] -= 1
        exponents = np.maximum(exponents, needed.max(axis=1))
    mant = (re >> exponents[:, None]) + 1j * (im >> exponents[:, None])
    return exponents, mant


def decompress_array(exponents: np.ndarray, mantissas: np.ndarray) -> np.ndarray:
    """Vectorized inverse of :func:`compress_array`."""
    re = np.asarray(np.real(mantissas), dtype=np.int64) << exponents[:, None]
    im = np.asarray(np.imag(mantissas), dtype=np.int64) << exponents[:, None]
    return re + 1j * im


def blocks_from_arrays(exponents: Iterable[int], mantissas: np.ndarray) -> list[PrbBlock]:
    """Adapt array output to :class:`PrbBlock` objects (wire form)."""
    out = []
    for exp, row in zip(exponents, mantissas):
        pairs = tuple((int(c.real), int(c.imag)) for c in row)
        out.append(PrbBlock(exponent=int(exp), mantissas=pairs))
    return out
