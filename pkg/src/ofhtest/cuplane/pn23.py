"""PN23 pseudo-random bit sequence (ITU-T O.150 section 5.6).

Fibonacci LFSR over 23 stages with feedback taps at stages 23 and 18,
i.e. generator polynomial x23 + x18 + 1. The register is held as a 23-bit
integer whose most significant bit is the oldest stage; each step emits
that bit and shifts in the XOR of stages 23 and 18. The polynomial is
primitive, so any non-zero seed walks the full 2**23 - 1 state cycle.
"""

from __future__ import annotations

import numpy as np

REGISTER_BITS = 23
_MASK = (1 << REGISTER_BITS) - 1
# stage k of the delay line D1 -> ... -> D23 lives at bit k-1; the output
# and feedback taps sit on stages 23 and 18
_OUT_SHIFT = 22
_TAP_SHIFT = 17
PERIOD = _MASK  # 2**23 - 1


def _check_seed(seed: int) -> int:
    if not 0 < seed <= _MASK:
        raise ValueError(f"seed must be a non-zero {REGISTER_BITS}-bit value, got {seed}")
    return seed


def pn23_bits(seed: int, n: int) -> np.ndarray:
    """First ``n`` output bits for the given register seed, as uint8."""
    state = _check_seed(seed)
    if n < 0:
        raise ValueError("bit count must be non-negative")
    out = np.empty(n, dtype=np.uint8)
    for k in range(n):
        bit = (state >> _OUT_SHIFT) & 1
        feedback = bit ^ ((state >> _TAP_SHIFT) & 1)
        state = ((state << 1) | feedback) & _MASK
        out[k] = bit
    return out


def pn23_state_sequence(seed: int, n: int) -> np.ndarray:
    """Register contents after each of ``n`` steps, for cycle analysis."""
    state = _check_seed(seed)
    states = np.empty(n, dtype=np.uint32)
    for k in range(n):
        bit = (state >> _OUT_SHIFT) & 1
        feedback = bit ^ ((state >> _TAP_SHIFT) & 1)
        state = ((state << 1) | feedback) & _MASK
        states[k] = state
    return states
