"""Zadoff-Chu preamble sequences and cyclic correlation detection.

Odd-length root sequences x_u(n) = exp(-j pi u n (n+1) / L) are constant
amplitude with ideal cyclic autocorrelation: correlating a clean preamble
against its root gives a single full-height peak at the cyclic shift where
it was sent. The detector reports the Cauchy-Schwarz-normalized peak, so
1.0 means "exactly a scaled cyclic shift of the root" and anything below
the acceptance threshold means the occasion did not carry the preamble.
"""

from __future__ import annotations

import numpy as np


def zadoff_chu(root: int, length: int = 139) -> np.ndarray:
    if length < 3 or length % 2 == 0:
        raise ValueError(f"sequence length must be odd and >= 3, got {length}")
    if not 0 < root < length:
        raise ValueError(f"root must be in (0, {length}), got {root}")
    if np.gcd(root, length) != 1:
        raise ValueError(f"root {root} shares a factor with length {length}")
    n = np.arange(length)
    return np.exp(-1j * np.pi * root * n * (n + 1) / length)


def correlate_preamble(signal: np.ndarray, root: int, length: int = 139) -> tuple[float, int]:
    """Best normalized cyclic correlation against the root, with its shift.

    Returns (peak, shift) where peak is in [0, 1]: the magnitude of the
    inner product between the signal and each cyclic shift of the root
    sequence, divided by the product of their norms.
    """
    sig = np.asarray(signal, dtype=np.complex128)
    if sig.shape != (length,):
        raise ValueError(f"expected a length-{length} occasion, got shape {sig.shape}")
    norm = float(np.linalg.norm(sig))
    if norm == 0.0:
        return 0.0, 0
    ref = zadoff_chu(root, length)
    # correlation against every cyclic shift via one circular convolution
    spectrum = np.fft.fft(sig) * np.conj(np.fft.fft(ref))
    corr = np.abs(np.fft.ifft(spectrum))
    shift = int(np.argmax(corr))
    peak = float(corr[shift] / (norm * np.linalg.norm(ref)))
    return min(peak, 1.0), shift
