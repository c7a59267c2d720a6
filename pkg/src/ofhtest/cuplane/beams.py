"""Beam table handling and direction-of-transmission estimation.

The verification geometry is a 32-element uniform linear array at half
wavelength spacing. A table entry's weights are the conjugate steering
vector for its azimuth, normalized to unit total power, so transmitting a
sample s through entry theta puts w_n(theta) * s on port n and the array
factor peaks at theta. The estimator scans a 1 degree azimuth grid and
breaks exact ties toward the smaller |angle|.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

N_PORTS = 32
_GRID_DEG = [
    float(d) for d in sorted(range(-90, 91), key=lambda a: (abs(a), a))
]


def steering_vector(azimuth_deg: float, n_ports: int = N_PORTS) -> np.ndarray:
    """Unit-power transmit weights pointing a half-wavelength ULA at azimuth."""
    n = np.arange(n_ports)
    phase = np.pi * n * np.sin(np.deg2rad(azimuth_deg))
    return np.exp(-1j * phase) / np.sqrt(n_ports)


@dataclass(frozen=True)
class BeamEntry:
    weights: tuple[complex, ...]
    azimuth_deg: float
    elevation_deg: float = 0.0

    def __post_init__(self) -> None:
        power = sum(abs(w) ** 2 for w in self.weights)
        if power == 0.0:
            raise ValueError("beam weights must not be all zero")
        if abs(power - 1.0) > 1e-6:
            raise ValueError(f"beam weights must have unit total power, got {power:.8f}")


@dataclass
class BeamTable:
    entries: dict[int, BeamEntry]

    def __post_init__(self) -> None:
        for beam_id in self.entries:
            if beam_id <= 0:
                raise ValueError("beam ids are positive (0 is reserved for passthrough)")

    def get(self, beam_id: int) -> BeamEntry | None:
        return self.entries.get(beam_id)

    def __len__(self) -> int:
        return len(self.entries)


def make_steering_table(
    n_entries: int = 37,
    span_deg: tuple[float, float] = (-45.0, 45.0),
    n_ports: int = N_PORTS,
) -> BeamTable:
    """Synthetic table of steering-vector beams, evenly spanning the sector."""
    if n_entries < 2:
        raise ValueError("a beam table needs at least two entries")
    azimuths = np.linspace(span_deg[0], span_deg[1], n_entries)
    entries = {}
    for idx, az in enumerate(azimuths, start=1):
        weights = tuple(complex(w) for w in steering_vector(float(az), n_ports))
        entries[idx] = BeamEntry(weights=weights, azimuth_deg=float(az))
    return BeamTable(entries=entries)


def beam_table_to_json(table: BeamTable) -> str:
    doc = {
        "entries": {
            str(beam_id): {
                "azimuth_deg": entry.azimuth_deg,
                "elevation_deg": entry.elevation_deg,
                "weights": [[w.real, w.imag] for w in entry.weights],
            }
            for beam_id, entry in sorted(table.entries.items())
        }
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def beam_table_from_json(text: str) -> BeamTable:
    doc = json.loads(text)
    entries = {}
    for key, body in doc["entries"].items():
        weights = tuple(complex(re, im) for re, im in body["weights"])
        entries[int(key)] = BeamEntry(
            weights=weights,
            azimuth_deg=float(body["azimuth_deg"]),
            elevation_deg=float(body.get("elevation_deg", 0.0)),
        )
    return BeamTable(entries=entries)


def detect_beam_direction(port_signals: np.ndarray) -> float | None:
    """Azimuth maximizing the array factor, or None without a dominant beam.

    Accepts one complex amplitude per port (shape (32,)) or a stream per
    port (shape (32, t)); streams are collapsed to amplitudes by matched
    correlation against the strongest port, which preserves the inter-port
    phase relation the estimate depends on.
    """
    sig = np.asarray(port_signals, dtype=np.complex128)
    if sig.ndim == 2:
        powers = np.sum(np.abs(sig) ** 2, axis=1)
        if powers.max() == 0.0:
            return None
        ref = sig[int(np.argmax(powers))]
        sig = sig @ ref.conj()
    if sig.ndim != 1:
        raise ValueError(f"expected (ports,) or (ports, t), got shape {port_signals.shape}")
    if not np.any(sig):
        return None
    n = np.arange(sig.size)
    best_angle = None
    best_value = -1.0
    values = []
    for angle in _GRID_DEG:
        af = abs(np.sum(sig * np.exp(1j * np.pi * n * np.sin(np.deg2rad(angle)))))
        values.append(af)
        if af > best_value:
            best_value = af
            best_angle = angle
    # a flat array factor (single active element) carries no direction
    if best_value - min(values) <= 1e-9 * best_value:
        return None
    return best_angle
