"""eAxC endpoint addressing.

An eAxC id names one antenna-carrier data flow inside the 16-bit field of
the eCPRI header. The split of those 16 bits between DU port, band/sector,
component carrier, and RU port is deployment-specific, so the layout is a
first-class value here rather than a constant; the default is the common
even 4/4/4/4 split. Fields are concatenated most-significant-first in the
order (du_port, band_sector, cc, ru_port).
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class EaxcLayout:
    """Bit widths of the four eAxC subfields; must sum to 16."""

    du_port_bits: int = 4
    band_sector_bits: int = 4
    cc_bits: int = 4
    ru_port_bits: int = 4

    def __post_init__(self) -> None:
        widths = (self.du_port_bits, self.band_sector_bits, self.cc_bits, self.ru_port_bits)
        if any(w <= 0 for w in widths):
            raise ValueError("eAxC subfield widths must be positive")
        if sum(widths) != 16:
            raise ValueError(f"eAxC subfield widths must sum to 16, got {sum(widths)}")


DEFAULT_EAXC_LAYOUT = EaxcLayout()


@dataclass(frozen=True)
class EaxcId:
    du_port: int = 0
    band_sector: int = 0
    cc: int = 0
    ru_port: int = 0


def pack_eaxc(eaxc: EaxcId, layout: EaxcLayout = DEFAULT_EAXC_LAYOUT) -> int:
    """Pack the four subfields into one 16-bit word."""
    word = 0
    for value, width, name in (
        (eaxc.du_port, layout.du_port_bits, "du_port"),
        (eaxc.band_sector, layout.band_sector_bits, "band_sector"),
        (eaxc.cc, layout.cc_bits, "cc"),
        (eaxc.ru_port, layout.ru_port_bits, "ru_port"),
    ):
        if not 0 <= value < (1 << width):
            raise ValueError(f"eAxC field {name}={value} exceeds its {width}-bit width")
        word = (word << width) | value
    return word


def unpack_eaxc(word: int, layout: EaxcLayout = DEFAULT_EAXC_LAYOUT) -> EaxcId:
    """Inverse of :func:`pack_eaxc` for the same layout."""
    if not 0 <= word <= 0xFFFF:
        raise ValueError(f"eAxC word {word:#x} out of 16-bit range")
    fields = []
    shift = 16
    for width in (
        layout.du_port_bits,
        layout.band_sector_bits,
        layout.cc_bits,
        layout.ru_port_bits,
    ):
        shift -= width
        fields.append((word >> shift) & ((1 << width) - 1))
    return EaxcId(*fields)
