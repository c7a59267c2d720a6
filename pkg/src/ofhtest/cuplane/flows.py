"""Timed control/user-plane flow construction.

A flow is a list of TimedFrame records: fully encoded eCPRI frames stamped
with the instant the tester puts them on the wire. Send times are placed
mid-window by default, where the window is the radio's reception interval
expressed as time-to-air bounds: a frame for symbol time T must arrive with
T - arrival inside [t2a_min, t2a_max] of its plane. DLM scenarios then
shift individual frames off that nominal point to probe the boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ofhtest.codec import (
    BEAM_WEIGHT_SCALE,
    CplaneMessage,
    CplaneSection,
    EcpriHeader,
    EcpriMessageType,
    EaxcId,
    SectionType,
    St3Extras,
    UplaneMessage,
    UplaneSection,
    blocks_from_arrays,
    compress_array,
    encode_cplane,
    encode_ecpri,
    encode_uplane,
)
from ofhtest.codec.eaxc import pack_eaxc
from ofhtest.cuplane.carrier import RES_PER_PRB, SYMBOLS_PER_SLOT, CarrierConfig
from ofhtest.cuplane.grid import Allocation


@dataclass(frozen=True)
class DelayWindow:
    """Reception windows as time-to-air bounds, per plane."""

    t2a_min_up_ns: int = 50_000
    t2a_max_up_ns: int = 275_000
    t2a_min_cp_ns: int = 125_000
    t2a_max_cp_ns: int = 350_000

    def __post_init__(self) -> None:
        if self.t2a_min_up_ns >= self.t2a_max_up_ns:
            raise ValueError("U-plane window bounds must satisfy min < max")
        if self.t2a_min_cp_ns >= self.t2a_max_cp_ns:
            raise ValueError("C-plane window bounds must satisfy min < max")

    def bounds(self, plane: str) -> tuple[int, int]:
        if plane == "U":
            return self.t2a_min_up_ns, self.t2a_max_up_ns
        if plane == "C":
            return self.t2a_min_cp_ns, self.t2a_max_cp_ns
        raise ValueError(f"unknown plane {plane!r}")

    def nominal_send_ns(self, plane: str, symbol_time_ns: int) -> int:
        lo, hi = self.bounds(plane)
        return symbol_time_ns - (lo + hi) // 2


@dataclass(frozen=True)
class TimedFrame:
    time_ns: int
    frame: bytes
    plane: str  # "C" or "U"
    eaxc: int


class SeqCounter:
    """Per-flow eCPRI sequence numbering, wrapping at one byte."""

    def __init__(self) -> None:
        self._next: dict[int, int] = {}

    def take(self, eaxc: int) -> int:
        value = self._next.get(eaxc, 0)
        self._next[eaxc] = (value + 1) & 0xFF
        return value


def _wrap(
    message_type: EcpriMessageType,
    eaxc: EaxcId,
    seq: SeqCounter,
    payload: bytes,
) -> bytes:
    header = EcpriHeader(message_type=message_type, eaxc=eaxc, sequence_id=seq.take(pack_eaxc(eaxc)))
    return encode_ecpri(header, payload)


def _require_kind(carrier: CarrierConfig, frame: int, subframe: int, slot: int, wanted: str) -> None:
    kind = carrier.slot_kind(frame, subframe, slot)
    if kind != wanted:
        raise ValueError(
            f"slot ({frame},{subframe},{slot}) is {kind!r} in pattern "
            f"{carrier.tdd_pattern!r}, flow needs {wanted!r}"
        )


def _grid_to_uplane_sections(
    grid_cols: np.ndarray,
    allocation: Allocation,
    section_id: int,
) -> UplaneSection:
    prb_rows = grid_cols.reshape(allocation.num_prb, RES_PER_PRB)
    exponents, mantissas = compress_array(prb_rows)
    return UplaneSection(
        section_id=section_id,
        start_prb=allocation.start_prb,
        num_prb=allocation.num_prb,
        prbs=blocks_from_arrays(exponents, mantissas),
    )


def build_dl_flow(
    carrier: CarrierConfig,
    grid: np.ndarray,
    allocation: Allocation,
    frame: int,
    subframe: int,
    slot: int,
    windows: DelayWindow | None = None,
    beam_id: int = 0,
    beam_weights: tuple[complex, ...] | None = None,
    eaxc: EaxcId | None = None,
    seq: SeqCounter | None = None,
) -> list[TimedFrame]:
    """One downlink slot: an ST1 control message plus one user-plane
    message per allocated symbol."""
    allocation.check_against(carrier)
    _require_kind(carrier, frame, subframe, slot, "D")
    if grid.shape != (carrier.n_prb * RES_PER_PRB, SYMBOLS_PER_SLOT):
        raise ValueError(f"grid shape {grid.shape} does not match the carrier")
    windows = windows or DelayWindow()
    eaxc = eaxc or EaxcId()
    seq = seq or SeqCounter()
    slot_t0 = carrier.slot_start_ns(frame, subframe, slot)

    wire_weights: tuple[complex, ...] | None = None
    if beam_weights is not None:
        # unit-magnitude weights go on the wire in the fixed-point scale
        wire_weights = tuple(
            complex(round(w.real * BEAM_WEIGHT_SCALE), round(w.imag * BEAM_WEIGHT_SCALE))
            for w in beam_weights
        )
    section = CplaneSection(
        section_id=1,
        start_prb=allocation.start_prb,
        num_prb=allocation.num_prb,
        num_symbol=allocation.num_symbol,
        extension_flag=wire_weights is not None,
        beam_id=beam_id,
        beam_weights=wire_weights,
    )
    cmsg = CplaneMessage(
        frame_id=frame & 0xFF,
        subframe_id=subframe,
        slot_id=slot,
        start_symbol_id=allocation.start_symbol,
        section_type=SectionType.ST1,
        sections=[section],
    )
    out = [
        TimedFrame(
            time_ns=windows.nominal_send_ns("C", slot_t0 + carrier.symbol_offset_ns(allocation.start_symbol)),
            frame=_wrap(EcpriMessageType.RT_CONTROL, eaxc, seq, encode_cplane(cmsg, ru_ports=carrier.ru_ports)),
            plane="C",
            eaxc=_eaxc_word(eaxc),
        )
    ]
    re_lo = allocation.start_prb * RES_PER_PRB
    re_hi = re_lo + allocation.num_prb * RES_PER_PRB
    for k in range(allocation.start_symbol, allocation.start_symbol + allocation.num_symbol):
        umsg = UplaneMessage(
            frame_id=frame & 0xFF,
            subframe_id=subframe,
            slot_id=slot,
            symbol_id=k,
            sections=[_grid_to_uplane_sections(grid[re_lo:re_hi, k], allocation, section_id=1)],
        )
        symbol_time = slot_t0 + carrier.symbol_offset_ns(k)
        out.append(
            TimedFrame(
                time_ns=windows.nominal_send_ns("U", symbol_time),
                frame=_wrap(EcpriMessageType.IQ_DATA, eaxc, seq, encode_uplane(umsg)),
                plane="U",
                eaxc=_eaxc_word(eaxc),
            )
        )
    return out


def build_ul_flow(
    carrier: CarrierConfig,
    allocation: Allocation,
    frame: int,
    subframe: int,
    slot: int,
    windows: DelayWindow | None = None,
    beam_id: int = 0,
    eaxc: EaxcId | None = None,
    seq: SeqCounter | None = None,
) -> list[TimedFrame]:
    """Uplink scheduling: one ST1 control message naming the capture region."""
    allocation.check_against(carrier)
    _require_kind(carrier, frame, subframe, slot, "U")
    windows = windows or DelayWindow()
    eaxc = eaxc or EaxcId()
    seq = seq or SeqCounter()
    slot_t0 = carrier.slot_start_ns(frame, subframe, slot)
    section = CplaneSection(
        section_id=1,
        start_prb=allocation.start_prb,
        num_prb=allocation.num_prb,
        num_symbol=allocation.num_symbol,
        beam_id=beam_id,
    )
    cmsg = CplaneMessage(
        frame_id=frame & 0xFF,
        subframe_id=subframe,
        slot_id=slot,
        start_symbol_id=allocation.start_symbol,
        section_type=SectionType.ST1,
        sections=[section],
    )
    send = windows.nominal_send_ns(
        "C", slot_t0 + carrier.symbol_offset_ns(allocation.start_symbol)
    )
    return [
        TimedFrame(
            time_ns=send,
            frame=_wrap(EcpriMessageType.RT_CONTROL, eaxc, seq, encode_cplane(cmsg, ru_ports=carrier.ru_ports)),
            plane="C",
            eaxc=_eaxc_word(eaxc),
        )
    ]


@dataclass(frozen=True)
class PrachConfig:
    root: int = 1
    length: int = 139
    time_offset_us: int = 25
    cp_length_us: int = 12
    freq_offset: int = 0
    start_prb: int = 0
    num_prb: int = 12


@dataclass(frozen=True)
class PrachOccasion:
    """Where and when the preamble is expected inside the uplink slot."""

    frame: int
    subframe: int
    slot: int
    start_ns: int
    root: int
    length: int


def build_prach_st3_flow(
    carrier: CarrierConfig,
    prach: PrachConfig,
    frame: int,
    subframe: int,
    slot: int,
    windows: DelayWindow | None = None,
    eaxc: EaxcId | None = None,
    seq: SeqCounter | None = None,
) -> tuple[list[TimedFrame], PrachOccasion]:
    """ST3 control message describing a PRACH occasion in an uplink slot."""
    kind = carrier.slot_kind(frame, subframe, slot)
    if kind == "D":
        raise ValueError(
            f"PRACH occasion collides with DL-only slot ({frame},{subframe},{slot})"
        )
    windows = windows or DelayWindow()
    eaxc = eaxc or EaxcId()
    seq = seq or SeqCounter()
    slot_t0 = carrier.slot_start_ns(frame, subframe, slot)
    section = CplaneSection(
        section_id=1,
        start_prb=prach.start_prb,
        num_prb=prach.num_prb,
        num_symbol=1,
    )
    cmsg = CplaneMessage(
        frame_id=frame & 0xFF,
        subframe_id=subframe,
        slot_id=slot,
        start_symbol_id=0,
        section_type=SectionType.ST3,
        sections=[section],
        st3=St3Extras(
            time_offset=prach.time_offset_us,
            frame_structure=carrier.mu,
            cp_length=prach.cp_length_us,
            freq_offset=prach.freq_offset,
        ),
    )
    send = windows.nominal_send_ns("C", slot_t0)
    occasion = PrachOccasion(
        frame=frame,
        subframe=subframe,
        slot=slot,
        start_ns=slot_t0 + prach.time_offset_us * 1000,
        root=prach.root,
        length=prach.length,
    )
    frames = [
        TimedFrame(
            time_ns=send,
            frame=_wrap(EcpriMessageType.RT_CONTROL, eaxc, seq, encode_cplane(cmsg, ru_ports=carrier.ru_ports)),
            plane="C",
            eaxc=_eaxc_word(eaxc),
        )
    ]
    return frames, occasion


def _eaxc_word(eaxc: EaxcId) -> int:
    return pack_eaxc(eaxc)
