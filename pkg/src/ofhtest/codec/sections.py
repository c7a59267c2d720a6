"""Control-plane and user-plane section message codecs.

These are the eCPRI payloads exchanged on the fronthaul. Field packing is
MSB-first; sections start byte aligned and any sub-byte tail inside a
section is zero padded to the next byte boundary.

Control-plane message (eCPRI type 2, RT_CONTROL):

    frameId(8) subframeId(4) slotId(6) startSymbolId(6)
    sectionType(8) numSections(8)
    -- section type 3 only --
    timeOffset(16) frameStructure(8) cpLength(16) freqOffset(s24)
    -- per section, 64 bits --
    sectionId(12) rb(1) symInc(1) startPrb(10)
    numPrb(8) reMask(12) numSymbol(4)
    ef(1) beamId(15)
    -- if ef, inline beam weights --
    numWeights(8), then per weight I(s16) Q(s16)

User-plane message (eCPRI type 0, IQ_DATA):

    frameId(8) subframeId(4) slotId(6) symbolId(6) numSections(8)
    -- per section --
    sectionId(12) rb(1) symInc(1) startPrb(10) numPrb(8)
    then one PRB block per effective PRB:
        exponent(4) followed by 24 mantissas of 9 bits,
    zero padded to the byte boundary at the end of the section.

numPrb == 0 means "all PRBs of the carrier"; decoding such a section needs
the carrier size passed in, since the count is not on the wire.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from ofhtest.codec.bfp import PrbBlock, SAMPLES_PER_PRB
from ofhtest.codec.bits import BitReader, BitWriter
from ofhtest.codec.ecpri import DecodeError, EncodeError


class SectionType(enum.IntEnum):
    ST1 = 1  # DL/UL channel data
    ST3 = 3  # PRACH and mixed-numerology channels


# Inline beam weights travel as signed 16-bit I/Q pairs. Unit-magnitude
# weights are expressed in this fixed-point scale (Q1.14), leaving headroom
# above 1.0 before the int16 range clips.
BEAM_WEIGHT_SCALE = 1 << 14


@dataclass
class CplaneSection:
    section_id: int
    start_prb: int
    num_prb: int  # 0 encodes "all PRBs"
    num_symbol: int = 1
    re_mask: int = 0xFFF
    rb_flag: bool = False
    sym_inc: bool = False
    extension_flag: bool = False
    beam_id: int = 0
    beam_weights: tuple[complex, ...] | None = None  # one per RU port when present


@dataclass
class St3Extras:
    time_offset: int = 0  # microseconds from slot start to the occasion
    frame_structure: int = 0
    cp_length: int = 0  # microseconds
    freq_offset: int = 0  # signed, carried verbatim


@dataclass
class CplaneMessage:
    frame_id: int
    subframe_id: int
    slot_id: int
    start_symbol_id: int
    section_type: SectionType
    sections: list[CplaneSection] = field(default_factory=list)
    st3: St3Extras | None = None


@dataclass
class UplaneSection:
    section_id: int
    start_prb: int
    num_prb: int  # 0 encodes "all PRBs"
    prbs: list[PrbBlock] = field(default_factory=list)
    rb_flag: bool = False
    sym_inc: bool = False


@dataclass
class UplaneMessage:
    frame_id: int
    subframe_id: int
    slot_id: int
    symbol_id: int
    sections: list[UplaneSection] = field(default_factory=list)


def _check(value: int, width: int, name: str) -> int:
    if not 0 <= value < (1 << width):
        raise EncodeError(f"field {name}={value} does not fit in {width} bits")
    return value


def _encode_cplane_section(w: BitWriter, s: CplaneSection, ru_ports: int | None) -> None:
    w.write(_check(s.section_id, 12, "section_id"), 12)
    w.write(1 if s.rb_flag else 0, 1)
    w.write(1 if s.sym_inc else 0, 1)
    w.write(_check(s.start_prb, 10, "start_prb"), 10)
    w.write(_check(s.num_prb, 8, "num_prb"), 8)
    w.write(_check(s.re_mask, 12, "re_mask"), 12)
    w.write(_check(s.num_symbol, 4, "num_symbol"), 4)
    if s.extension_flag != (s.beam_weights is not None):
        raise EncodeError("beam_weights must be present exactly when extension_flag is set")
    w.write(1 if s.extension_flag else 0, 1)
    w.write(_check(s.beam_id, 15, "beam_id"), 15)
    if s.beam_weights is not None:
        if ru_ports is not None and len(s.beam_weights) != ru_ports:
            raise EncodeError(
                f"beam_weights carries {len(s.beam_weights)} entries, expected {ru_ports} RU ports"
            )
        w.write(_check(len(s.beam_weights), 8, "num_weights"), 8)
        for wt in s.beam_weights:
            w.write_signed(int(wt.real), 16)
            w.write_signed(int(wt.imag), 16)
    w.pad_to_byte()


def encode_cplane(msg: CplaneMessage, ru_ports: int | None = None) -> bytes:
    """Serialize a control-plane message to eCPRI payload bytes.

    ``ru_ports``, when given, is enforced against inline beam weight counts.
    """
    if not msg.sections:
        raise EncodeError("control-plane message must carry at least one section")
    if len(msg.sections) > 0xFF:
        raise EncodeError(f"{len(msg.sections)} sections exceed the 8-bit count")
    if (msg.section_type == SectionType.ST3) != (msg.st3 is not None):
        raise EncodeError("st3 extras must be present exactly for section type 3")
    w = BitWriter()
    w.write(_check(msg.frame_id, 8, "frame_id"), 8)
    w.write(_check(msg.subframe_id, 4, "subframe_id"), 4)
    w.write(_check(msg.slot_id, 6, "slot_id"), 6)
    w.write(_check(msg.start_symbol_id, 6, "start_symbol_id"), 6)
    w.write(int(msg.section_type), 8)
    w.write(len(msg.sections), 8)
    if msg.st3 is not None:
        w.write(_check(msg.st3.time_offset, 16, "time_offset"), 16)
        w.write(_check(msg.st3.frame_structure, 8, "frame_structure"), 8)
        w.write(_check(msg.st3.cp_length, 16, "cp_length"), 16)
        w.write_signed(msg.st3.freq_offset, 24)
    for s in msg.sections:
        _encode_cplane_section(w, s, ru_ports)
    return w.getvalue()


def decode_cplane(payload: bytes, ru_ports: int | None = None) -> CplaneMessage:
    """Inverse of :func:`encode_cplane`."""
    r = BitReader(payload)
    try:
        frame_id = r.read(8)
        subframe_id = r.read(4)
        slot_id = r.read(6)
        start_symbol_id = r.read(6)
        st_raw = r.read(8)
        try:
            section_type = SectionType(st_raw)
        except ValueError:
            raise DecodeError(f"unknown section type {st_raw}") from None
        n_sections = r.read(8)
        if n_sections == 0:
            raise DecodeError("control-plane message carries zero sections")
        st3 = None
        if section_type == SectionType.ST3:
            st3 = St3Extras(
                time_offset=r.read(16),
                frame_structure=r.read(8),
                cp_length=r.read(16),
                freq_offset=r.read_signed(24),
            )
        sections = []
        for _ in range(n_sections):
            section_id = r.read(12)
            rb_flag = bool(r.read(1))
            sym_inc = bool(r.read(1))
            start_prb = r.read(10)
            num_prb = r.read(8)
            re_mask = r.read(12)
            num_symbol = r.read(4)
            ef = bool(r.read(1))
            beam_id = r.read(15)
            weights: tuple[complex, ...] | None = None
            if ef:
                count = r.read(8)
                if ru_ports is not None and count != ru_ports:
                    raise DecodeError(
                        f"inline beam weights carry {count} entries, expected {ru_ports} RU ports"
                    )
                weights = tuple(
                    complex(r.read_signed(16), r.read_signed(16)) for _ in range(count)
                )
            r.align_byte()
            sections.append(
                CplaneSection(
                    section_id=section_id,
                    rb_flag=rb_flag,
                    sym_inc=sym_inc,
                    start_prb=start_prb,
                    num_prb=num_prb,
                    re_mask=re_mask,
                    num_symbol=num_symbol,
                    extension_flag=ef,
                    beam_id=beam_id,
                    beam_weights=weights,
                )
            )
    except EOFError:
        raise DecodeError("control-plane payload truncated") from None
    if not r.exhausted():
        raise DecodeError(f"{r.remaining_bits} trailing bits after the last section")
    return CplaneMessage(
        frame_id=frame_id,
        subframe_id=subframe_id,
        slot_id=slot_id,
        start_symbol_id=start_symbol_id,
        section_type=section_type,
        sections=sections,
        st3=st3,
    )


def encode_uplane(msg: UplaneMessage) -> bytes:
    """Serialize a user-plane IQ message to eCPRI payload bytes."""
    if not msg.sections:
        raise EncodeError("user-plane message must carry at least one section")
    if len(msg.sections) > 0xFF:
        raise EncodeError(f"{len(msg.sections)} sections exceed the 8-bit count")
    w = BitWriter()
    w.write(_check(msg.frame_id, 8, "frame_id"), 8)
    w.write(_check(msg.subframe_id, 4, "subframe_id"), 4)
    w.write(_check(msg.slot_id, 6, "slot_id"), 6)
    w.write(_check(msg.symbol_id, 6, "symbol_id"), 6)
    w.write(len(msg.sections), 8)
    for s in msg.sections:
        if not s.prbs:
            raise EncodeError(f"section {s.section_id} carries no PRB blocks")
        if s.num_prb and len(s.prbs) != s.num_prb:
            raise EncodeError(
                f"section {s.section_id} carries {len(s.prbs)} PRB blocks but num_prb={s.num_prb}"
            )
        w.write(_check(s.section_id, 12, "section_id"), 12)
        w.write(1 if s.rb_flag else 0, 1)
        w.write(1 if s.sym_inc else 0, 1)
        w.write(_check(s.start_prb, 10, "start_prb"), 10)
        w.write(_check(s.num_prb, 8, "num_prb"), 8)
        for block in s.prbs:
            w.write(block.exponent, 4)
            for i, q in block.mantissas:
                w.write_signed(i, 9)
                w.write_signed(q, 9)
        w.pad_to_byte()
    return w.getvalue()


def decode_uplane(payload: bytes, all_prb_count: int | None = None) -> UplaneMessage:
    """Inverse of :func:`encode_uplane`.

    ``all_prb_count`` supplies the carrier width for sections using the
    num_prb == 0 ("all PRBs") form; without it such sections are rejected.
    """
    r = BitReader(payload)
    try:
        frame_id = r.read(8)
        subframe_id = r.read(4)
        slot_id = r.read(6)
        symbol_id = r.read(6)
        n_sections = r.read(8)
        if n_sections == 0:
            raise DecodeError("user-plane message carries zero sections")
        sections = []
        for _ in range(n_sections):
            section_id = r.read(12)
            rb_flag = bool(r.read(1))
            sym_inc = bool(r.read(1))
            start_prb = r.read(10)
            num_prb = r.read(8)
            effective = num_prb
            if effective == 0:
                if all_prb_count is None:
                    raise DecodeError(
                        f"section {section_id} uses num_prb=0 but no carrier PRB count was given"
                    )
                effective = all_prb_count
            prbs = []
            for _ in range(effective):
                exponent = r.read(4)
                pairs = tuple(
                    (r.read_signed(9), r.read_signed(9)) for _ in range(SAMPLES_PER_PRB)
                )
                prbs.append(PrbBlock(exponent=exponent, mantissas=pairs))
            r.align_byte()
            sections.append(
                UplaneSection(
                    section_id=section_id,
                    rb_flag=rb_flag,
                    sym_inc=sym_inc,
                    start_prb=start_prb,
                    num_prb=num_prb,
                    prbs=prbs,
                )
            )
    except EOFError:
        raise DecodeError("user-plane payload truncated") from None
    if not r.exhausted():
        raise DecodeError(f"{r.remaining_bits} trailing bits after the last section")
    return UplaneMessage(
        frame_id=frame_id,
        subframe_id=subframe_id,
        slot_id=slot_id,
        symbol_id=symbol_id,
        sections=sections,
    )
