"""eCPRI transport header codec.

Every fronthaul frame in the harness starts with the 8-byte eCPRI common
header carrying the message type and the eAxC flow id:

    byte 0      revision(4) | reserved(3) | concatenation(1)
    byte 1      message type (0 = IQ data, 2 = real-time control)
    bytes 2-3   payload size, big endian
    bytes 4-5   eAxC id, big endian (see eaxc.py for the subfield split)
    byte 6      sequence id
    byte 7      e-bit(1) | subsequence id(7)

The payload size field always reflects the payload that actually follows;
encode fills it in and decode rejects any disagreement with the buffer, so
truncated or padded frames fail loudly instead of shearing the IQ stream.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field

from ofhtest.codec.eaxc import DEFAULT_EAXC_LAYOUT, EaxcId, EaxcLayout, pack_eaxc, unpack_eaxc

ECPRI_HEADER_LEN = 8


class EncodeError(ValueError):
    """Raised when a message cannot be represented on the wire."""


class DecodeError(ValueError):
    """Raised when wire bytes do not parse as a valid message."""


class EcpriMessageType(enum.IntEnum):
    IQ_DATA = 0
    RT_CONTROL = 2


@dataclass
class EcpriHeader:
    message_type: EcpriMessageType
    eaxc: EaxcId = field(default_factory=EaxcId)
    sequence_id: int = 0
    subsequence_id: int = 0
    e_bit: bool = True
    concatenation: bool = False
    protocol_revision: int = 1
    payload_size: int = 0


def encode_ecpri(
    header: EcpriHeader,
    payload: bytes,
    layout: EaxcLayout = DEFAULT_EAXC_LAYOUT,
) -> bytes:
    """Serialize header + payload into one frame.

    The size field is computed from ``payload``; if the header carries a
    nonzero ``payload_size`` it must agree, which keeps accidental reuse of
    stale headers from producing self-inconsistent frames.
    """
    if not 0 <= header.protocol_revision <= 0xF:
        raise EncodeError(f"protocol_revision {header.protocol_revision} exceeds 4 bits")
    if not 0 <= header.sequence_id <= 0xFF:
        raise EncodeError(f"sequence_id {header.sequence_id} exceeds 8 bits")
    if not 0 <= header.subsequence_id <= 0x7F:
        raise EncodeError(f"subsequence_id {header.subsequence_id} exceeds 7 bits")
    if len(payload) > 0xFFFF:
        raise EncodeError(f"payload of {len(payload)} bytes exceeds the 16-bit size field")
    if header.payload_size and header.payload_size != len(payload):
        raise EncodeError(
            f"header payload_size {header.payload_size} disagrees with payload length {len(payload)}"
        )
    first = (header.protocol_revision << 4) | (1 if header.concatenation else 0)
    last = ((1 if header.e_bit else 0) << 7) | header.subsequence_id
    packed = struct.pack(
        "!BBHHBB",
        first,
        int(header.message_type),
        len(payload),
        pack_eaxc(header.eaxc, layout),
        header.sequence_id,
        last,
    )
    return packed + payload


def decode_ecpri(
    frame: bytes,
    layout: EaxcLayout = DEFAULT_EAXC_LAYOUT,
) -> tuple[EcpriHeader, bytes]:
    """Parse one frame into (header, payload)."""
    if len(frame) < ECPRI_HEADER_LEN:
        raise DecodeError(f"frame of {len(frame)} bytes is shorter than the 8-byte header")
    first, mtype, size, eaxc_word, seq, last = struct.unpack("!BBHHBB", frame[:ECPRI_HEADER_LEN])
    if first & 0x0E:
        raise DecodeError("reserved bits set in the first header byte")
    try:
        message_type = EcpriMessageType(mtype)
    except ValueError:
        raise DecodeError(f"unknown eCPRI message type {mtype}") from None
    payload = frame[ECPRI_HEADER_LEN:]
    if size != len(payload):
        raise DecodeError(
            f"payload size field says {size} bytes but {len(payload)} bytes follow the header"
        )
    header = EcpriHeader(
        message_type=message_type,
        eaxc=unpack_eaxc(eaxc_word, layout),
        sequence_id=seq,
        subsequence_id=last & 0x7F,
        e_bit=bool(last & 0x80),
        concatenation=bool(first & 0x01),
        protocol_revision=first >> 4,
        payload_size=size,
    )
    return header, payload
