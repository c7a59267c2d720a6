"""Capture-file format for evidence logs.

A capture is a flat sequence of records, each:

    u64 big-endian   simulated time in nanoseconds
    u8               direction (0 = tester to RU, 1 = RU to tester)
    u32 big-endian   frame length
    bytes            the frame

The format holds raw fronthaul frames and serialized management envelopes
alike; readers get bytes back exactly as written, which is what makes the
files usable as replayable evidence.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import BinaryIO, Iterable

DIR_TESTER_TO_RU = 0
DIR_RU_TO_TESTER = 1

_HEADER = struct.Struct("!QBI")


@dataclass(frozen=True)
class CaptureRecord:
    time_ns: int
    direction: int
    frame: bytes


def write_capture(fp: BinaryIO, records: Iterable[CaptureRecord]) -> int:
    """Append records to a binary stream; returns the number written."""
    count = 0
    for rec in records:
        if rec.direction not in (DIR_TESTER_TO_RU, DIR_RU_TO_TESTER):
            raise ValueError(f"direction {rec.direction} is not 0 or 1")
        if rec.time_ns < 0:
            raise ValueError("record time must be non-negative")
        fp.write(_HEADER.pack(rec.time_ns, rec.direction, len(rec.frame)))
        fp.write(rec.frame)
        count += 1
    return count


def read_capture(fp: BinaryIO) -> list[CaptureRecord]:
    """Read records until EOF; truncated trailing data raises."""
    records = []
    while True:
        head = fp.read(_HEADER.size)
        if not head:
            return records
        if len(head) < _HEADER.size:
            raise ValueError("truncated capture record header")
        time_ns, direction, length = _HEADER.unpack(head)
        frame = fp.read(length)
        if len(frame) < length:
            raise ValueError("truncated capture record frame")
        records.append(CaptureRecord(time_ns=time_ns, direction=direction, frame=frame))
