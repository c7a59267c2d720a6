"""MSB-first bit packing helpers.

Section payloads mix byte-aligned fields with sub-byte ones (4-bit
exponents, 9-bit mantissas, 15-bit beam ids), so the message codecs are
written against a small bit-stream abstraction instead of struct formats.
Writers emit whole bytes eagerly to stay O(n) on large IQ payloads.
"""

from __future__ import annotations


class BitWriter:
    """Accumulates values MSB-first into a byte string."""

    def __init__(self) -> None:
        self._out = bytearray()
        self._acc = 0
        self._nbits = 0

    def write(self, value: int, width: int) -> None:
        if width <= 0:
            raise ValueError("width must be positive")
        if not 0 <= value < (1 << width):
            raise ValueError(f"value {value} does not fit in {width} unsigned bits")
        self._acc = (self._acc << width) | value
        self._nbits += width
        while self._nbits >= 8:
            self._nbits -= 8
            self._out.append((self._acc >> self._nbits) & 0xFF)
        self._acc &= (1 << self._nbits) - 1

    def write_signed(self, value: int, width: int) -> None:
        lo = -(1 << (width - 1))
        hi = (1 << (width - 1)) - 1
        if not lo <= value <= hi:
            raise ValueError(f"value {value} does not fit in {width} signed bits")
        self.write(value & ((1 << width) - 1), width)

    def pad_to_byte(self) -> None:
        if self._nbits:
            self.write(0, 8 - self._nbits)

    @property
    def bit_length(self) -> int:
        return len(self._out) * 8 + self._nbits

    def getvalue(self) -> bytes:
        if self._nbits:
            raise ValueError("bit stream not byte aligned; call pad_to_byte()")
        return bytes(self._out)


class BitReader:
    """Consumes values MSB-first from a byte string."""

    def __init__(self, data: bytes) -> None:
        self._data = data
        self._pos = 0  # byte cursor
        self._acc = 0
        self._nbits = 0

    def read(self, width: int) -> int:
        if width <= 0:
            raise ValueError("width must be positive")
        while self._nbits < width:
            if self._pos >= len(self._data):
                raise EOFError("bit stream exhausted")
            self._acc = (self._acc << 8) | self._data[self._pos]
            self._pos += 1
            self._nbits += 8
        self._nbits -= width
        value = (self._acc >> self._nbits) & ((1 << width) - 1)
        self._acc &= (1 << self._nbits) - 1
        return value

    def read_signed(self, width: int) -> int:
        raw = self.read(width)
        if raw >= 1 << (width - 1):
            raw -= 1 << width
        return raw

    def align_byte(self) -> None:
        """Discard bits up to the next byte boundary (must be zero padding)."""
        if self._nbits % 8:
            pad = self.read(self._nbits % 8)
            if pad:
                raise ValueError("nonzero padding bits")

    @property
    def remaining_bits(self) -> int:
        return (len(self._data) - self._pos) * 8 + self._nbits

    def exhausted(self) -> bool:
        return self.remaining_bits == 0
