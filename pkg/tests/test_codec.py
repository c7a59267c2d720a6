"""Transport header, eAxC addressing, bit packing, and capture format."""

from __future__ import annotations

import io

import pytest
from hypothesis import given, strategies as st

from ofhtest.codec import (
    CaptureRecord,
    DecodeError,
    EaxcId,
    EaxcLayout,
    EcpriHeader,
    EcpriMessageType,
    EncodeError,
    BitReader,
    BitWriter,
    decode_ecpri,
    encode_ecpri,
    pack_eaxc,
    read_capture,
    unpack_eaxc,
    write_capture,
)


def test_bitwriter_msb_first():
    w = BitWriter()
    w.write(0b101, 3)
    w.write(0b00001, 5)
    assert w.getvalue() == bytes([0b10100001])


def test_bitwriter_rejects_oversized_value():
    w = BitWriter()
    with pytest.raises(ValueError):
        w.write(8, 3)


def test_bitreader_signed_round_trip():
    w = BitWriter()
    w.write_signed(-256, 9)
    w.write_signed(255, 9)
    w.write_signed(-1, 9)
    w.pad_to_byte()
    r = BitReader(w.getvalue())
    assert r.read_signed(9) == -256
    assert r.read_signed(9) == 255
    assert r.read_signed(9) == -1


def test_bitreader_rejects_nonzero_padding():
    r = BitReader(bytes([0b10000001]))
    r.read(4)
    with pytest.raises(ValueError):
        r.align_byte()


@given(st.data())
def test_bit_stream_round_trip(data):
    fields = data.draw(
        st.lists(
            st.integers(min_value=1, max_value=24).flatmap(
                lambda w: st.tuples(st.just(w), st.integers(0, (1 << w) - 1))
            ),
            min_size=1,
            max_size=40,
        )
    )
    w = BitWriter()
    for width, value in fields:
        w.write(value, width)
    w.pad_to_byte()
    r = BitReader(w.getvalue())
    for width, value in fields:
        assert r.read(width) == value


# --- eAxC -------------------------------------------------------------


def test_pack_eaxc_default_layout_examples():
    assert pack_eaxc(EaxcId(0, 0, 0, 0)) == 0x0000
    assert pack_eaxc(EaxcId(du_port=1, band_sector=2, cc=3, ru_port=4)) == 0x1234


def test_pack_eaxc_uneven_layout():
    layout = EaxcLayout(du_port_bits=2, band_sector_bits=6, cc_bits=4, ru_port_bits=4)
    assert pack_eaxc(EaxcId(du_port=3, ru_port=1), layout) == 0xC001


def test_pack_eaxc_field_overflow():
    with pytest.raises(ValueError):
        pack_eaxc(EaxcId(du_port=16))


def test_eaxc_layout_must_sum_to_16():
    with pytest.raises(ValueError):
        EaxcLayout(4, 4, 4, 5)


def _layouts():
    widths = st.integers(min_value=1, max_value=13)
    return (
        st.tuples(widths, widths, widths)
        .filter(lambda t: sum(t) <= 15)
        .map(lambda t: EaxcLayout(t[0], t[1], t[2], 16 - sum(t)))
    )


@given(st.data())
def test_eaxc_round_trip_any_layout(data):
    layout = data.draw(_layouts())
    eaxc = EaxcId(
        du_port=data.draw(st.integers(0, (1 << layout.du_port_bits) - 1)),
        band_sector=data.draw(st.integers(0, (1 << layout.band_sector_bits) - 1)),
        cc=data.draw(st.integers(0, (1 << layout.cc_bits) - 1)),
        ru_port=data.draw(st.integers(0, (1 << layout.ru_port_bits) - 1)),
    )
    assert unpack_eaxc(pack_eaxc(eaxc, layout), layout) == eaxc


@given(st.integers(0, 0xFFFF))
def test_eaxc_word_round_trip(word):
    assert pack_eaxc(unpack_eaxc(word)) == word


# --- eCPRI ------------------------------------------------------------


def test_encode_ecpri_empty_iq_frame():
    header = EcpriHeader(message_type=EcpriMessageType.IQ_DATA)
    assert encode_ecpri(header, b"") == bytes.fromhex("10 00 00 00 00 00 00 80".replace(" ", ""))


def test_encode_ecpri_control_frame():
    header = EcpriHeader(
        message_type=EcpriMessageType.RT_CONTROL,
        eaxc=EaxcId(ru_port=1),
        sequence_id=0x05,
    )
    frame = encode_ecpri(header, bytes.fromhex("AABBCCDD"))
    assert frame == bytes.fromhex("1002000400010580AABBCCDD")


def test_decode_rejects_short_frame():
    with pytest.raises(DecodeError):
        decode_ecpri(b"\x10\x00\x00")


def test_decode_rejects_unknown_message_type():
    frame = bytearray(encode_ecpri(EcpriHeader(message_type=EcpriMessageType.IQ_DATA), b""))
    frame[1] = 7
    with pytest.raises(DecodeError):
        decode_ecpri(bytes(frame))


def test_decode_rejects_size_mismatch():
    frame = encode_ecpri(EcpriHeader(message_type=EcpriMessageType.IQ_DATA), b"\x01\x02")
    with pytest.raises(DecodeError):
        decode_ecpri(frame + b"\x00")
    with pytest.raises(DecodeError):
        decode_ecpri(frame[:-1])


def test_encode_rejects_stale_payload_size():
    header = EcpriHeader(message_type=EcpriMessageType.IQ_DATA, payload_size=3)
    with pytest.raises(EncodeError):
        encode_ecpri(header, b"\x00")


@given(
    st.sampled_from([EcpriMessageType.IQ_DATA, EcpriMessageType.RT_CONTROL]),
    st.integers(0, 15),
    st.integers(0, 15),
    st.integers(0, 15),
    st.integers(0, 15),
    st.integers(0, 255),
    st.integers(0, 127),
    st.booleans(),
    st.booleans(),
    st.binary(max_size=64),
)
def test_ecpri_round_trip(mtype, du, bs, cc, ru, seq, subseq, ebit, concat, payload):
    header = EcpriHeader(
        message_type=mtype,
        eaxc=EaxcId(du, bs, cc, ru),
        sequence_id=seq,
        subsequence_id=subseq,
        e_bit=ebit,
        concatenation=concat,
        payload_size=len(payload),
    )
    decoded, got_payload = decode_ecpri(encode_ecpri(header, payload))
    assert decoded == header
    assert got_payload == payload


# --- capture files ----------------------------------------------------


def test_capture_round_trip():
    records = [
        CaptureRecord(time_ns=0, direction=0, frame=b""),
        CaptureRecord(time_ns=123_456_789, direction=1, frame=b"\x00\x01\x02"),
        CaptureRecord(time_ns=2**40, direction=0, frame=bytes(range(256))),
    ]
    buf = io.BytesIO()
    assert write_capture(buf, records) == 3
    buf.seek(0)
    assert read_capture(buf) == records


def test_capture_rejects_bad_direction():
    with pytest.raises(ValueError):
        write_capture(io.BytesIO(), [CaptureRecord(time_ns=0, direction=2, frame=b"")])


def test_capture_rejects_truncation():
    buf = io.BytesIO()
    write_capture(buf, [CaptureRecord(time_ns=1, direction=1, frame=b"abcdef")])
    data = buf.getvalue()
    with pytest.raises(ValueError):
        read_capture(io.BytesIO(data[:-2]))
    with pytest.raises(ValueError):
        read_capture(io.BytesIO(data + data[:5]))


@given(
    st.lists(
        st.tuples(st.integers(0, 2**63 - 1), st.integers(0, 1), st.binary(max_size=128)),
        max_size=20,
    )
)
def test_capture_round_trip_random(items):
    records = [CaptureRecord(t, d, f) for t, d, f in items]
    buf = io.BytesIO()
    write_capture(buf, records)
    buf.seek(0)
    assert read_capture(buf) == records
