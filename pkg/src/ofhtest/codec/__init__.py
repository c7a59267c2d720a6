"""Bit-exact encoders/decoders for the fronthaul transport and IQ payloads.

Covers the eCPRI transport header, eAxC endpoint addressing, control-plane
section messages (section types 1 and 3), user-plane IQ messages with
block-floating-point compression, and the capture-file format used for
evidence logs. All functions here are pure: same input, same bytes.
"""

from ofhtest.codec.bits import BitReader, BitWriter
from ofhtest.codec.eaxc import DEFAULT_EAXC_LAYOUT, EaxcId, EaxcLayout, pack_eaxc, unpack_eaxc
from ofhtest.codec.ecpri import (
    ECPRI_HEADER_LEN,
    DecodeError,
    EcpriHeader,
    EcpriMessageType,
    EncodeError,
    decode_ecpri,
    encode_ecpri,
)
from ofhtest.codec.bfp import (
    MANTISSA_MAX,
    MANTISSA_MIN,
    SAMPLES_PER_PRB,
    PrbBlock,
    bfp_compress,
    bfp_decompress,
    blocks_from_arrays,
    compress_array,
    decompress_array,
)
from ofhtest.codec.sections import (
    BEAM_WEIGHT_SCALE,
    CplaneMessage,
    CplaneSection,
    SectionType,
    St3Extras,
    UplaneMessage,
    UplaneSection,
    decode_cplane,
    decode_uplane,
    encode_cplane,
    encode_uplane,
)
from ofhtest.codec.capture import (
    DIR_RU_TO_TESTER,
    DIR_TESTER_TO_RU,
    CaptureRecord,
    read_capture,
    write_capture,
)

__all__ = [
    "BitReader",
    "BitWriter",
    "DEFAULT_EAXC_LAYOUT",
    "EaxcId",
    "EaxcLayout",
    "pack_eaxc",
    "unpack_eaxc",
    "ECPRI_HEADER_LEN",
    "DecodeError",
    "EncodeError",
    "EcpriHeader",
    "EcpriMessageType",
    "decode_ecpri",
    "encode_ecpri",
    "MANTISSA_MAX",
    "MANTISSA_MIN",
    "SAMPLES_PER_PRB",
    "PrbBlock",
    "bfp_compress",
    "bfp_decompress",
    "blocks_from_arrays",
    "compress_array",
    "decompress_array",
    "CplaneMessage",
    "CplaneSection",
    "BEAM_WEIGHT_SCALE",
    "SectionType",
    "St3Extras",
    "UplaneMessage",
    "UplaneSection",
    "decode_cplane",
    "decode_uplane",
    "encode_cplane",
    "encode_uplane",
    "DIR_RU_TO_TESTER",
    "DIR_TESTER_TO_RU",
    "CaptureRecord",
    "read_capture",
    "write_capture",
]
