"""CU-plane stimulus and measurement.

Builds the modulated resource grids used as test payload, wraps them in
correctly timed control- and user-plane message flows, and provides the
virtual analyzer half: waveform comparison, beam-direction extraction,
PRACH preamble correlation, and reception-window bookkeeping.
"""

from ofhtest.cuplane.analyzer import (
    Counters,
    MeasurementResult,
    analyze_dl_output,
    classify_arrival,
    evaluate_dlm,
)
from ofhtest.cuplane.beams import (
    BeamEntry,
    BeamTable,
    beam_table_from_json,
    beam_table_to_json,
    detect_beam_direction,
    make_steering_table,
    steering_vector,
)
from ofhtest.cuplane.carrier import CarrierConfig
from ofhtest.cuplane.flows import (
    DelayWindow,
    PrachConfig,
    PrachOccasion,
    SeqCounter,
    TimedFrame,
    build_dl_flow,
    build_prach_st3_flow,
    build_ul_flow,
)
from ofhtest.cuplane.grid import Allocation, WaveformSpec, generate_grid
from ofhtest.cuplane.modulation import Modulation, bits_per_symbol, modulate
from ofhtest.cuplane.pn23 import pn23_bits, pn23_state_sequence
from ofhtest.cuplane.zadoff_chu import correlate_preamble, zadoff_chu

__all__ = [
    "Allocation",
    "BeamEntry",
    "BeamTable",
    "CarrierConfig",
    "Counters",
    "DelayWindow",
    "MeasurementResult",
    "Modulation",
    "PrachConfig",
    "PrachOccasion",
    "SeqCounter",
    "TimedFrame",
    "WaveformSpec",
    "analyze_dl_output",
    "beam_table_from_json",
    "beam_table_to_json",
    "bits_per_symbol",
    "build_dl_flow",
    "build_prach_st3_flow",
    "build_ul_flow",
    "classify_arrival",
    "correlate_preamble",
    "detect_beam_direction",
    "evaluate_dlm",
    "generate_grid",
    "make_steering_table",
    "modulate",
    "pn23_bits",
    "pn23_state_sequence",
    "steering_vector",
    "zadoff_chu",
]
