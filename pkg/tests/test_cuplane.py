"""Payload generation, flow construction, and analyzer measurement tests."""

import json
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ofhtest.codec import (
    EaxcId,
    EcpriMessageType,
    SectionType,
    bfp_decompress,
    decode_cplane,
    decode_ecpri,
    decode_uplane,
)
from ofhtest.cuplane import (
    Allocation,
    CarrierConfig,
    Counters,
    DelayWindow,
    Modulation,
    PrachConfig,
    SeqCounter,
    WaveformSpec,
    analyze_dl_output,
    beam_table_from_json,
    beam_table_to_json,
    build_dl_flow,
    build_prach_st3_flow,
    build_ul_flow,
    classify_arrival,
    correlate_preamble,
    detect_beam_direction,
    evaluate_dlm,
    generate_grid,
    make_steering_table,
    modulate,
    pn23_bits,
    pn23_state_sequence,
    steering_vector,
    zadoff_chu,
)
from ofhtest.cuplane.analyzer import normalized_grid_error
from ofhtest.cuplane.beams import BeamEntry
from ofhtest.cuplane.grid import RMS_TARGET


class TestPn23:
    def test_first_bit_from_all_ones_seed(self):
        assert pn23_bits(0x7FFFFF, 1)[0] == 1

    def test_zero_seed_rejected(self):
        with pytest.raises(ValueError):
            pn23_bits(0, 4)
        with pytest.raises(ValueError):
            pn23_bits(1 << 23, 4)

    def test_deterministic(self):
        assert np.array_equal(pn23_bits(0x00ACE1, 512), pn23_bits(0x00ACE1, 512))

    def test_no_state_repeats_within_a_million_steps(self):
        states = pn23_state_sequence(0x7FFFFF, 1_000_000)
        assert np.unique(states).size == states.size
        assert not np.any(states == 0)  # the zero state is unreachable

    def test_output_bits_are_the_register_msb_walk(self):
        # cross-check bit output against the recorded state sequence: the
        # bit emitted at step k+1 is the MSB of the state after step k
        seed = 0x5A5A5A & 0x7FFFFF
        bits = pn23_bits(seed, 200)
        states = pn23_state_sequence(seed, 200)
        for k in range(199):
            assert bits[k + 1] == (int(states[k]) >> 22) & 1


class TestModulation:
    def test_qpsk_gray_map(self):
        pts = modulate(np.array([0, 0, 0, 1, 1, 0, 1, 1]), Modulation.QPSK)
        s = 1 / np.sqrt(2)
        assert pts == pytest.approx([s + 1j * s, s - 1j * s, -s + 1j * s, -s - 1j * s])

    @pytest.mark.parametrize(
        "modulation,k,expected_levels",
        [
            (Modulation.QPSK, 2, {1}),
            (Modulation.QAM64, 6, {1, 3, 5, 7}),
            (Modulation.QAM256, 8, {1, 3, 5, 7, 9, 11, 13, 15}),
        ],
    )
    def test_constellation_levels_and_power(self, modulation, k, expected_levels):
        # exhaustive bit patterns: one symbol per constellation point
        n = 1 << k
        bits = np.array([(v >> (k - 1 - j)) & 1 for v in range(n) for j in range(k)])
        points = modulate(bits, modulation)
        assert len(set(np.round(points, 12))) == n
        norm = {Modulation.QPSK: 2, Modulation.QAM64: 42, Modulation.QAM256: 170}[modulation]
        levels = set(np.round(np.abs(points.real) * np.sqrt(norm)).astype(int))
        assert levels == expected_levels
        # unit average power is the TS 38.211 normalization
        assert np.mean(np.abs(points) ** 2) == pytest.approx(1.0, abs=1e-12)

    def test_ragged_bit_count_rejected(self):
        with pytest.raises(ValueError):
            modulate(np.array([0, 1, 0]), Modulation.QPSK)


class TestCarrier:
    def test_numerology_one_defaults(self):
        c = CarrierConfig()
        assert c.scs_khz == 30
        assert c.slots_per_subframe == 2
        assert c.slot_ns == 500_000
        assert c.n_prb == 133 and c.ru_ports == 32

    def test_symbol_boundaries_tile_the_slot(self):
        c = CarrierConfig()
        offsets = [c.symbol_offset_ns(k) for k in range(14)]
        assert offsets[0] == 0
        assert offsets == sorted(offsets)
        durations = [b - a for a, b in zip(offsets, offsets[1:])] + [c.slot_ns - offsets[-1]]
        assert sum(durations) == c.slot_ns
        assert max(durations) - min(durations) <= 1

    def test_tdd_pattern_lookup(self):
        c = CarrierConfig()
        kinds = [c.slot_kind(*c.slot_coords(i)) for i in range(10)]
        assert "".join(kinds) == "DDDSUDDDSU"
        assert c.next_slot_of_kind("U") == c.slot_coords(4)
        assert c.next_slot_of_kind("U", 5) == c.slot_coords(9)

    def test_bad_pattern_rejected(self):
        with pytest.raises(ValueError):
            CarrierConfig(tdd_pattern="DDXU")
        with pytest.raises(ValueError):
            CarrierConfig(tdd_pattern="")

    @given(index=st.integers(0, 10_000))
    def test_slot_coords_inverts_slot_index(self, index):
        c = CarrierConfig()
        assert c.slot_index(*c.slot_coords(index)) == index


class TestGrid:
    def test_empty_allocation_is_silent(self):
        g = generate_grid(CarrierConfig(), WaveformSpec(), Allocation(num_prb=0))
        assert not np.any(g)

    def test_full_band_populates_every_re(self):
        g = generate_grid(CarrierConfig(), WaveformSpec(), Allocation())
        assert g.shape == (133 * 12, 14)
        for k in range(14):
            assert np.count_nonzero(g[:, k]) == 133 * 12

    def test_partial_allocation_stays_in_window(self):
        alloc = Allocation(start_prb=10, num_prb=4, start_symbol=2, num_symbol=3)
        g = generate_grid(CarrierConfig(), WaveformSpec(), alloc)
        mask = np.zeros_like(g, dtype=bool)
        mask[120:168, 2:5] = True
        assert np.all(g[~mask] == 0)
        assert np.all(g[mask] != 0)

    def test_rms_target(self):
        g = generate_grid(CarrierConfig(), WaveformSpec(), Allocation())
        rms = np.sqrt(np.mean(np.abs(g[g != 0]) ** 2))
        assert rms == pytest.approx(RMS_TARGET, rel=1e-3)

    def test_samples_are_integer_valued_16bit(self):
        for modulation in Modulation:
            g = generate_grid(
                CarrierConfig(),
                WaveformSpec(modulation=modulation),
                Allocation(num_prb=8),
            )
            assert np.array_equal(g.real, np.round(g.real))
            assert np.array_equal(g.imag, np.round(g.imag))
            assert np.max(np.abs(g.real)) < 32768 and np.max(np.abs(g.imag)) < 32768

    def test_same_seed_same_grid(self):
        a = generate_grid(CarrierConfig(), WaveformSpec(pn23_seed=0x12345), Allocation())
        b = generate_grid(CarrierConfig(), WaveformSpec(pn23_seed=0x12345), Allocation())
        assert np.array_equal(a, b)
        c = generate_grid(CarrierConfig(), WaveformSpec(pn23_seed=0x54321), Allocation())
        assert not np.array_equal(a, c)

    def test_out_of_range_allocation_rejected(self):
        with pytest.raises(ValueError):
            generate_grid(CarrierConfig(), WaveformSpec(), Allocation(start_prb=130, num_prb=4))
        with pytest.raises(ValueError):
            generate_grid(CarrierConfig(), WaveformSpec(), Allocation(start_symbol=10, num_symbol=5))

    def test_zero_payload_seed_rejected(self):
        with pytest.raises(ValueError):
            WaveformSpec(pn23_seed=0)


class TestBeams:
    def test_synthetic_table_shape(self):
        table = make_steering_table()
        assert len(table) == 37
        azimuths = [table.get(i).azimuth_deg for i in range(1, 38)]
        assert azimuths[0] == -45.0 and azimuths[-1] == 45.0
        assert azimuths == sorted(azimuths)

    def test_entry_weights_unit_power(self):
        for entry in make_steering_table().entries.values():
            assert sum(abs(w) ** 2 for w in entry.weights) == pytest.approx(1.0)

    def test_degenerate_weights_rejected(self):
        with pytest.raises(ValueError):
            BeamEntry(weights=(0j,) * 32, azimuth_deg=0.0)
        with pytest.raises(ValueError):
            BeamEntry(weights=(1 + 0j,) * 32, azimuth_deg=0.0)

    def test_detects_conjugate_steering_vector(self):
        sig = steering_vector(30.0) * 250.0
        assert detect_beam_direction(sig) == pytest.approx(30.0, abs=1.0)

    def test_broadside_for_equal_in_phase_ports(self):
        assert detect_beam_direction(np.ones(32)) == 0.0

    def test_single_port_has_no_direction(self):
        sig = np.zeros(32, dtype=complex)
        sig[5] = 3 + 4j
        assert detect_beam_direction(sig) is None

    def test_all_zero_input_has_no_direction(self):
        assert detect_beam_direction(np.zeros(32, dtype=complex)) is None
        assert detect_beam_direction(np.zeros((32, 10), dtype=complex)) is None

    def test_stream_input_matches_snapshot(self):
        w = steering_vector(-17.5)
        stream = np.outer(w, np.exp(1j * np.linspace(0, 3, 50)) * 100.0)
        assert detect_beam_direction(stream) == pytest.approx(-17.5, abs=1.0)

    def test_json_round_trip(self):
        table = make_steering_table(n_entries=5, span_deg=(-10, 10))
        doc = beam_table_to_json(table)
        json.loads(doc)  # well-formed
        back = beam_table_from_json(doc)
        assert back.entries.keys() == table.entries.keys()
        for beam_id, entry in table.entries.items():
            assert back.get(beam_id).azimuth_deg == entry.azimuth_deg
            assert back.get(beam_id).weights == pytest.approx(entry.weights)

    def test_detection_sweep_across_table(self):
        table = make_steering_table()
        for entry in table.entries.values():
            detected = detect_beam_direction(np.array(entry.weights) * 100.0)
            assert detected == pytest.approx(entry.azimuth_deg, abs=1.0)


class TestZadoffChu:
    def test_constant_amplitude(self):
        zc = zadoff_chu(1, 139)
        assert np.abs(zc) == pytest.approx(np.ones(139))

    def test_clean_preamble_scores_unity(self):
        zc = zadoff_chu(1, 139)
        peak, shift = correlate_preamble(zc, 1)
        assert peak == pytest.approx(1.0)
        assert shift == 0

    def test_cyclic_shift_located(self):
        zc = zadoff_chu(1, 139)
        peak, shift = correlate_preamble(np.roll(zc, 17), 1)
        assert peak == pytest.approx(1.0)
        assert shift == 17

    def test_scaling_and_rotation_invariant(self):
        zc = zadoff_chu(7, 139)
        peak, _ = correlate_preamble(zc * 512.0 * np.exp(1j * 0.3), 7)
        assert peak == pytest.approx(1.0)

    def test_wrong_root_rejected_by_threshold(self):
        peak, _ = correlate_preamble(zadoff_chu(2, 139), 1)
        # distinct prime-length roots cross-correlate at 1/sqrt(139)
        assert peak == pytest.approx(1 / np.sqrt(139), abs=1e-9)

    def test_noisy_preamble_still_detected(self):
        rng = np.random.default_rng(5)
        zc = zadoff_chu(1, 139)
        noisy = zc + rng.normal(0, 0.1, 139) + 1j * rng.normal(0, 0.1, 139)
        peak, shift = correlate_preamble(noisy, 1)
        assert peak >= 0.9 and shift == 0

    def test_silence_scores_zero(self):
        peak, _ = correlate_preamble(np.zeros(139, dtype=complex), 1)
        assert peak == 0.0

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            zadoff_chu(0, 139)
        with pytest.raises(ValueError):
            zadoff_chu(1, 140)
        with pytest.raises(ValueError):
            zadoff_chu(5, 15)
        with pytest.raises(ValueError):
            correlate_preamble(np.zeros(64, dtype=complex), 1)


def small_flow(beam_id=0, beam_weights=None):
    carrier = CarrierConfig()
    alloc = Allocation(num_prb=4)
    grid = generate_grid(carrier, WaveformSpec(), alloc)
    frames = build_dl_flow(
        carrier, grid, alloc, frame=1, subframe=0, slot=0,
        beam_id=beam_id, beam_weights=beam_weights,
    )
    return carrier, alloc, grid, frames


class TestFlows:
    def test_dl_slot_is_one_control_plus_fourteen_data(self):
        _, _, _, frames = small_flow()
        assert [f.plane for f in frames] == ["C"] + ["U"] * 14

    def test_control_message_describes_allocation(self):
        carrier, alloc, _, frames = small_flow(beam_id=9)
        header, payload = decode_ecpri(frames[0].frame)
        assert header.message_type == EcpriMessageType.RT_CONTROL
        msg = decode_cplane(payload, ru_ports=carrier.ru_ports)
        assert msg.section_type == SectionType.ST1
        (section,) = msg.sections
        assert (section.start_prb, section.num_prb) == (alloc.start_prb, alloc.num_prb)
        assert section.beam_id == 9
        assert not section.extension_flag and section.beam_weights is None

    def test_inline_weights_ride_the_extension(self):
        weights = tuple(complex(w) for w in steering_vector(10.0))
        carrier, _, _, frames = small_flow(beam_weights=weights)
        _, payload = decode_ecpri(frames[0].frame)
        msg = decode_cplane(payload, ru_ports=carrier.ru_ports)
        assert msg.sections[0].extension_flag
        assert len(msg.sections[0].beam_weights) == 32

    def test_data_frames_carry_the_grid_within_bfp_bound(self):
        carrier, alloc, grid, frames = small_flow()
        re_lo = alloc.start_prb * 12
        for k, tf in enumerate(frames[1:]):
            header, payload = decode_ecpri(tf.frame)
            assert header.message_type == EcpriMessageType.IQ_DATA
            msg = decode_uplane(payload)
            assert msg.symbol_id == k
            (section,) = msg.sections
            recon = []
            for block in section.prbs:
                for i, q in bfp_decompress(block):
                    recon.append(complex(i, q))
                bound = (1 << block.exponent) - 1
                originals = grid[re_lo:re_lo + alloc.num_prb * 12, k]
                for got, want in zip(recon, originals):
                    assert abs(got.real - want.real) <= bound
                    assert abs(got.imag - want.imag) <= bound

    def test_sequence_ids_count_up_per_flow(self):
        _, _, _, frames = small_flow()
        seqs = [decode_ecpri(f.frame)[0].sequence_id for f in frames]
        assert seqs == list(range(15))

    def test_send_times_sit_inside_the_windows(self):
        carrier, alloc, _, frames = small_flow()
        windows = DelayWindow()
        slot_t0 = carrier.slot_start_ns(1, 0, 0)
        assert classify_arrival(windows, "C", frames[0].time_ns, slot_t0) == "ok"
        for k, tf in enumerate(frames[1:]):
            symbol_time = slot_t0 + carrier.symbol_offset_ns(k)
            assert classify_arrival(windows, "U", tf.time_ns, symbol_time) == "ok"

    def test_tdd_discipline_enforced(self):
        carrier = CarrierConfig()
        alloc = Allocation(num_prb=2)
        grid = generate_grid(carrier, WaveformSpec(), alloc)
        with pytest.raises(ValueError):
            build_dl_flow(carrier, grid, alloc, frame=0, subframe=2, slot=0)  # U slot
        with pytest.raises(ValueError):
            build_ul_flow(carrier, alloc, frame=0, subframe=0, slot=0)  # D slot
        with pytest.raises(ValueError):
            build_prach_st3_flow(carrier, PrachConfig(), frame=0, subframe=0, slot=1)  # D slot

    def test_ul_flow_is_one_scheduling_message(self):
        carrier = CarrierConfig()
        alloc = Allocation(num_prb=6)
        frames = build_ul_flow(carrier, alloc, frame=1, subframe=2, slot=0)
        assert len(frames) == 1 and frames[0].plane == "C"
        _, payload = decode_ecpri(frames[0].frame)
        msg = decode_cplane(payload, ru_ports=carrier.ru_ports)
        assert msg.section_type == SectionType.ST1
        assert msg.sections[0].num_prb == 6

    def test_prach_flow_carries_st3_occasion(self):
        carrier = CarrierConfig()
        prach = PrachConfig(root=1, length=139, time_offset_us=25, cp_length_us=12)
        frames, occasion = build_prach_st3_flow(carrier, prach, frame=1, subframe=2, slot=0)
        assert len(frames) == 1
        _, payload = decode_ecpri(frames[0].frame)
        msg = decode_cplane(payload, ru_ports=carrier.ru_ports)
        assert msg.section_type == SectionType.ST3
        assert msg.st3.time_offset == 25 and msg.st3.cp_length == 12
        slot_t0 = carrier.slot_start_ns(1, 2, 0)
        assert occasion.start_ns == slot_t0 + 25_000
        assert (occasion.root, occasion.length) == (1, 139)

    def test_grid_shape_must_match_carrier(self):
        carrier = CarrierConfig()
        with pytest.raises(ValueError):
            build_dl_flow(carrier, np.zeros((12, 14), dtype=complex), Allocation(num_prb=1), 1, 0, 0)

    def test_window_bounds_validated(self):
        with pytest.raises(ValueError):
            DelayWindow(t2a_min_up_ns=300_000, t2a_max_up_ns=200_000)
        with pytest.raises(ValueError):
            DelayWindow(t2a_min_cp_ns=400_000, t2a_max_cp_ns=350_000)

    def test_seq_counter_wraps(self):
        seq = SeqCounter()
        values = [seq.take(7) for _ in range(258)]
        assert values[:2] == [0, 1]
        assert values[255] == 255 and values[256] == 0 and values[257] == 1
        assert seq.take(9) == 0  # independent flow


class TestAnalyzer:
    def test_identical_grids_score_zero(self):
        g = generate_grid(CarrierConfig(), WaveformSpec(), Allocation(num_prb=3))
        result = analyze_dl_output(g, g)
        assert result.verdict == "PASS"
        assert result.normalized_error == 0.0

    def test_zero_emission_scores_one(self):
        g = generate_grid(CarrierConfig(), WaveformSpec(), Allocation(num_prb=3))
        result = analyze_dl_output(np.zeros_like(g), g)
        assert result.verdict == "FAIL"
        assert result.normalized_error == 1.0

    def test_uniform_gain_is_absorbed(self):
        g = generate_grid(CarrierConfig(), WaveformSpec(), Allocation(num_prb=3))
        assert normalized_grid_error(g * (2.0 * np.exp(1j * 0.7)), g) < 1e-24

    def test_bfp_quantization_stays_under_threshold(self):
        from ofhtest.codec import blocks_from_arrays, compress_array, decompress_array

        g = generate_grid(CarrierConfig(), WaveformSpec(), Allocation())
        rows = g.T.reshape(-1, 12)
        exponents, mantissas = compress_array(rows)
        recon = decompress_array(exponents, mantissas).reshape(14, -1).T
        result = analyze_dl_output(recon, g)
        assert result.verdict == "PASS"
        assert 0.0 < result.normalized_error < 1e-3

    def test_garbled_emission_fails(self):
        g = generate_grid(CarrierConfig(), WaveformSpec(pn23_seed=0x133), Allocation(num_prb=3))
        other = generate_grid(CarrierConfig(), WaveformSpec(pn23_seed=0x331), Allocation(num_prb=3))
        assert analyze_dl_output(other, g).verdict == "FAIL"

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            normalized_grid_error(np.zeros((2, 2)), np.ones((3, 3)))
        with pytest.raises(ValueError):
            normalized_grid_error(np.zeros((2, 2)), np.zeros((2, 2)))

    def test_window_boundaries_are_closed(self):
        w = DelayWindow()
        symbol = 10_000_000
        assert classify_arrival(w, "U", symbol - w.t2a_max_up_ns, symbol) == "ok"
        assert classify_arrival(w, "U", symbol - w.t2a_min_up_ns, symbol) == "ok"
        assert classify_arrival(w, "U", symbol - w.t2a_max_up_ns - 1, symbol) == "early"
        assert classify_arrival(w, "U", symbol - w.t2a_min_up_ns + 1, symbol) == "late"

    def test_dlm_positive_and_negative_paths(self):
        carrier = CarrierConfig()
        w = DelayWindow()
        mid = evaluate_dlm(carrier, w, [0] * 30, expect="all_received")
        assert mid.verdict == "PASS" and mid.counters.received == 30
        late = evaluate_dlm(carrier, w, [200_000] * 30, expect="all_late")
        assert late.verdict == "PASS" and late.counters.dropped_late == 30
        early = evaluate_dlm(carrier, w, [-200_000] * 30, expect="all_early")
        assert early.verdict == "PASS" and early.counters.dropped_early == 30
        mixed = evaluate_dlm(carrier, w, [0, 200_000], expect="all_received")
        assert mixed.verdict == "FAIL"
        with pytest.raises(ValueError):
            evaluate_dlm(carrier, w, [0], expect="sideways")

    @given(
        offsets=st.lists(st.integers(-500_000, 500_000), min_size=1, max_size=200),
        plane=st.sampled_from(["U", "C"]),
    )
    @settings(max_examples=60)
    def test_dlm_counters_always_conserve(self, offsets, plane):
        result = evaluate_dlm(CarrierConfig(), DelayWindow(), offsets, plane=plane)
        c = result.counters
        assert c.conserved()
        assert c.sent == len(offsets)
        assert result.verdict == "PASS"
