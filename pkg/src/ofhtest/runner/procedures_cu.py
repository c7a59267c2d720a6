"""Combined control/user-plane conformance procedures.

Every case here drives real encoded frames through the radio's fronthaul
input and judges what comes out the antenna (downlink) or back on the
uplink eCPRI stream. The common gate applies throughout: the radio may only
radiate with a locked clock and an active carrier, and the procedures
assert that the gate never leaked during their traffic.

Scenario classes covered: base full-band bidirectional traffic, partial
resource allocations, the zero-count whole-bandwidth shorthand, no-beam
and weight-based dynamic beamforming, transmission-window (delay
management) positive and negative testing, and NR PRACH over section
type 3.
"""

from __future__ import annotations

import numpy as np

from ofhtest.codec.bfp import bfp_decompress, blocks_from_arrays, compress_array
from ofhtest.codec.ecpri import EcpriHeader, EcpriMessageType, decode_ecpri, encode_ecpri
from ofhtest.codec.eaxc import EaxcId, pack_eaxc
from ofhtest.codec.sections import (
    CplaneMessage,
    CplaneSection,
    SectionType,
    UplaneMessage,
    UplaneSection,
    decode_uplane,
    encode_cplane,
    encode_uplane,
)
from ofhtest.cuplane.analyzer import (
    DEFAULT_ERROR_THRESHOLD,
    analyze_dl_output,
    evaluate_dlm,
    normalized_grid_error,
)
from ofhtest.cuplane.beams import detect_beam_direction, steering_vector
from ofhtest.cuplane.carrier import RES_PER_PRB, SYMBOLS_PER_SLOT
from ofhtest.cuplane.flows import (
    PrachConfig,
    SeqCounter,
    TimedFrame,
    build_dl_flow,
    build_prach_st3_flow,
    build_ul_flow,
)
from ofhtest.cuplane.grid import Allocation, WaveformSpec, generate_grid
from ofhtest.cuplane.modulation import Modulation
from ofhtest.cuplane.zadoff_chu import correlate_preamble
from ofhtest.runner.environment import TestEnv
from ofhtest.runner.scenario import (
    CaseOutcome,
    CheckList,
    coords_after,
    deliver_frames,
    fronthaul_capture,
    gate_clean,
    rebuild_ul_grid,
    scenario,
    shift_user_frames,
)


def _counters(env: TestEnv) -> dict:
    return dict(env.ru.counters)


def _port_matrix(env: TestEnv, slot_index: int, symbol: int, n_re: int = 32) -> np.ndarray:
    """Per-port amplitudes for the first `n_re` subcarriers of one symbol,
    shaped (ports, n_re) for direction estimation."""
    columns = [env.ru.rf.port_snapshot(slot_index, symbol, re) for re in range(n_re)]
    return np.stack(columns, axis=1)


@scenario("3.2.5.1.1")
def base_bidirectional(env: TestEnv) -> CaseOutcome:
    """Full-band downlink and uplink round trips at nominal timing."""
    checks = CheckList()
    env.require_traffic_ready()
    alloc = Allocation()

    f, sf, sl, dl_idx = coords_after(env, "D")
    dl_grid = generate_grid(env.carrier, WaveformSpec(), alloc)
    dl_flow = build_dl_flow(env.carrier, dl_grid, alloc, f, sf, sl, windows=env.windows)
    deliver_frames(env, dl_flow)

    dl_result = analyze_dl_output(env.ru.rf.port_grid(dl_idx), dl_grid)
    checks.add("downlink waveform reproduced within tolerance", dl_result.verdict == "PASS")
    checks.add(
        "every downlink frame accepted in-window",
        env.ru.counters["received"] == len(dl_flow)
        and env.ru.counters["dropped_early"] == 0
        and env.ru.counters["dropped_late"] == 0,
    )

    uf, usf, usl, ul_idx = coords_after(env, "U")
    ul_grid = generate_grid(env.carrier, WaveformSpec(pn23_seed=0x13572F), alloc)
    env.ru.receive_path.inject_ul_grid(ul_idx, ul_grid)
    ul_flow = build_ul_flow(env.carrier, alloc, uf, usf, usl, windows=env.windows)
    before = len(env.ru.uplink_out)
    deliver_frames(env, ul_flow)
    captured = env.ru.uplink_out[before:]

    checks.add("one uplink capture per scheduled symbol", len(captured) == alloc.num_symbol)
    ul_error = normalized_grid_error(rebuild_ul_grid(env, captured), ul_grid)
    checks.add("uplink waveform reproduced within tolerance", ul_error < DEFAULT_ERROR_THRESHOLD)
    checks.add("radiation gate held throughout", gate_clean(env.ru))

    return checks.outcome(
        metrics={
            "dl_normalized_error": dl_result.normalized_error,
            "ul_normalized_error": ul_error,
            "counters": _counters(env),
        },
        evidence={"fronthaul.cap": fronthaul_capture(dl_flow + ul_flow, captured)},
    )


@scenario("3.2.5.1.2")
def partial_allocation(env: TestEnv) -> CaseOutcome:
    """Sub-band, sub-slot allocations must land exactly where addressed."""
    checks = CheckList()
    env.require_traffic_ready()

    dl_alloc = Allocation(start_prb=40, num_prb=24, start_symbol=2, num_symbol=8)
    f, sf, sl, dl_idx = coords_after(env, "D")
    dl_grid = generate_grid(env.carrier, WaveformSpec(modulation=Modulation.QAM64), dl_alloc)
    dl_flow = build_dl_flow(env.carrier, dl_grid, dl_alloc, f, sf, sl, windows=env.windows)
    deliver_frames(env, dl_flow)

    emitted = env.ru.rf.port_grid(dl_idx)
    re_lo = dl_alloc.start_prb * RES_PER_PRB
    re_hi = re_lo + dl_alloc.num_prb * RES_PER_PRB
    sym_lo, sym_hi = dl_alloc.start_symbol, dl_alloc.start_symbol + dl_alloc.num_symbol
    region_error = normalized_grid_error(
        emitted[re_lo:re_hi, sym_lo:sym_hi], dl_grid[re_lo:re_hi, sym_lo:sym_hi]
    )
    checks.add("allocated region reproduced within tolerance", region_error < DEFAULT_ERROR_THRESHOLD)
    outside = emitted.copy()
    outside[re_lo:re_hi, sym_lo:sym_hi] = 0
    checks.add("no energy outside the allocation", not np.any(outside))
    checks.add(
        "control message plus one data frame per allocated symbol",
        len(dl_flow) == 1 + dl_alloc.num_symbol
        and env.ru.counters["received"] == len(dl_flow),
    )

    ul_alloc = Allocation(start_prb=88, num_prb=20, start_symbol=3, num_symbol=6)
    uf, usf, usl, ul_idx = coords_after(env, "U")
    ul_grid = generate_grid(
        env.carrier, WaveformSpec(modulation=Modulation.QAM64, pn23_seed=0x2B5D11), ul_alloc
    )
    env.ru.receive_path.inject_ul_grid(ul_idx, ul_grid)
    ul_flow = build_ul_flow(env.carrier, ul_alloc, uf, usf, usl, windows=env.windows)
    before = len(env.ru.uplink_out)
    deliver_frames(env, ul_flow)
    captured = env.ru.uplink_out[before:]

    checks.add("captures only for the allocated symbols", len(captured) == ul_alloc.num_symbol)
    sections_ok = all(
        sec.start_prb == ul_alloc.start_prb and sec.num_prb == ul_alloc.num_prb
        for tf in captured
        for sec in _decode_sections(env, tf)
    )
    checks.add("captured sections echo the granted addressing", sections_ok)
    rebuilt = rebuild_ul_grid(env, captured)
    u_lo = ul_alloc.start_prb * RES_PER_PRB
    u_hi = u_lo + ul_alloc.num_prb * RES_PER_PRB
    ul_error = normalized_grid_error(
        rebuilt[u_lo:u_hi, ul_alloc.start_symbol : ul_alloc.start_symbol + ul_alloc.num_symbol],
        ul_grid[u_lo:u_hi, ul_alloc.start_symbol : ul_alloc.start_symbol + ul_alloc.num_symbol],
    )
    checks.add("captured region matches the injected waveform", ul_error < DEFAULT_ERROR_THRESHOLD)
    checks.add("radiation gate held throughout", gate_clean(env.ru))

    return checks.outcome(
        metrics={
            "dl_region_error": region_error,
            "ul_region_error": ul_error,
            "counters": _counters(env),
        },
        evidence={"fronthaul.cap": fronthaul_capture(dl_flow + ul_flow, captured)},
    )


def _decode_sections(env: TestEnv, tf: TimedFrame):
    _, payload = decode_ecpri(tf.frame)
    return decode_uplane(payload, all_prb_count=env.carrier.n_prb).sections


def _wrap_frame(msg_type: EcpriMessageType, eaxc: EaxcId, seq: SeqCounter, payload: bytes) -> bytes:
    header = EcpriHeader(
        message_type=msg_type, eaxc=eaxc, sequence_id=seq.take(pack_eaxc(eaxc))
    )
    return encode_ecpri(header, payload)


@scenario("3.2.5.1.3")
def whole_band_shorthand(env: TestEnv) -> CaseOutcome:
    """numPrb=0 is the wire shorthand for "all PRBs"; the radio must treat
    zero-count sections exactly like explicit full-band ones, in both
    directions."""
    checks = CheckList()
    env.require_traffic_ready()
    carrier = env.carrier
    n_prb = carrier.n_prb
    eaxc = EaxcId()
    seq = SeqCounter()

    # downlink: control and data sections both use the zero count
    f, sf, sl, dl_idx = coords_after(env, "D")
    slot_t0 = carrier.slot_start_ns(f, sf, sl)
    dl_grid = generate_grid(env.carrier, WaveformSpec(pn23_seed=0x51C0FF), Allocation())
    cmsg = CplaneMessage(
        frame_id=f & 0xFF,
        subframe_id=sf,
        slot_id=sl,
        start_symbol_id=0,
        section_type=SectionType.ST1,
        sections=[CplaneSection(section_id=1, start_prb=0, num_prb=0, num_symbol=SYMBOLS_PER_SLOT)],
    )
    frames = [
        TimedFrame(
            time_ns=env.windows.nominal_send_ns("C", slot_t0),
            frame=_wrap_frame(
                EcpriMessageType.RT_CONTROL, eaxc, seq, encode_cplane(cmsg, ru_ports=carrier.ru_ports)
            ),
            plane="C",
            eaxc=pack_eaxc(eaxc),
        )
    ]
    for symbol in range(SYMBOLS_PER_SLOT):
        exponents, mantissas = compress_array(dl_grid[:, symbol].reshape(n_prb, RES_PER_PRB))
        umsg = UplaneMessage(
            frame_id=f & 0xFF,
            subframe_id=sf,
            slot_id=sl,
            symbol_id=symbol,
            sections=[
                UplaneSection(
                    section_id=1,
                    start_prb=0,
                    num_prb=0,
                    prbs=blocks_from_arrays(exponents, mantissas),
                )
            ],
        )
        symbol_time = slot_t0 + carrier.symbol_offset_ns(symbol)
        frames.append(
            TimedFrame(
                time_ns=env.windows.nominal_send_ns("U", symbol_time),
                frame=_wrap_frame(EcpriMessageType.IQ_DATA, eaxc, seq, encode_uplane(umsg)),
                plane="U",
                eaxc=pack_eaxc(eaxc),
            )
        )
    deliver_frames(env, frames)

    dl_result = analyze_dl_output(env.ru.rf.port_grid(dl_idx), dl_grid)
    checks.add(
        "zero-count downlink sections expanded to the whole band",
        dl_result.verdict == "PASS",
    )
    checks.add(
        "all zero-count frames accepted",
        env.ru.counters["received"] == len(frames)
        and env.ru.counters["unscheduled"] == 0,
    )

    # uplink: a zero-count grant must sample the whole band and the
    # captures must come back with the count made explicit
    uf, usf, usl, ul_idx = coords_after(env, "U")
    ul_slot_t0 = carrier.slot_start_ns(uf, usf, usl)
    ul_grid = generate_grid(env.carrier, WaveformSpec(pn23_seed=0x0DDF00), Allocation())
    env.ru.receive_path.inject_ul_grid(ul_idx, ul_grid)
    ul_cmsg = CplaneMessage(
        frame_id=uf & 0xFF,
        subframe_id=usf,
        slot_id=usl,
        start_symbol_id=0,
        section_type=SectionType.ST1,
        sections=[CplaneSection(section_id=1, start_prb=0, num_prb=0, num_symbol=SYMBOLS_PER_SLOT)],
    )
    ul_frames = [
        TimedFrame(
            time_ns=env.windows.nominal_send_ns("C", ul_slot_t0),
            frame=_wrap_frame(
                EcpriMessageType.RT_CONTROL, eaxc, seq, encode_cplane(ul_cmsg, ru_ports=carrier.ru_ports)
            ),
            plane="C",
            eaxc=pack_eaxc(eaxc),
        )
    ]
    before = len(env.ru.uplink_out)
    deliver_frames(env, ul_frames)
    captured = env.ru.uplink_out[before:]

    checks.add("whole-band grant captured every symbol", len(captured) == SYMBOLS_PER_SLOT)
    checks.add(
        "captures state the expanded count explicitly",
        all(
            sec.num_prb == n_prb and sec.start_prb == 0
            for tf in captured
            for sec in _decode_sections(env, tf)
        ),
    )
    ul_error = normalized_grid_error(rebuild_ul_grid(env, captured), ul_grid)
    checks.add("captured waveform matches the injected one", ul_error < DEFAULT_ERROR_THRESHOLD)
    checks.add("radiation gate held throughout", gate_clean(env.ru))

    return checks.outcome(
        metrics={
            "dl_normalized_error": dl_result.normalized_error,
            "ul_normalized_error": ul_error,
            "counters": _counters(env),
        },
        evidence={"fronthaul.cap": fronthaul_capture(frames + ul_frames, captured)},
    )


@scenario("3.2.5.2.1")
def no_beamforming_dl(env: TestEnv) -> CaseOutcome:
    """beamId 0: pass-through on the reference port, nothing anywhere else."""
    checks = CheckList()
    env.require_traffic_ready()
    alloc = Allocation()

    f, sf, sl, idx = coords_after(env, "D")
    grid = generate_grid(env.carrier, WaveformSpec(pn23_seed=0x00BEEF), alloc)
    flow = build_dl_flow(env.carrier, grid, alloc, f, sf, sl, windows=env.windows, beam_id=0)
    deliver_frames(env, flow)

    result = analyze_dl_output(env.ru.rf.port_grid(idx, 0), grid)
    checks.add("reference port carries the waveform", result.verdict == "PASS")
    other_energy = sum(
        float(np.sum(np.abs(env.ru.rf.port_grid(idx, port)) ** 2))
        for port in range(1, env.carrier.ru_ports)
    )
    checks.add("no energy on any other antenna port", other_energy == 0.0)
    checks.add(
        "emission shows no spatial direction",
        detect_beam_direction(_port_matrix(env, idx, symbol=0)) is None,
    )
    checks.add("all frames accepted", env.ru.counters["received"] == len(flow))
    checks.add("radiation gate held throughout", gate_clean(env.ru))

    return checks.outcome(
        metrics={
            "normalized_error": result.normalized_error,
            "other_port_energy": other_energy,
            "counters": _counters(env),
        },
        evidence={"fronthaul.cap": fronthaul_capture(flow, [])},
    )


@scenario("3.2.5.2.2")
def no_beamforming_ul(env: TestEnv) -> CaseOutcome:
    """beamId 0 on an uplink grant: a plain single-stream capture."""
    checks = CheckList()
    env.require_traffic_ready()
    alloc = Allocation(start_prb=0, num_prb=133, start_symbol=0, num_symbol=10)

    f, sf, sl, idx = coords_after(env, "U")
    grid = generate_grid(
        env.carrier, WaveformSpec(modulation=Modulation.QAM256, pn23_seed=0x7A11AD), alloc
    )
    env.ru.receive_path.inject_ul_grid(idx, grid)
    flow = build_ul_flow(env.carrier, alloc, f, sf, sl, windows=env.windows, beam_id=0)
    before = len(env.ru.uplink_out)
    deliver_frames(env, flow)
    captured = env.ru.uplink_out[before:]

    checks.add("capture per granted symbol", len(captured) == alloc.num_symbol)
    error = normalized_grid_error(rebuild_ul_grid(env, captured), grid)
    checks.add("captured waveform matches the injected one", error < DEFAULT_ERROR_THRESHOLD)
    checks.add(
        "grant accepted without drops",
        env.ru.counters["received"] == len(flow)
        and env.ru.counters["dropped_early"] == 0
        and env.ru.counters["dropped_late"] == 0,
    )
    checks.add("radiation gate held throughout", gate_clean(env.ru))
    return checks.outcome(
        metrics={"ul_normalized_error": error, "counters": _counters(env)},
        evidence={"fronthaul.cap": fronthaul_capture(flow, captured)},
    )


@scenario("3.2.5.2.5")
def dynamic_beamforming_dl(env: TestEnv) -> CaseOutcome:
    """Inline weight vectors steer consecutive slots to different azimuths."""
    checks = CheckList()
    env.require_traffic_ready()
    alloc = Allocation()
    targets = (-17.5, 12.5)
    detected: list[float | None] = []
    all_frames: list[TimedFrame] = []

    for shot, azimuth in enumerate(targets):
        f, sf, sl, idx = coords_after(env, "D")
        grid = generate_grid(env.carrier, WaveformSpec(pn23_seed=0x30A000 + shot), alloc)
        weights = tuple(steering_vector(azimuth, env.carrier.ru_ports))
        flow = build_dl_flow(
            env.carrier, grid, alloc, f, sf, sl,
            windows=env.windows, beam_id=1, beam_weights=weights,
        )
        all_frames.extend(flow)
        deliver_frames(env, flow)

        estimate = detect_beam_direction(_port_matrix(env, idx, symbol=0))
        detected.append(estimate)
        checks.add(
            f"slot steered to {azimuth:+.1f} deg recovered within one degree",
            estimate is not None and abs(estimate - azimuth) <= 1.0,
        )
        strongest = int(np.argmax([
            np.sum(np.abs(env.ru.rf.port_grid(idx, port)) ** 2)
            for port in range(env.carrier.ru_ports)
        ]))
        port_error = normalized_grid_error(env.ru.rf.port_grid(idx, strongest), grid)
        checks.add(
            f"waveform intact on the strongest port at {azimuth:+.1f} deg",
            port_error < DEFAULT_ERROR_THRESHOLD,
        )

    checks.add(
        "the two slots went different ways",
        None not in detected and abs(detected[0] - detected[1]) > 10.0,
    )
    checks.add("radiation gate held throughout", gate_clean(env.ru))
    return checks.outcome(
        metrics={
            "targets_deg": list(targets),
            "detected_deg": detected,
            "counters": _counters(env),
        },
        evidence={"fronthaul.cap": fronthaul_capture(all_frames, [])},
    )


@scenario("3.2.5.4.1")
def dlm_dl_positive(env: TestEnv) -> CaseOutcome:
    """Downlink frames displaced anywhere inside the reception window,
    including both edges, must all be accepted."""
    checks = CheckList()
    env.require_traffic_ready()
    alloc = Allocation()
    lo, hi = env.windows.bounds("U")
    half = (hi - lo) // 2

    offsets = [env.rng.randint(-half, half) for _ in range(SYMBOLS_PER_SLOT)]
    offsets[0] = -half  # latest acceptable arrival
    offsets[1] = half   # earliest acceptable arrival
    oracle = evaluate_dlm(env.carrier, env.windows, offsets, plane="U", expect="all_received")
    checks.add("window arithmetic expects every frame in-window", oracle.verdict == "PASS")
    c_lo, c_hi = env.windows.bounds("C")
    c_lead = -((c_hi - c_lo) // 2)  # control at its early edge, ahead of any data frame

    f, sf, sl, idx = coords_after(env, "D")
    grid = generate_grid(env.carrier, WaveformSpec(pn23_seed=0x3D1731), alloc)
    flow = build_dl_flow(env.carrier, grid, alloc, f, sf, sl, windows=env.windows)
    deliver_frames(env, shift_user_frames(flow, offsets, cplane_offset_ns=c_lead))

    u_received = env.ru.counters["received"] - 1  # the control frame is separate
    checks.add(
        "radio accepted every displaced frame including the edges",
        u_received == SYMBOLS_PER_SLOT
        and env.ru.counters["dropped_early"] == 0
        and env.ru.counters["dropped_late"] == 0,
    )
    checks.add(
        "live counters agree with the oracle",
        u_received == oracle.counters.received,
    )
    result = analyze_dl_output(env.ru.rf.port_grid(idx), grid)
    checks.add("waveform survived the displacement", result.verdict == "PASS")
    checks.add("radiation gate held throughout", gate_clean(env.ru))
    return checks.outcome(
        metrics={
            "offsets_ns": offsets,
            "normalized_error": result.normalized_error,
            "counters": _counters(env),
        },
        evidence={"fronthaul.cap": fronthaul_capture(flow, [])},
    )


@scenario("3.2.5.4.2")
def dlm_ul_positive(env: TestEnv) -> CaseOutcome:
    """Uplink grants displaced across the control window, including both
    edges, must all produce their captures."""
    checks = CheckList()
    env.require_traffic_ready()
    alloc = Allocation(start_prb=0, num_prb=133, start_symbol=0, num_symbol=4)
    lo, hi = env.windows.bounds("C")
    half = (hi - lo) // 2
    offsets = [-half, 0, half]

    oracle = evaluate_dlm(env.carrier, env.windows, offsets, plane="C", expect="all_received")
    checks.add("window arithmetic expects every grant in-window", oracle.verdict == "PASS")

    all_frames: list[TimedFrame] = []
    before = len(env.ru.uplink_out)
    grids = []
    for off in offsets:
        f, sf, sl, idx = coords_after(env, "U")
        grid = generate_grid(env.carrier, WaveformSpec(pn23_seed=0x400000 + idx), alloc)
        env.ru.receive_path.inject_ul_grid(idx, grid)
        grids.append((idx, grid))
        flow = build_ul_flow(env.carrier, alloc, f, sf, sl, windows=env.windows)
        shifted = [
            tf if tf.plane != "C" else TimedFrame(tf.time_ns + off, tf.frame, tf.plane, tf.eaxc)
            for tf in flow
        ]
        all_frames.extend(shifted)
        deliver_frames(env, shifted)
    captured = env.ru.uplink_out[before:]

    checks.add(
        "every displaced grant was honored",
        env.ru.counters["received"] == len(offsets)
        and env.ru.counters["dropped_early"] == 0
        and env.ru.counters["dropped_late"] == 0,
    )
    checks.add(
        "full capture set emitted",
        len(captured) == len(offsets) * alloc.num_symbol,
    )
    checks.add("radiation gate held throughout", gate_clean(env.ru))
    return checks.outcome(
        metrics={"offsets_ns": offsets, "counters": _counters(env)},
        evidence={"fronthaul.cap": fronthaul_capture(all_frames, captured)},
    )


@scenario("3.2.5.4.3")
def dlm_dl_negative(env: TestEnv) -> CaseOutcome:
    """Early and late downlink frames must be counted and discarded without
    a trace on the air interface."""
    checks = CheckList()
    env.require_traffic_ready()
    alloc = Allocation()
    lo, hi = env.windows.bounds("U")
    half = (hi - lo) // 2

    early = [-(half + 1 + 10_000 * i) for i in range(5)]          # symbols 0-4
    inside = [env.rng.randint(-half, half) for _ in range(4)]     # symbols 5-8
    late = [half + 1 + 10_000 * i for i in range(5)]              # symbols 9-13
    offsets = early + inside + late

    oracle = evaluate_dlm(env.carrier, env.windows, offsets, plane="U")
    checks.add(
        "oracle sees five early, four in-window, five late",
        oracle.counters.dropped_early == 5
        and oracle.counters.received == 4
        and oracle.counters.dropped_late == 5,
    )
    c_lo, c_hi = env.windows.bounds("C")
    c_lead = -((c_hi - c_lo) // 2)

    f, sf, sl, idx = coords_after(env, "D")
    grid = generate_grid(env.carrier, WaveformSpec(pn23_seed=0x66A0CE), alloc)
    flow = build_dl_flow(env.carrier, grid, alloc, f, sf, sl, windows=env.windows)
    deliver_frames(env, shift_user_frames(flow, offsets, cplane_offset_ns=c_lead))

    counters = env.ru.counters
    u_received = counters["received"] - 1
    checks.add(
        "live counters match the oracle exactly",
        u_received == oracle.counters.received
        and counters["dropped_early"] == oracle.counters.dropped_early
        and counters["dropped_late"] == oracle.counters.dropped_late,
    )
    checks.add(
        "conservation: received plus dropped equals sent",
        u_received + counters["dropped_early"] + counters["dropped_late"] == SYMBOLS_PER_SLOT,
    )

    emitted = env.ru.rf.port_grid(idx)
    survivors = emitted[:, 5:9]
    region_error = normalized_grid_error(survivors, grid[:, 5:9])
    checks.add("in-window symbols radiated intact", region_error < DEFAULT_ERROR_THRESHOLD)
    silenced = emitted.copy()
    silenced[:, 5:9] = 0
    checks.add("out-of-window frames contributed zero energy", not np.any(silenced))
    checks.add("radiation gate held throughout", gate_clean(env.ru))
    return checks.outcome(
        metrics={
            "offsets_ns": offsets,
            "region_error": region_error,
            "counters": _counters(env),
        },
        evidence={"fronthaul.cap": fronthaul_capture(flow, [])},
    )


@scenario("3.2.5.4.4")
def dlm_ul_negative(env: TestEnv) -> CaseOutcome:
    """Early and late uplink grants must be discarded whole: no captures."""
    checks = CheckList()
    env.require_traffic_ready()
    alloc = Allocation(start_prb=0, num_prb=133, start_symbol=0, num_symbol=4)
    lo, hi = env.windows.bounds("C")
    half = (hi - lo) // 2
    offsets = [-(half + 40_000), 0, half + 40_000]  # early, in-window, late

    oracle = evaluate_dlm(env.carrier, env.windows, offsets, plane="C")
    checks.add(
        "oracle sees one early, one in-window, one late",
        oracle.counters.dropped_early == 1
        and oracle.counters.received == 1
        and oracle.counters.dropped_late == 1,
    )

    all_frames: list[TimedFrame] = []
    slots = []
    before = len(env.ru.uplink_out)
    for off in offsets:
        f, sf, sl, idx = coords_after(env, "U")
        grid = generate_grid(env.carrier, WaveformSpec(pn23_seed=0x500000 + idx), alloc)
        env.ru.receive_path.inject_ul_grid(idx, grid)
        slots.append((idx, off))
        flow = build_ul_flow(env.carrier, alloc, f, sf, sl, windows=env.windows)
        shifted = [
            TimedFrame(tf.time_ns + off, tf.frame, tf.plane, tf.eaxc) for tf in flow
        ]
        all_frames.extend(shifted)
        deliver_frames(env, shifted)
    captured = env.ru.uplink_out[before:]

    counters = env.ru.counters
    checks.add(
        "live counters match the oracle exactly",
        counters["received"] == 1
        and counters["dropped_early"] == 1
        and counters["dropped_late"] == 1,
    )
    checks.add(
        "captures only from the in-window grant",
        len(captured) == alloc.num_symbol,
    )
    ok_slot = slots[1][0]
    checks.add(
        "captured frames address the surviving slot",
        all(tf.time_ns // env.carrier.slot_ns == ok_slot for tf in captured),
    )
    checks.add(
        "conservation: grants received plus dropped equals sent",
        counters["received"] + counters["dropped_early"] + counters["dropped_late"] == len(offsets),
    )
    checks.add("radiation gate held throughout", gate_clean(env.ru))
    return checks.outcome(
        metrics={"offsets_ns": offsets, "counters": _counters(env)},
        evidence={"fronthaul.cap": fronthaul_capture(all_frames, captured)},
    )


@scenario("3.2.5.8.1")
def prach_st3(env: TestEnv) -> CaseOutcome:
    """A section type 3 occasion must come back as one capture holding the
    preamble at the right instant, padded with silence."""
    checks = CheckList()
    env.require_traffic_ready()
    prach = PrachConfig()
    cyclic_shift = 7

    f, sf, sl, idx = coords_after(env, "U")
    flow, occasion = build_prach_st3_flow(env.carrier, prach, f, sf, sl, windows=env.windows)
    env.ru.receive_path.inject_prach(occasion, amplitude=4096.0, cyclic_shift=cyclic_shift)
    before = len(env.ru.uplink_out)
    deliver_frames(env, flow)
    captured = env.ru.uplink_out[before:]

    checks.add("exactly one occasion captured", len(captured) == 1)
    checks.add("control message accepted", env.ru.counters["received"] == 1)
    if captured:
        tf = captured[0]
        checks.add("capture stamped at the occasion start", tf.time_ns == occasion.start_ns)
        sections = _decode_sections(env, tf)
        samples = np.concatenate([
            np.asarray([complex(i, q) for block in sec.prbs for i, q in bfp_decompress(block)])
            for sec in sections
        ])
        checks.add(
            "capture spans the granted PRBs",
            samples.size == prach.num_prb * RES_PER_PRB,
        )
        peak, shift = correlate_preamble(samples[: prach.length], prach.root, prach.length)
        checks.add("preamble detected with a clean correlation peak", peak >= 0.99)
        checks.add("cyclic shift recovered", shift == cyclic_shift)
        checks.add("padding beyond the sequence is silent", not np.any(samples[prach.length :]))
    checks.add("radiation gate held throughout", gate_clean(env.ru))
    return checks.outcome(
        metrics={
            "occasion_start_ns": occasion.start_ns,
            "cyclic_shift": cyclic_shift,
            "counters": _counters(env),
        },
        evidence={"fronthaul.cap": fronthaul_capture(flow, captured)},
    )
