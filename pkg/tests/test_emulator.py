"""Radio emulator tests: bring-up, gating, plane processing, fault hooks."""

import random

import numpy as np
import pytest

from ofhtest.codec import decode_ecpri, decode_uplane
from ofhtest.codec.bfp import bfp_decompress
from ofhtest.cuplane import (
    Allocation,
    PrachConfig,
    WaveformSpec,
    analyze_dl_output,
    build_dl_flow,
    build_prach_st3_flow,
    build_ul_flow,
    correlate_preamble,
    detect_beam_direction,
    generate_grid,
    steering_vector,
)
from ofhtest.emulator import FaultPlan, RuEmulator, RuPhase
from ofhtest.emulator.ru import _PHASE_ORDER
from ofhtest.mplane.client import CallHomeListener, RpcFault
from ofhtest.mplane.dhcpv6 import Dhcpv6Server
from ofhtest.mplane.server import SUPERVISION_FAULT_ID
from ofhtest.mplane.types import SessionState
from ofhtest.simtime import SimTimeline
from ofhtest.splane import SimClock, SyncRunner, SyncState, lls_c1


def bring_up(plan=None, **ru_kw):
    timeline = SimTimeline()
    ru = RuEmulator(timeline, plan=plan, **ru_kw)
    dhcp = Dhcpv6Server()
    listener = CallHomeListener(trust_anchor=ru.fingerprint, now=lambda: timeline.now_ns)
    client = ru.boot(dhcp, listener)
    return timeline, ru, dhcp, listener, client


def lock_clock(timeline, ru, slave_phase_ns=500.0, seed=3):
    runner = SyncRunner(
        timeline,
        SimClock(),
        SimClock(phase_offset_ns=slave_phase_ns),
        lls_c1(),
        rng=random.Random(seed),
        participating=ru.sync_participating,
        on_transition=ru.on_sync_transition,
    )
    ru.start_sync()
    assert runner.run_until_locked(budget_s=30.0)
    return runner


def fully_up(plan=None, **ru_kw):
    timeline, ru, dhcp, listener, client = bring_up(plan=plan, **ru_kw)
    runner = lock_clock(timeline, ru)
    client.edit_config({"carriers/c1/active": "true"})
    return timeline, ru, client, runner, listener


def coords_after(carrier, timeline, kind, margin_ns=1_000_000):
    """First slot of the wanted kind far enough ahead to schedule a flow."""
    start = (timeline.now_ns + margin_ns) // carrier.slot_ns + 1
    f, sf, sl = carrier.next_slot_of_kind(kind, int(start))
    return f, sf, sl, carrier.slot_index(f, sf, sl)


def deliver(timeline, ru, frames, settle_ns=1_000_000):
    for tf in frames:
        timeline.schedule_at(tf.time_ns, lambda tf=tf: ru.receive_frame(tf.frame))
    end = max(tf.time_ns for tf in frames) + settle_ns
    timeline.run_until(end)


def assert_gate_clean(ru):
    """No gate-log snapshot may show radiation without lock and a carrier."""
    for point in ru.gate_log:
        if point.radiating:
            assert point.sync_state is SyncState.LOCKED, point
            assert point.active_carriers > 0, point


class TestBringUp:
    def test_boot_walks_the_ladder_to_mplane_up(self):
        timeline, ru, dhcp, listener, client = bring_up()
        assert client is not None
        assert ru.phase is RuPhase.MPLANE_UP
        assert [p for _, _, p in ru.phase_history] == [
            RuPhase.BOOT,
            RuPhase.DHCP,
            RuPhase.CALL_HOME,
            RuPhase.MPLANE_UP,
        ]
        assert len(ru.dhcp_messages) == 4
        assert len(listener.attempts) == 1 and listener.attempts[0].accepted
        assert ru.lease is not None
        assert ru.lease.ipv6_address.startswith("fd00::")

    def test_no_dhcp_service_stalls_the_radio(self):
        timeline = SimTimeline()
        ru = RuEmulator(timeline)
        listener = CallHomeListener(trust_anchor=ru.fingerprint)
        assert ru.boot(None, listener) is None
        assert ru.phase is RuPhase.DHCP
        assert listener.attempts == []

    def test_bad_fingerprint_is_rejected_and_retried(self):
        plan = FaultPlan(drop_callhome_auth=True)
        timeline, ru, dhcp, listener, client = bring_up(plan=plan)
        assert client is None
        assert ru.phase is RuPhase.CALL_HOME
        # two more tries ride the timeline at the retry cadence
        timeline.run_until(timeline.now_ns + int(20e9))
        assert len(listener.attempts) == 3
        assert not any(a.accepted for a in listener.attempts)
        assert all("fingerprint" in a.reason for a in listener.attempts)
        assert ru.phase is RuPhase.CALL_HOME

    def test_session_answers_requests_after_boot(self):
        timeline, ru, dhcp, listener, client = bring_up()
        tree = client.get()
        assert tree["identity"]["ru_id"] == ru.identity
        assert tree["sync"]["state"] == "FREERUN"

    def test_visible_events_before_session_are_transport_only(self):
        # black-box view: until the management session exists, the only
        # observable radio activity is address acquisition and dialing
        timeline, ru, client, runner, listener = fully_up()
        session_t = min(
            e.time_ns for e in ru.events if e.kind == "call_home" and e.detail == "accepted"
        )
        early_visible = {
            e.kind for e in ru.events if e.visible and e.time_ns <= session_t
        }
        assert early_visible <= {"dhcp", "call_home"}

    def test_phase_is_monotone_within_each_epoch(self):
        timeline, ru, client, runner, listener = fully_up()
        client.sw_download(
            "B", "ru-base-2.0.0", b"image-2", __import__("hashlib").sha256(b"image-2").hexdigest()
        )
        client.sw_install("B")
        client.sw_activate("B")
        client.reset()
        timeline.run_until(timeline.now_ns + 1_000_000)
        epochs = {}
        for _, epoch, phase in ru.phase_history:
            epochs.setdefault(epoch, []).append(_PHASE_ORDER[phase])
        assert len(epochs) == 2
        for orders in epochs.values():
            assert orders == sorted(orders)


class TestSyncGate:
    def test_activation_refused_before_lock(self):
        timeline, ru, dhcp, listener, client = bring_up()
        with pytest.raises(RpcFault) as err:
            client.edit_config({"carriers/c1/active": "true"})
        assert "LOCKED" in str(err.value)
        assert ru.datastore.leaf("carriers/c1/active") == "false"
        assert ru.phase is RuPhase.MPLANE_UP

    def test_activation_accepted_after_lock(self):
        timeline, ru, client, runner, listener = fully_up()
        assert ru.phase is RuPhase.CARRIERS_ACTIVE
        assert ru.active_carrier_count() == 1
        assert ru.reported_sync_state() == "LOCKED"
        assert ru.is_radiating_capable()

    def test_sync_loss_shuts_carriers_down(self):
        timeline, ru, client, runner, listener = fully_up()
        # a sudden 1 ms path asymmetry blows the offset estimate far past
        # the lock threshold; hysteresis rides through hold_count exchanges
        runner.path.forward_delay_ns += 1_000_000
        runner.run_exchanges(runner.servo.hold_count)
        assert runner.state.sync_state is SyncState.FREERUN
        assert ru.sync_state is SyncState.FREERUN
        assert ru.reported_sync_state() == "FREERUN"
        assert ru.active_carrier_count() == 0
        assert not ru.is_radiating_capable()
        assert_gate_clean(ru)

    def test_holdover_on_exchange_timeout_shuts_carriers_down(self):
        timeline, ru, client, runner, listener = fully_up()
        runner.declare_timeout()
        assert ru.sync_state is SyncState.HOLDOVER
        assert ru.active_carrier_count() == 0
        assert ru.datastore.leaf("sync/state") == "HOLDOVER"

    def test_disable_sync_fault_prevents_lock_and_activation(self):
        plan = FaultPlan(disable_sync=True)
        timeline, ru, dhcp, listener, client = bring_up(plan=plan)
        runner = SyncRunner(
            timeline,
            SimClock(),
            SimClock(phase_offset_ns=500.0),
            lls_c1(),
            rng=random.Random(3),
            participating=ru.sync_participating,
            on_transition=ru.on_sync_transition,
        )
        ru.start_sync()
        assert not runner.run_until_locked(budget_s=5.0)
        assert runner.exchange_log == []
        with pytest.raises(RpcFault):
            client.edit_config({"carriers/c1/active": "true"})

    def test_config_rejection_fault_blocks_edits(self):
        plan = FaultPlan(reject_config_node="carriers")
        timeline, ru, dhcp, listener, client = bring_up(plan=plan)
        before = ru.datastore.snapshot()
        with pytest.raises(RpcFault) as err:
            client.edit_config({"radio/tx_power_dbm": "20.0"})
        assert "rejected" in str(err.value)
        assert ru.datastore.snapshot() == before

    def test_tx_power_range_is_validated(self):
        timeline, ru, dhcp, listener, client = bring_up()
        with pytest.raises(RpcFault):
            client.edit_config({"radio/tx_power_dbm": "99.0"})
        with pytest.raises(RpcFault):
            client.edit_config({"radio/tx_power_dbm": "not-a-number"})
        client.edit_config({"radio/tx_power_dbm": "33.5"})
        assert ru.datastore.leaf("radio/tx_power_dbm") == "33.5"


class TestSupervision:
    def test_expiry_closes_session_raises_alarm_and_deactivates(self):
        timeline, ru, client, runner, listener = fully_up()
        client.supervision_kick(interval_s=1.0, guard_s=0.5)
        timeline.run_until(timeline.now_ns + int(2.0e9))
        assert ru.server.session.state is SessionState.CLOSED
        active = ru.server.active_alarms()
        assert [a.fault_id for a in active] == [SUPERVISION_FAULT_ID]
        assert ru.datastore.leaf("supervision/state") == "expired"
        assert ru.active_carrier_count() == 0
        assert ru.phase is RuPhase.CALL_HOME
        assert ru.epoch == 1
        assert_gate_clean(ru)

    def test_kicks_keep_the_watchdog_quiet(self):
        timeline, ru, client, runner, listener = fully_up()
        client.supervision_kick(interval_s=1.0, guard_s=0.5)
        for _ in range(4):
            timeline.run_until(timeline.now_ns + int(0.9e9))
            client.supervision_kick()
        assert ru.server.session.state is SessionState.SUPERVISED
        assert ru.server.active_alarms() == []
        assert ru.active_carrier_count() == 1


class TestReset:
    def _stage_new_build(self, client):
        import hashlib

        image = b"build-2 payload"
        state = client.sw_download("B", "ru-base-2.0.0", image, hashlib.sha256(image).hexdigest())
        assert state == "VALID"
        client.sw_install("B")
        client.sw_activate("B")

    def test_activation_alone_keeps_the_old_build_running(self):
        timeline, ru, client, runner, listener = fully_up()
        self._stage_new_build(client)
        assert ru.server.software.running_slot().name == "A"
        assert ru.server.software.active_slot().name == "B"
        assert ru.datastore.leaf("software/slots/B/running") == "false"

    def test_reset_boots_into_activated_build_and_redials(self):
        timeline, ru, client, runner, listener = fully_up()
        self._stage_new_build(client)
        new_clients = []
        listener.on_accept = new_clients.append
        attempts_before = len(listener.attempts)
        client.reset()
        timeline.run_until(timeline.now_ns + 1_000_000)
        assert ru.server.software.running_slot().name == "B"
        assert ru.datastore.leaf("software/slots/B/running") == "true"
        assert len(listener.attempts) == attempts_before + 1
        assert listener.attempts[-1].accepted
        assert ru.epoch == 1
        assert ru.phase is RuPhase.MPLANE_UP
        assert ru.reported_sync_state() == "FREERUN"
        assert ru.active_carrier_count() == 0
        assert all(v == 0 for v in ru.counters.values())
        # the fresh session is live: the new client can read state
        assert len(new_clients) == 1
        assert new_clients[0].get("software/slots/B")["B"]["running"] == "true"

    def test_corrupt_download_fault_invalidates_the_image(self):
        import hashlib

        plan = FaultPlan(corrupt_software_checksum=True)
        timeline, ru, dhcp, listener, client = bring_up(plan=plan)
        image = b"build-2 payload"
        state = client.sw_download("B", "ru-base-2.0.0", image, hashlib.sha256(image).hexdigest())
        assert state == "INVALID"
        with pytest.raises(RpcFault):
            client.sw_install("B")


class TestDownlink:
    def test_identity_round_trip_within_compression_bound(self):
        timeline, ru, client, runner, listener = fully_up()
        carrier = ru.carrier
        grid = generate_grid(carrier, WaveformSpec(), Allocation())
        f, sf, sl, idx = coords_after(carrier, timeline, "D")
        deliver(timeline, ru, build_dl_flow(carrier, grid, Allocation(), f, sf, sl))
        assert ru.counters["received"] == 15
        assert ru.counters["dropped_early"] == ru.counters["dropped_late"] == 0
        result = analyze_dl_output(ru.rf.port_grid(idx, port=0), grid)
        assert result.verdict == "PASS"
        assert 0 < result.normalized_error <= 1e-3
        assert_gate_clean(ru)

    def test_partial_allocation_emits_only_inside_the_window(self):
        timeline, ru, client, runner, listener = fully_up()
        carrier = ru.carrier
        alloc = Allocation(start_prb=40, num_prb=24, start_symbol=2, num_symbol=8)
        grid = generate_grid(carrier, WaveformSpec(), alloc)
        f, sf, sl, idx = coords_after(carrier, timeline, "D")
        flow = build_dl_flow(carrier, grid, alloc, f, sf, sl)
        assert len(flow) == 1 + alloc.num_symbol
        deliver(timeline, ru, flow)
        assert ru.counters["received"] == 1 + alloc.num_symbol
        assert ru.counters["unscheduled"] == 0
        emitted = ru.rf.port_grid(idx, port=0)
        result = analyze_dl_output(emitted, grid)
        assert result.verdict == "PASS"
        mask = np.zeros_like(grid, dtype=bool)
        mask[40 * 12 : 64 * 12, 2:10] = True
        assert np.all(emitted[~mask] == 0)
        assert np.any(emitted[mask] != 0)

    def test_data_without_control_is_unscheduled(self):
        timeline, ru, client, runner, listener = fully_up()
        carrier = ru.carrier
        grid = generate_grid(carrier, WaveformSpec(), Allocation())
        f, sf, sl, idx = coords_after(carrier, timeline, "D")
        flow = build_dl_flow(carrier, grid, Allocation(), f, sf, sl)
        deliver(timeline, ru, flow[1:])  # drop the control message
        assert ru.counters["received"] == 0
        assert ru.counters["unscheduled"] == 14
        assert ru.rf.total_energy(idx) == 0.0

    def test_out_of_window_arrivals_are_dropped(self):
        timeline, ru, client, runner, listener = fully_up()
        carrier = ru.carrier
        grid = generate_grid(carrier, WaveformSpec(), Allocation())
        f, sf, sl, idx = coords_after(carrier, timeline, "D")
        flow = build_dl_flow(carrier, grid, Allocation(), f, sf, sl)
        slot_t0 = carrier.slot_start_ns(f, sf, sl)
        # control too early, all data too late: nothing may radiate
        ru.receive_frame(flow[0].frame, arrival_ns=slot_t0 - 1_000_000)
        for tf in flow[1:]:
            ru.receive_frame(tf.frame, arrival_ns=tf.time_ns + 300_000)
        assert ru.counters["dropped_early"] == 1
        assert ru.counters["dropped_late"] == 14
        assert ru.counters["received"] == 0
        assert ru.rf.total_energy(idx) == 0.0
        assert ru.datastore.leaf("counters/dropped_late") == "14"

    def test_frames_before_activation_count_not_ready(self):
        timeline, ru, dhcp, listener, client = bring_up()
        carrier = ru.carrier
        grid = generate_grid(carrier, WaveformSpec(), Allocation())
        f, sf, sl, idx = coords_after(carrier, timeline, "D")
        flow = build_dl_flow(carrier, grid, Allocation(), f, sf, sl)
        for tf in flow:
            ru.receive_frame(tf.frame, arrival_ns=tf.time_ns)
        assert ru.counters["not_ready"] == 15
        assert ru.counters["received"] == 0
        assert ru.rf.total_energy() == 0.0

    def test_unknown_beam_id_counts_and_stays_silent(self):
        timeline, ru, client, runner, listener = fully_up()
        carrier = ru.carrier
        grid = generate_grid(carrier, WaveformSpec(), Allocation())
        f, sf, sl, idx = coords_after(carrier, timeline, "D")
        deliver(timeline, ru, build_dl_flow(carrier, grid, Allocation(), f, sf, sl, beam_id=999))
        assert ru.counters["received"] == 15  # frames were valid and on time
        assert ru.counters["unknown_beam"] == 14
        assert ru.rf.total_energy(idx) == 0.0

    def test_beam_zero_is_port_zero_passthrough(self):
        timeline, ru, client, runner, listener = fully_up()
        carrier = ru.carrier
        grid = generate_grid(carrier, WaveformSpec(), Allocation())
        f, sf, sl, idx = coords_after(carrier, timeline, "D")
        deliver(timeline, ru, build_dl_flow(carrier, grid, Allocation(), f, sf, sl, beam_id=0))
        assert ru.rf.total_energy(idx) > 0
        for port in range(1, carrier.ru_ports):
            assert np.all(ru.rf.port_grid(idx, port=port) == 0)

    def test_table_beam_steers_toward_the_entry_azimuth(self):
        timeline, ru, client, runner, listener = fully_up()
        carrier = ru.carrier
        alloc = Allocation(num_prb=4)
        grid = generate_grid(carrier, WaveformSpec(), alloc)
        f, sf, sl, idx = coords_after(carrier, timeline, "D")
        # entry 31 of the synthetic table sits at -45 + 30 * 2.5 = +30 deg
        deliver(timeline, ru, build_dl_flow(carrier, grid, alloc, f, sf, sl, beam_id=31))
        stream = np.stack(
            [ru.rf.port_snapshot(idx, symbol=3, re_index=re) for re in range(12)], axis=1
        )
        detected = detect_beam_direction(stream)
        assert detected is not None
        assert abs(detected - 30.0) <= 1.0

    def test_inline_weights_override_the_table(self):
        timeline, ru, client, runner, listener = fully_up()
        carrier = ru.carrier
        alloc = Allocation(num_prb=4)
        grid = generate_grid(carrier, WaveformSpec(), alloc)
        f, sf, sl, idx = coords_after(carrier, timeline, "D")
        weights = tuple(complex(w) for w in steering_vector(-17.5, carrier.ru_ports))
        deliver(
            timeline,
            ru,
            build_dl_flow(carrier, grid, alloc, f, sf, sl, beam_id=31, beam_weights=weights),
        )
        stream = np.stack(
            [ru.rf.port_snapshot(idx, symbol=0, re_index=re) for re in range(12)], axis=1
        )
        detected = detect_beam_direction(stream)
        assert detected is not None
        assert abs(detected - (-17.5)) <= 1.0


class TestUplink:
    def test_scheduled_capture_returns_injected_grid(self):
        timeline, ru, client, runner, listener = fully_up()
        carrier = ru.carrier
        ul_grid = generate_grid(carrier, WaveformSpec(pn23_seed=0x5A5A), Allocation())
        f, sf, sl, idx = coords_after(carrier, timeline, "U")
        ru.receive_path.inject_ul_grid(idx, ul_grid)
        deliver(timeline, ru, build_ul_flow(carrier, Allocation(), f, sf, sl))
        assert len(ru.uplink_out) == 14
        ref_energy = float(np.sum(np.abs(ul_grid) ** 2))
        err_energy = 0.0
        seen_symbols = []
        for tf in ru.uplink_out:
            header, payload = decode_ecpri(tf.frame)
            msg = decode_uplane(payload, all_prb_count=carrier.n_prb)
            seen_symbols.append(msg.symbol_id)
            (section,) = msg.sections
            got = np.array(
                [i + 1j * q for blk in section.prbs for i, q in bfp_decompress(blk)]
            )
            err_energy += float(np.sum(np.abs(got - ul_grid[:, msg.symbol_id]) ** 2))
        assert seen_symbols == list(range(14))
        assert err_energy / ref_energy < 1e-3

    def test_capture_without_injection_is_silence(self):
        timeline, ru, client, runner, listener = fully_up()
        carrier = ru.carrier
        f, sf, sl, idx = coords_after(carrier, timeline, "U")
        deliver(timeline, ru, build_ul_flow(carrier, Allocation(num_prb=8), f, sf, sl))
        assert len(ru.uplink_out) == 14
        for tf in ru.uplink_out:
            _, payload = decode_ecpri(tf.frame)
            msg = decode_uplane(payload, all_prb_count=carrier.n_prb)
            for block in msg.sections[0].prbs:
                assert block.exponent == 0
                assert all(pair == (0, 0) for pair in block.mantissas)

    def test_capture_skipped_when_carriers_fell_during_the_slot(self):
        timeline, ru, client, runner, listener = fully_up()
        carrier = ru.carrier
        f, sf, sl, idx = coords_after(carrier, timeline, "U")
        flow = build_ul_flow(carrier, Allocation(), f, sf, sl)
        slot_t0 = carrier.slot_start_ns(f, sf, sl)
        for tf in flow:
            timeline.schedule_at(tf.time_ns, lambda tf=tf: ru.receive_frame(tf.frame))
        # carriers drop between the grant and the capture instants
        timeline.schedule_at(slot_t0 - 10_000, lambda: ru.deactivate_carriers("test teardown"))
        timeline.run_until(slot_t0 + carrier.slot_ns)
        assert ru.uplink_out == []


class TestPrach:
    def test_preamble_round_trip_correlates_cleanly(self):
        timeline, ru, client, runner, listener = fully_up()
        carrier = ru.carrier
        f, sf, sl, idx = coords_after(carrier, timeline, "U")
        frames, occasion = build_prach_st3_flow(carrier, PrachConfig(), f, sf, sl)
        assert occasion.start_ns == carrier.slot_start_ns(f, sf, sl) + 25_000
        ru.receive_path.inject_prach(occasion)
        deliver(timeline, ru, frames)
        assert len(ru.uplink_out) == 1
        assert ru.uplink_out[0].time_ns == occasion.start_ns
        _, payload = decode_ecpri(ru.uplink_out[0].frame)
        msg = decode_uplane(payload, all_prb_count=carrier.n_prb)
        got = np.array(
            [i + 1j * q for blk in msg.sections[0].prbs for i, q in bfp_decompress(blk)]
        )
        assert got.size == 144  # 12 PRBs, preamble plus zero pad
        assert np.all(got[139:] == 0)
        peak, shift = correlate_preamble(got[:139], root=occasion.root)
        assert peak >= 0.99
        assert shift == 0
        assert ru.counters["dropped_late"] == 0

    def test_no_injection_yields_silent_occasion(self):
        timeline, ru, client, runner, listener = fully_up()
        carrier = ru.carrier
        f, sf, sl, idx = coords_after(carrier, timeline, "U")
        frames, occasion = build_prach_st3_flow(carrier, PrachConfig(), f, sf, sl)
        deliver(timeline, ru, frames)
        assert len(ru.uplink_out) == 1
        _, payload = decode_ecpri(ru.uplink_out[0].frame)
        msg = decode_uplane(payload, all_prb_count=carrier.n_prb)
        got = np.array(
            [i + 1j * q for blk in msg.sections[0].prbs for i, q in bfp_decompress(blk)]
        )
        assert np.all(got == 0)
        peak, _ = correlate_preamble(got[:139], root=occasion.root)
        assert peak == 0.0
        assert ru.counters["dropped_late"] == 0

    def test_mistimed_injection_misses_the_occasion(self):
        timeline, ru, client, runner, listener = fully_up()
        carrier = ru.carrier
        f, sf, sl, idx = coords_after(carrier, timeline, "U")
        frames, occasion = build_prach_st3_flow(carrier, PrachConfig(), f, sf, sl)
        ru.receive_path.inject_prach(occasion, start_ns=occasion.start_ns + 2_000)
        deliver(timeline, ru, frames)
        assert ru.counters["dropped_late"] == 1
        _, payload = decode_ecpri(ru.uplink_out[0].frame)
        msg = decode_uplane(payload, all_prb_count=carrier.n_prb)
        got = np.array(
            [i + 1j * q for blk in msg.sections[0].prbs for i, q in bfp_decompress(blk)]
        )
        assert np.all(got == 0)

    def test_wrong_root_does_not_correlate(self):
        timeline, ru, client, runner, listener = fully_up()
        carrier = ru.carrier
        f, sf, sl, idx = coords_after(carrier, timeline, "U")
        frames, occasion = build_prach_st3_flow(carrier, PrachConfig(root=1), f, sf, sl)
        ru.receive_path.inject_prach(occasion)
        deliver(timeline, ru, frames)
        _, payload = decode_ecpri(ru.uplink_out[0].frame)
        msg = decode_uplane(payload, all_prb_count=carrier.n_prb)
        got = np.array(
            [i + 1j * q for blk in msg.sections[0].prbs for i, q in bfp_decompress(blk)]
        )
        wrong_peak, _ = correlate_preamble(got[:139], root=3)
        assert wrong_peak < 0.2


class TestAlarms:
    def test_triggered_alarm_reaches_a_subscribed_manager(self):
        timeline, ru, dhcp, listener, client = bring_up()
        client.subscribe("alarms")
        ru.trigger_alarm()
        assert len(client.notifications) == 1
        event = client.notifications[0].event
        assert event["fault_id"] == 9
        assert event["is_cleared"] is False
        assert ru.datastore.leaf("alarms/active_count") == "1"
        ru.clear_alarm()
        assert ru.server.active_alarms() == []
        assert client.notifications[-1].event["is_cleared"] is True

    def test_alarm_spec_from_the_fault_plan_wins(self):
        from ofhtest.emulator.faults import AlarmSpec

        plan = FaultPlan()
        plan.set_toggle("raise_alarm", AlarmSpec(fault_id=42, source="pa", severity="CRITICAL"))
        timeline, ru, dhcp, listener, client = bring_up(plan=plan)
        ru.trigger_alarm()
        (alarm,) = ru.server.active_alarms()
        assert (alarm.fault_id, alarm.fault_source) == (42, "pa")
        assert alarm.severity.value == "CRITICAL"
