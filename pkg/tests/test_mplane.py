"""Management-plane engine: datastore, DHCPv6, sessions, supervision,
software, logs, hierarchy, transports."""

from __future__ import annotations

import hashlib
import socket

import pytest
from hypothesis import given, strategies as st

from ofhtest.mplane import (
    CallHomeListener,
    CallHomeOffer,
    Datastore,
    Dhcpv6Error,
    Dhcpv6Message,
    Dhcpv6MessageType,
    Dhcpv6Server,
    EditError,
    HierarchicalGateway,
    InMemoryChannel,
    MplaneClient,
    MplaneServer,
    RpcEnvelope,
    RpcFault,
    RpcOperation,
    RpcReply,
    SessionState,
    TcpChannel,
    run_dhcpv6_exchange,
)
from ofhtest.mplane.hierarchy import OuterSession
from ofhtest.mplane.server import SUPERVISION_FAULT_ID, ServerHooks
from ofhtest.mplane.transport import serve_envelopes, write_frame
from ofhtest.mplane.types import Severity
from ofhtest.simtime import SimTimeline


def sample_tree():
    return {
        "sync": {"state": "FREERUN", "domain": "24"},
        "radio": {"tx_power_dbm": "24"},
        "carriers": {"c0": {"active": "false", "band": "n77"}},
        "nested": {"inner": {"sync": {"state": "shadow"}}},
    }


# --- datastore ---------------------------------------------------------


def test_get_without_filter_returns_whole_tree():
    ds = Datastore(sample_tree())
    assert ds.get() == sample_tree()


def test_get_with_filter_returns_deepest_match():
    ds = Datastore(sample_tree())
    # two nodes named "sync"; the deeper one wins
    assert ds.get("sync") == {"sync": {"state": "shadow"}}
    assert ds.get("carriers/c0") == {"c0": {"active": "false", "band": "n77"}}


def test_get_with_unmatched_filter_returns_empty_fragment():
    ds = Datastore(sample_tree())
    assert ds.get("nonexistent") == {}


def test_edit_applies_changes():
    ds = Datastore(sample_tree())
    ds.edit({"radio/tx_power_dbm": "30", "carriers/c0/active": "true"})
    assert ds.leaf("radio/tx_power_dbm") == "30"
    assert ds.leaf("carriers/c0/active") == "true"


def test_edit_unknown_node_rejected():
    ds = Datastore(sample_tree())
    with pytest.raises(EditError) as err:
        ds.edit({"radio/nonexistent": "1"})
    assert err.value.tag == "unknown-node"


def test_edit_is_atomic_on_validation_failure():
    ds = Datastore(sample_tree())
    before = ds.snapshot()

    def validator(path, value, tree):
        if path == "carriers/c0/active" and value == "true":
            return "sync is not locked"
        return None

    with pytest.raises(EditError):
        ds.edit({"radio/tx_power_dbm": "31", "carriers/c0/active": "true"}, [validator])
    assert ds.snapshot() == before


@given(
    st.dictionaries(
        st.sampled_from(["radio/tx_power_dbm", "sync/state", "carriers/c0/active", "bogus/path"]),
        st.text(min_size=1, max_size=6),
        min_size=1,
    )
)
def test_edit_all_or_nothing_property(changes):
    ds = Datastore(sample_tree())
    before = ds.snapshot()
    try:
        ds.edit(changes)
    except EditError:
        assert ds.snapshot() == before
    else:
        for path, value in changes.items():
            assert ds.leaf(path) == value


# --- DHCPv6 --------------------------------------------------------------


def test_dhcpv6_four_message_exchange():
    server = Dhcpv6Server()
    lease, transcript = run_dhcpv6_exchange(server, "duid-0001")
    assert lease.ipv6_address == "fd00::10"
    assert lease.call_home_client == ("fd00::1", 4334)
    assert [m.msg_type for m in transcript] == [
        Dhcpv6MessageType.SOLICIT,
        Dhcpv6MessageType.ADVERTISE,
        Dhcpv6MessageType.REQUEST,
        Dhcpv6MessageType.REPLY,
    ]


def test_dhcpv6_distinct_clients_get_distinct_addresses():
    server = Dhcpv6Server()
    lease_a, _ = run_dhcpv6_exchange(server, "duid-a")
    lease_b, _ = run_dhcpv6_exchange(server, "duid-b")
    assert lease_a.ipv6_address != lease_b.ipv6_address


def test_dhcpv6_same_duid_is_stable():
    server = Dhcpv6Server()
    lease_1, _ = run_dhcpv6_exchange(server, "duid-a")
    lease_2, _ = run_dhcpv6_exchange(server, "duid-a")
    assert lease_1 == lease_2


def test_dhcpv6_request_before_solicit_rejected():
    server = Dhcpv6Server()
    msg = Dhcpv6Message(Dhcpv6MessageType.REQUEST, 7, "duid-x", address="fd00::10")
    with pytest.raises(Dhcpv6Error):
        server.handle(msg)


def test_dhcpv6_pool_exhaustion():
    server = Dhcpv6Server(pool_size=1)
    run_dhcpv6_exchange(server, "duid-a")
    with pytest.raises(Dhcpv6Error):
        run_dhcpv6_exchange(server, "duid-b")


# --- session plumbing -----------------------------------------------------


def make_pair(timeline=None, hooks=None):
    """Server with an established session and a bound client."""
    timeline = timeline or SimTimeline()
    server = MplaneServer(timeline, Datastore(sample_tree()), hooks=hooks)
    client = MplaneClient(peer_identity="o-ru")
    server.establish_session("ter", client.deliver_notification)
    client.bind(InMemoryChannel(server.dispatch_bytes).request)
    client.session.state = SessionState.ESTABLISHED
    return timeline, server, client


def test_rpc_rejected_before_session_established():
    server = MplaneServer(SimTimeline(), Datastore(sample_tree()))
    reply = server.dispatch(RpcEnvelope(1, RpcOperation.GET))
    assert not reply.ok
    assert reply.error_tag == "access-denied"


def test_reply_carries_request_message_id():
    _, server, _ = make_pair()
    for message_id in (1, 77, 200):
        reply = server.dispatch(RpcEnvelope(message_id, RpcOperation.GET))
        assert reply.message_id == message_id


def test_get_and_filtered_get_over_channel():
    _, _, client = make_pair()
    assert client.get("sync") == {"sync": {"state": "shadow"}}
    tree = client.get()
    assert "radio" in tree and "carriers" in tree


def test_edit_config_rpc_error_keeps_datastore():
    _, server, client = make_pair()
    before = server.datastore.snapshot()
    with pytest.raises(RpcFault) as err:
        client.edit_config({"does/not/exist": "1"})
    assert err.value.tag == "unknown-node"
    assert server.datastore.snapshot() == before


def test_edit_config_applies_and_reports_changes():
    seen = {}
    hooks = ServerHooks(on_config_changed=lambda ch: seen.update(ch))
    _, server, client = make_pair(hooks=hooks)
    client.edit_config({"radio/tx_power_dbm": "30"})
    assert server.datastore.leaf("radio/tx_power_dbm") == "30"
    assert seen == {"radio/tx_power_dbm": "30"}


def test_call_home_accept_flow():
    timeline = SimTimeline()
    server = MplaneServer(timeline, Datastore(sample_tree()))
    listener = CallHomeListener(trust_anchor="fp-good", now=lambda: timeline.now_ns)

    def connect(client):
        session_id = server.establish_session("ter", client.deliver_notification)
        client.bind(InMemoryChannel(server.dispatch_bytes).request)
        return session_id

    offer = CallHomeOffer("o-ru", "fp-good", "fd00::10", connect)
    accepted, _, client = listener.receive_call_home(offer)
    assert accepted and client is not None
    assert client.session.state == SessionState.ESTABLISHED
    assert server.session.state == SessionState.ESTABLISHED
    assert client.get("sync")  # RPC works after establishment


def test_call_home_rejected_on_bad_fingerprint():
    listener = CallHomeListener(trust_anchor="fp-good")
    offer = CallHomeOffer("o-ru", "fp-evil", "fd00::10", lambda client: 0)
    accepted, reason, client = listener.receive_call_home(offer)
    assert not accepted and client is None
    assert "fingerprint" in reason
    assert listener.attempts[-1].accepted is False


# --- subscriptions ---------------------------------------------------------


def test_alarm_notification_delivered_in_order():
    _, server, client = make_pair()
    sub_id = client.subscribe("alarms")
    server.raise_alarm(9, "radio", Severity.MAJOR, "overtemperature")
    server.clear_alarm(9, "radio")
    assert [n.event["is_cleared"] for n in client.notifications] == [False, True]
    assert [n.subscription_id for n in client.notifications] == [sub_id, sub_id]
    seqs = [n.sequence for n in client.notifications]
    assert seqs == sorted(seqs)


def test_events_before_subscription_not_delivered():
    _, server, client = make_pair()
    server.raise_alarm(9, "radio", Severity.MAJOR)
    client.subscribe("alarms")
    server.raise_alarm(10, "radio", Severity.MINOR)
    assert [n.event["fault_id"] for n in client.notifications] == [10]


def test_duplicate_subscribe_is_idempotent():
    _, server, client = make_pair()
    first = client.subscribe("alarms")
    second = client.subscribe("alarms")
    assert first == second
    server.raise_alarm(9, "radio", Severity.MAJOR)
    assert len(client.notifications) == 1


def test_active_alarm_list_is_raised_minus_cleared():
    _, server, _ = make_pair()
    server.raise_alarm(9, "radio", Severity.MAJOR)
    server.raise_alarm(12, "sync", Severity.MINOR)
    server.clear_alarm(9, "radio")
    active = server.active_alarms()
    assert [(a.fault_id, a.fault_source) for a in active] == [(12, "sync")]
    assert len(server.alarm_history) == 3


# --- supervision ------------------------------------------------------------


def test_supervision_kicks_keep_session_alive():
    timeline, server, client = make_pair()
    client.supervision_kick(interval_s=60, guard_s=10)
    assert server.session.state == SessionState.SUPERVISED
    for k in range(1, 6):
        timeline.run_until(k * 60_000_000_000)
        client.supervision_kick()
    assert server.session.state == SessionState.SUPERVISED
    assert server.active_alarms() == []


def test_supervision_expiry_closes_session_and_raises_alarm():
    deactivated = []
    hooks = ServerHooks(on_supervision_expired=lambda: deactivated.append(True))
    timeline, server, client = make_pair(hooks=hooks)
    client.supervision_kick(interval_s=60, guard_s=10)
    timeline.run_until(70_000_000_000)  # exactly interval + guard with no kick
    assert server.session.state == SessionState.CLOSED
    assert deactivated == [True]
    assert any(a.fault_id == SUPERVISION_FAULT_ID for a in server.active_alarms())


def test_supervision_kick_at_expiry_instant_is_late():
    timeline, server, client = make_pair()
    client.supervision_kick(interval_s=60, guard_s=10)
    # schedule the competing kick at exactly the expiry instant; the expiry
    # event was scheduled first, so it runs first and closes the session
    outcome = {}

    def late_kick():
        try:
            client.supervision_kick()
            outcome["kicked"] = True
        except RpcFault as exc:
            outcome["error"] = exc.tag

    timeline.schedule_at(70_000_000_000, late_kick)
    timeline.run_until(70_000_000_000)
    assert server.session.state == SessionState.CLOSED
    assert outcome == {"error": "access-denied"}


def test_supervision_withheld_ack_lets_timer_expire():
    hooks = ServerHooks(fault_active=lambda name: name == "withhold_supervision_ack")
    timeline, server, client = make_pair(hooks=hooks)
    client.supervision_kick(interval_s=60, guard_s=10)  # first kick arms the watchdog
    timeline.run_until(60_000_000_000)
    with pytest.raises(RpcFault):
        client.supervision_kick()
    timeline.run_until(70_000_000_000)
    assert server.session.state == SessionState.CLOSED


def test_first_kick_requires_interval_and_guard():
    _, _, client = make_pair()
    with pytest.raises(RpcFault) as err:
        client.supervision_kick()
    assert err.value.tag == "invalid-value"


# --- software ---------------------------------------------------------------


def build_image(tag: str) -> tuple[bytes, str]:
    image = f"firmware:{tag}".encode() * 20
    return image, hashlib.sha256(image).hexdigest()


def test_software_download_install_activate():
    _, server, client = make_pair()
    image, checksum = build_image("2.0.0")
    assert client.sw_download("B", "ru-2.0.0", image, checksum) == "VALID"
    client.sw_install("B")
    client.sw_activate("B")
    inv = server.software
    assert inv.slot("B").active and not inv.slot("B").running
    assert inv.slot("A").running
    assert server.datastore.leaf("software/slots/B/active") == "true"


def test_software_corrupt_download_cannot_install():
    hooks = ServerHooks(fault_active=lambda name: name == "corrupt_software_checksum")
    _, server, client = make_pair(hooks=hooks)
    image, checksum = build_image("2.0.0")
    assert client.sw_download("B", "ru-2.0.0", image, checksum) == "INVALID"
    with pytest.raises(RpcFault) as err:
        client.sw_install("B")
    assert err.value.tag == "operation-failed"


def test_software_reset_swaps_running_slot():
    _, server, client = make_pair()
    image, checksum = build_image("2.0.0")
    client.sw_download("B", "ru-2.0.0", image, checksum)
    client.sw_install("B")
    client.sw_activate("B")
    target = server.software.apply_reset()
    assert target.name == "B"
    assert server.software.running_slot().name == "B"
    running = [s for s in server.software.slots.values() if s.running]
    assert len(running) == 1


def test_exactly_one_running_slot_always():
    _, server, client = make_pair()
    inv = server.software
    assert inv.running_slot().name == "A"
    image, checksum = build_image("x")
    client.sw_download("B", "x", image, checksum)
    assert inv.running_slot().name == "A"
    client.sw_install("B")
    client.sw_activate("B")
    inv.apply_reset()
    assert inv.running_slot().name == "B"


# --- diagnostic logs ----------------------------------------------------------


def test_troubleshooting_log_covers_window():
    _, server, client = make_pair()
    log_id = client.log_start("TROUBLESHOOTING")
    server.raise_alarm(3, "radio", Severity.MINOR)
    client.log_stop(log_id)
    server.raise_alarm(4, "radio", Severity.MINOR)  # outside the window
    artifact = client.log_collect(log_id)
    assert artifact["kind"] == "TROUBLESHOOTING"
    fault_ids = [e.get("fault_id") for e in artifact["events"] if e["category"] == "alarm"]
    assert fault_ids == [3]


def test_immediate_stop_yields_empty_but_valid_log():
    _, _, client = make_pair()
    log_id = client.log_start("TRACE")
    client.log_stop(log_id)
    artifact = client.log_collect(log_id)
    assert artifact["events"] == []
    assert artifact["stopped_ns"] is not None


def test_trace_log_records_rpc_traffic():
    _, _, client = make_pair()
    log_id = client.log_start("TRACE")
    client.get("sync")
    client.log_stop(log_id)
    artifact = client.log_collect(log_id)
    operations = [e["operation"] for e in artifact["events"]]
    assert "GET" in operations


def test_collect_unknown_log_errors():
    _, _, client = make_pair()
    with pytest.raises(RpcFault) as err:
        client.log_collect(99)
    assert err.value.tag == "unknown-node"


# --- hierarchy -----------------------------------------------------------------


def test_privileged_forwarding_matches_direct_request():
    _, _, client = make_pair()
    gateway = HierarchicalGateway(client)
    outer = OuterSession(identity="smo", privileged=True)
    forwarded = gateway.forward(outer, RpcEnvelope(500, RpcOperation.GET, {"filter": "sync"}))
    assert forwarded.ok
    assert forwarded.data == client.get("sync")
    assert gateway.forwarded == 1


def test_unprivileged_forwarding_refused_without_side_effects():
    _, server, client = make_pair()
    gateway = HierarchicalGateway(client)
    before = server.datastore.snapshot()
    outer = OuterSession(identity="guest", privileged=False)
    reply = gateway.forward(
        outer,
        RpcEnvelope(
            501, RpcOperation.EDIT_CONFIG, {"changes": {"radio/tx_power_dbm": "40"}}
        ),
    )
    assert not reply.ok and reply.error_tag == "access-denied"
    assert server.datastore.snapshot() == before
    assert gateway.refused == 1


# --- TCP transport ---------------------------------------------------------------


def test_tcp_channel_round_trip_and_notification():
    timeline = SimTimeline()
    server = MplaneServer(timeline, Datastore(sample_tree()))
    client = MplaneClient(peer_identity="o-ru")
    server.establish_session("ter", lambda data: None)

    listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    listener.bind(("127.0.0.1", 0))
    listener.listen(1)
    port = listener.getsockname()[1]

    ru_side = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    ru_side.connect(("127.0.0.1", port))
    ter_side, _ = listener.accept()
    listener.close()

    serve_thread = serve_envelopes(ru_side, server.dispatch_bytes)
    channel = TcpChannel(ter_side, on_notification=client.deliver_notification)
    client.bind(channel.request)
    client.session.state = SessionState.ESTABLISHED

    # re-register the notification sink to push over the socket
    server._notify_sink = lambda data: write_frame(ru_side, data)

    assert client.get("sync") == {"sync": {"state": "shadow"}}
    client.subscribe("alarms")
    server.raise_alarm(6, "radio", Severity.MAJOR)

    deadline = 50
    while not client.notifications and deadline:
        import time

        time.sleep(0.01)
        deadline -= 1
    assert client.notifications and client.notifications[0].event["fault_id"] == 6

    channel.close()
    ru_side.close()
    serve_thread.join(timeout=2)
