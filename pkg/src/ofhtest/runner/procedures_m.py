"""Management-plane conformance procedures.

These cases exercise the radio's management behavior end to end: IPv6
bring-up and call home, notification subscription, connection supervision,
datastore retrieval with and without filters, alarm generation and the
active-alarm list, the software update/activate/reset ladder, hierarchical
management access, configurability, and the troubleshooting/trace log
facilities. Negative cases set their own fault toggle when the profile has
not already forced it, so the same procedure serves both the default
campaign and fault-injection studies.
"""

from __future__ import annotations

import hashlib
import ipaddress

from ofhtest.emulator.faults import AlarmSpec
from ofhtest.emulator.ru import RuPhase
from ofhtest.mplane.client import RpcFault
from ofhtest.mplane.hierarchy import HierarchicalGateway, OuterSession
from ofhtest.mplane.server import SUPERVISION_FAULT_ID
from ofhtest.mplane.types import RpcEnvelope, RpcOperation
from ofhtest.runner.environment import TestEnv
from ofhtest.runner.scenario import (
    CaseOutcome,
    CheckList,
    await_notifications,
    scenario,
)


def _is_ipv6(text: str) -> bool:
    try:
        ipaddress.IPv6Address(text)
    except (ValueError, TypeError):
        return False
    return True


def _dhcp_log(messages) -> bytes:
    lines = [f"{m.msg_type.name} txn={m.transaction_id:#08x} duid={m.duid}" for m in messages]
    return ("\n".join(lines) + "\n").encode()


def _attempt_log(listener) -> bytes:
    lines = [
        f"t={a.time_ns}ns id={a.ru_identity} fp={a.fingerprint} "
        f"{'accepted' if a.accepted else 'rejected'} {a.reason}".rstrip()
        for a in listener.attempts
    ]
    return ("\n".join(lines) + "\n").encode()


@scenario("3.1.1.7")
def transport_handshake_positive(env: TestEnv) -> CaseOutcome:
    """IPv6 bring-up: DHCPv6, call home, session establishment."""
    checks = CheckList()
    client = env.boot()

    order = [m.msg_type.name for m in env.ru.dhcp_messages]
    checks.add(
        "DHCPv6 four-message exchange ran in order",
        order == ["SOLICIT", "ADVERTISE", "REQUEST", "REPLY"],
    )
    lease = env.ru.lease
    checks.add(
        "lease carries a well-formed IPv6 address",
        lease is not None and _is_ipv6(lease.ipv6_address),
    )
    checks.add(
        "lease names the call home destination",
        lease is not None and lease.call_home_client[1] == 4334,
    )
    attempts = env.listener.attempts
    checks.add(
        "call home accepted on the first attempt",
        len(attempts) == 1 and attempts[0].accepted,
    )
    checks.add(
        "management session is open on both ends",
        client is not None
        and client.session.is_open()
        and env.ru.server.session.is_open(),
    )
    identity = client.get("identity").get("identity", {}) if client else {}
    checks.add(
        "radio answers a retrieval over the new session",
        identity.get("ru_id") == env.ru.identity,
    )
    return checks.outcome(
        metrics={
            "dhcp_messages": len(env.ru.dhcp_messages),
            "call_home_attempts": len(attempts),
            "phase": env.ru.phase.value,
        },
        evidence={
            "dhcpv6.txt": _dhcp_log(env.ru.dhcp_messages),
            "call_home.txt": _attempt_log(env.listener),
        },
    )


@scenario("3.1.1.8")
def transport_handshake_negative(env: TestEnv) -> CaseOutcome:
    """Untrusted radio: every call home attempt must be turned away."""
    if not env.plan.drop_callhome_auth:
        env.plan.drop_callhome_auth = True
    checks = CheckList()
    client = env.boot()
    # let the retry schedule burn through its whole budget
    horizon = int((env.ru.call_home_budget + 1) * env.ru.call_home_retry_s * 1e9)
    env.timeline.run_until(env.timeline.now_ns + horizon)

    attempts = env.listener.attempts
    checks.add("the radio kept trying within its retry budget", len(attempts) == env.ru.call_home_budget)
    checks.add("every attempt was rejected", bool(attempts) and not any(a.accepted for a in attempts))
    checks.add(
        "each rejection names the fingerprint mismatch",
        all("fingerprint" in a.reason for a in attempts),
    )
    checks.add(
        "no management session came up",
        client is None and not env.ru.server.session.is_open(),
    )
    checks.add("the radio stayed in the call home phase", env.ru.phase is RuPhase.CALL_HOME)
    return checks.outcome(
        metrics={"call_home_attempts": len(attempts), "phase": env.ru.phase.value},
        evidence={"call_home.txt": _attempt_log(env.listener)},
    )


@scenario("3.1.2.1")
def notification_subscription(env: TestEnv) -> CaseOutcome:
    checks = CheckList()
    client = env.require_session()

    sub_id = client.subscribe("alarms")
    again = client.subscribe("alarms")
    checks.add("subscription established", sub_id >= 1)
    checks.add("duplicate subscription is idempotent", again == sub_id)

    probe = AlarmSpec(fault_id=5, source="fan", severity="MINOR", text="subscription probe")
    env.ru.trigger_alarm(probe)
    env.ru.clear_alarm(probe)

    notes = await_notifications(client, 2)
    checks.add("both events reached the subscriber", len(notes) == 2)
    checks.add("events carry the subscription id", all(n.subscription_id == sub_id for n in notes))
    checks.add(
        "sequence numbers strictly increase",
        all(b.sequence > a.sequence for a, b in zip(notes, notes[1:])),
    )
    checks.add(
        "raise then clear visible in order",
        [n.event.get("is_cleared") for n in notes] == [False, True],
    )
    return checks.outcome(metrics={"notifications": len(notes), "subscription_id": sub_id})


@scenario("3.1.3.1")
def supervision_positive(env: TestEnv) -> CaseOutcome:
    """Keep-alives on time: the watchdog must never bite."""
    checks = CheckList()
    client = env.require_session()
    interval = env.profile.supervision_interval_s
    guard = env.profile.supervision_guard_s

    expiry = client.supervision_kick(interval, guard)
    checks.add("first kick arms the watchdog", expiry > env.timeline.now_ns)

    kicks = 1
    period_ns = int(interval * 0.9 * 1e9)
    for _ in range(6):
        env.timeline.run_until(env.timeline.now_ns + period_ns)
        client.supervision_kick()
        kicks += 1

    checks.add("session still open after six supervised periods", env.ru.server.session.is_open())
    checks.add(
        "no supervision fault was raised",
        all(a.fault_id != SUPERVISION_FAULT_ID for a in env.ru.server.active_alarms()),
    )
    checks.add(
        "management view reports supervision active",
        client.get("supervision")["supervision"]["state"] == "active",
    )
    return checks.outcome(
        metrics={"kicks": kicks, "interval_s": interval, "guard_s": guard}
    )


@scenario("3.1.3.2")
def supervision_negative(env: TestEnv) -> CaseOutcome:
    """Withheld acknowledgments: the watchdog must bite, loudly."""
    if not env.plan.withhold_supervision_ack:
        env.plan.withhold_supervision_ack = True
    checks = CheckList()
    client = env.require_session()
    interval = env.profile.supervision_interval_s
    guard = env.profile.supervision_guard_s

    client.subscribe("alarms")
    expiry = client.supervision_kick(interval, guard)  # the first kick is honored

    env.timeline.run_until(env.timeline.now_ns + int(interval * 0.9 * 1e9))
    refusal = None
    try:
        client.supervision_kick()
    except RpcFault as exc:
        refusal = exc.tag
    checks.add("keep-alive acknowledgment withheld", refusal == "operation-failed")

    env.timeline.run_until(expiry + int(0.1e9))
    after = None
    try:
        client.get("identity")
    except RpcFault as exc:
        after = exc.tag
    checks.add("watchdog expiry closed the session", after == "access-denied")

    supervision_notes = [
        n for n in await_notifications(client, 1)
        if n.event.get("fault_id") == SUPERVISION_FAULT_ID
    ]
    checks.add(
        "supervision fault notified before closure",
        len(supervision_notes) == 1 and supervision_notes[0].event["is_cleared"] is False,
    )
    checks.add(
        "radio withdrew its carriers on expiry",
        env.ru.active_carrier_count() == 0 and not env.ru.is_radiating_capable(),
    )

    recovered = env.ru.redial()
    checks.add("a fresh call home reconnects after expiry", recovered is not None)
    if recovered is not None:
        checks.add(
            "expired watchdog visible in the datastore",
            recovered.get("supervision")["supervision"]["state"] == "expired",
        )
        listing = recovered.get("alarms")["alarms"]["active"]
        checks.add(
            "supervision fault sits in the active alarm list",
            f"{SUPERVISION_FAULT_ID}@supervision" in listing.split(","),
        )
    return checks.outcome(
        metrics={
            "expiry_ns": expiry,
            "notifications": len(client.notifications),
            "epoch": env.ru.epoch,
        }
    )


@scenario("3.1.4.1")
def retrieval_unfiltered(env: TestEnv) -> CaseOutcome:
    checks = CheckList()
    client = env.require_session()

    tree = client.get()
    expected_top = {"identity", "sync", "supervision", "radio", "carriers", "counters", "software"}
    checks.add("full tree carries every expected subtree", expected_top <= set(tree))
    checks.add("identity matches the device", tree["identity"]["ru_id"] == env.ru.identity)
    checks.add(
        "radio parameters mirror the configured carrier",
        tree["radio"]["band"] == env.carrier.band
        and int(tree["radio"]["n_prb"]) == env.carrier.n_prb,
    )
    again = client.get()
    checks.add("retrieval is stable across consecutive reads", again == tree)
    return checks.outcome(metrics={"top_level_nodes": len(tree)})


@scenario("3.1.4.2")
def retrieval_filtered(env: TestEnv) -> CaseOutcome:
    checks = CheckList()
    client = env.require_session()

    full = client.get()
    radio = client.get("radio")
    checks.add("subtree filter returns exactly that subtree", radio == {"radio": full["radio"]})
    nested = client.get("carriers/c1")
    checks.add("nested filter selects the deep node", nested == {"c1": full["carriers"]["c1"]})
    leaf = client.get("identity/ru_id")
    checks.add("leaf filter returns the single leaf", leaf == {"ru_id": env.ru.identity})
    checks.add("filtered view is a strict subset of the full tree", set(radio) < set(full))
    checks.add("unmatched filter yields an empty document", client.get("no/such/node") == {})
    return checks.outcome(metrics={"full_tree_nodes": len(full)})


@scenario("3.1.5.1")
def alarm_notification(env: TestEnv) -> CaseOutcome:
    if env.plan.raise_alarm is None:
        env.plan.raise_alarm = AlarmSpec(
            fault_id=21, source="pa", severity="MAJOR",
            text="power amplifier overtemperature",
        )
    spec = env.plan.raise_alarm
    checks = CheckList()
    client = env.require_session()
    sub_id = client.subscribe("alarms")

    env.ru.trigger_alarm()
    raised = await_notifications(client, 1)
    checks.add("alarm notification pushed", len(raised) == 1)
    if raised:
        event = raised[0].event
        checks.add("fault id matches the injected alarm", event.get("fault_id") == spec.fault_id)
        checks.add("severity carried through", event.get("severity") == spec.severity)
        checks.add("source carried through", event.get("fault_source") == spec.source)
        checks.add("raise is not marked cleared", event.get("is_cleared") is False)
    checks.add(
        "active alarm count reflects the raise",
        client.get("alarms")["alarms"]["active_count"] == "1",
    )

    env.ru.clear_alarm()
    notes = await_notifications(client, 2)
    checks.add("clear notification pushed", len(notes) == 2)
    if len(notes) == 2:
        checks.add(
            "clear references the same fault and is marked cleared",
            notes[1].event.get("fault_id") == spec.fault_id
            and notes[1].event.get("is_cleared") is True,
        )
    checks.add(
        "active alarm list empty after the clear",
        client.get("alarms")["alarms"]["active_count"] == "0",
    )
    return checks.outcome(
        metrics={"fault_id": spec.fault_id, "subscription_id": sub_id}
    )


@scenario("3.1.5.2")
def active_alarm_list(env: TestEnv) -> CaseOutcome:
    checks = CheckList()
    client = env.require_session()

    first = AlarmSpec(fault_id=7, source="rx-chain", severity="MINOR", text="uplink path degraded")
    second = AlarmSpec(fault_id=3, source="fan", severity="MAJOR", text="fan rotor stalled")
    env.ru.trigger_alarm(first)
    env.ru.trigger_alarm(second)

    doc = client.get("alarms")["alarms"]
    checks.add("active count reflects both alarms", doc["active_count"] == "2")
    checks.add("listing is ordered by fault id", doc["active"] == "3@fan,7@rx-chain")

    env.ru.clear_alarm(second)
    doc = client.get("alarms")["alarms"]
    checks.add(
        "cleared alarm leaves the list",
        doc["active_count"] == "1" and doc["active"] == "7@rx-chain",
    )

    env.ru.clear_alarm(first)
    doc = client.get("alarms")["alarms"]
    checks.add("list drains to empty", doc["active_count"] == "0" and doc["active"] == "")
    return checks.outcome(metrics={"alarm_history": len(env.ru.server.alarm_history)})


def _image(tag: str) -> tuple[bytes, str]:
    image = (f"{tag} firmware image\n" * 64).encode()
    return image, hashlib.sha256(image).hexdigest()


@scenario("3.1.6.1")
def software_update_positive(env: TestEnv) -> CaseOutcome:
    checks = CheckList()
    client = env.require_session()

    image, checksum = _image("ru-base-2.0.0")
    state = client.sw_download("B", "ru-base-2.0.0", image, checksum)
    checks.add("download verifies against its checksum", state == "VALID")

    client.sw_install("B")
    slots = client.get("software")["software"]["slots"]
    checks.add(
        "installed build visible in the software inventory",
        slots["B"]["state"] == "INSTALLED" and slots["B"]["build_id"] == "ru-base-2.0.0",
    )
    checks.add(
        "running image untouched by the update",
        slots["A"]["running"] == "true" and slots["B"]["running"] == "false",
    )
    return checks.outcome(metrics={"image_bytes": len(image), "slot": "B"})


@scenario("3.1.6.2")
def software_update_negative(env: TestEnv) -> CaseOutcome:
    if not env.plan.corrupt_software_checksum:
        env.plan.corrupt_software_checksum = True
    checks = CheckList()
    client = env.require_session()

    image, checksum = _image("ru-base-2.0.1")
    state = client.sw_download("B", "ru-base-2.0.1", image, checksum)
    checks.add("corrupted transfer fails checksum verification", state == "INVALID")

    refusal = None
    try:
        client.sw_install("B")
    except RpcFault as exc:
        refusal = exc.tag
    checks.add("invalid download refuses to install", refusal == "operation-failed")

    slots = client.get("software")["software"]["slots"]
    checks.add("slot records the failed verification", slots["B"]["state"] == "INVALID")
    checks.add("running image unaffected", slots["A"]["running"] == "true")
    return checks.outcome(metrics={"download_state": state})


@scenario("3.1.7.1")
def software_activation_without_reset(env: TestEnv) -> CaseOutcome:
    checks = CheckList()
    client = env.require_session()

    image, checksum = _image("ru-base-2.1.0")
    checks.add("download valid", client.sw_download("B", "ru-base-2.1.0", image, checksum) == "VALID")
    client.sw_install("B")
    client.sw_activate("B")

    slots = client.get("software")["software"]["slots"]
    checks.add("activation marks the new build for next boot", slots["B"]["active"] == "true")
    checks.add("previous build loses its active mark", slots["A"]["active"] == "false")
    checks.add(
        "activation alone does not switch the running image",
        slots["A"]["running"] == "true" and slots["B"]["running"] == "false",
    )
    checks.add("session survived the activation", env.ru.server.session.is_open())
    return checks.outcome(metrics={"active_slot": "B", "running_slot": "A"})


@scenario("3.1.7.2")
def reset_after_activation(env: TestEnv) -> CaseOutcome:
    checks = CheckList()
    client = env.require_session()

    image, checksum = _image("ru-base-2.2.0")
    checks.add("download valid", client.sw_download("B", "ru-base-2.2.0", image, checksum) == "VALID")
    client.sw_install("B")
    client.sw_activate("B")

    attempts_before = len(env.listener.attempts)
    epoch_before = env.ru.epoch
    client.reset()
    env.timeline.run_until(env.timeline.now_ns + 1)  # the reset hook runs as a scheduled event

    fresh = env.client
    checks.add(
        "radio re-established a session after the reset",
        fresh is not None and fresh is not client and env.ru.server.session.is_open(),
    )
    checks.add(
        "exactly one new accepted call home attempt",
        len(env.listener.attempts) == attempts_before + 1
        and env.listener.attempts[-1].accepted,
    )
    checks.add("bring-up epoch advanced", env.ru.epoch == epoch_before + 1)
    if fresh is None:
        return checks.outcome()

    slots = fresh.get("software")["software"]["slots"]
    checks.add(
        "reset switched execution to the activated build",
        slots["B"]["running"] == "true" and slots["A"]["running"] == "false",
    )
    checks.add("traffic counters restarted", fresh.get("counters")["counters"]["received"] == "0")
    checks.add(
        "carriers come back inactive",
        fresh.get("carriers")["carriers"]["c1"]["active"] == "false",
    )
    checks.add("clock restarts in acquisition", fresh.get("sync")["sync"]["state"] == "FREERUN")
    return checks.outcome(
        metrics={"epoch": env.ru.epoch, "call_home_attempts": len(env.listener.attempts)}
    )


@scenario("3.1.8.6")
def hierarchical_sudo(env: TestEnv) -> CaseOutcome:
    """High-level manager operating through a gateway with and without
    elevated rights."""
    checks = CheckList()
    client = env.require_session()
    gateway = HierarchicalGateway(client)
    admin = OuterSession(identity="nms-admin", privileged=True)
    guest = OuterSession(identity="nms-guest", privileged=False)

    reply = gateway.forward(
        admin, RpcEnvelope(message_id=9001, operation=RpcOperation.GET, body={"filter": "identity"})
    )
    checks.add(
        "privileged outer session reaches the radio",
        reply.ok and reply.data == client.get("identity"),
    )

    before = client.get("radio")["radio"]["tx_power_dbm"]
    refused = gateway.forward(
        guest,
        RpcEnvelope(
            message_id=9002,
            operation=RpcOperation.EDIT_CONFIG,
            body={"changes": {"radio/tx_power_dbm": "10.0"}},
        ),
    )
    checks.add(
        "unprivileged outer session is refused",
        not refused.ok and refused.error_tag == "access-denied",
    )
    checks.add(
        "refused request never touched the datastore",
        client.get("radio")["radio"]["tx_power_dbm"] == before,
    )

    applied = gateway.forward(
        admin,
        RpcEnvelope(
            message_id=9003,
            operation=RpcOperation.EDIT_CONFIG,
            body={"changes": {"radio/tx_power_dbm": "21.0"}},
        ),
    )
    checks.add(
        "privileged edit lands",
        applied.ok and client.get("radio")["radio"]["tx_power_dbm"] == "21.0",
    )
    checks.add(
        "gateway accounting matches the traffic",
        gateway.forwarded == 2 and gateway.refused == 1,
    )
    return checks.outcome(
        metrics={"forwarded": gateway.forwarded, "refused": gateway.refused}
    )


@scenario("3.1.10.1")
def configurability_positive(env: TestEnv) -> CaseOutcome:
    checks = CheckList()
    client = env.require_session()

    before = client.get("radio")["radio"]["tx_power_dbm"]
    client.edit_config({"radio/tx_power_dbm": "33.5"})
    checks.add(
        "single-leaf change applied",
        client.get("radio")["radio"]["tx_power_dbm"] == "33.5",
    )

    client.edit_config({
        "carriers/c1/center_mhz": "3690.0",
        "carriers/c1/tx_power_dbm": "27.0",
    })
    c1 = client.get("carriers/c1")["c1"]
    checks.add(
        "multi-leaf change set applied together",
        c1["center_mhz"] == "3690.0" and c1["tx_power_dbm"] == "27.0",
    )

    client.edit_config({"radio/tx_power_dbm": before})
    checks.add(
        "parameter restores to its prior value",
        client.get("radio")["radio"]["tx_power_dbm"] == before,
    )
    return checks.outcome(metrics={"edits": 3})


@scenario("3.1.10.2")
def configurability_negative(env: TestEnv) -> CaseOutcome:
    """Rejected edits must leave the configuration exactly as it was."""
    if not env.plan.reject_config_node:
        env.plan.reject_config_node = "radio/tx_power_dbm"
    if not env.plan.disable_sync:
        env.plan.disable_sync = True
    checks = CheckList()
    client = env.require_session()
    snapshot = client.get()

    tag = message = None
    try:
        client.edit_config({"radio/tx_power_dbm": "30.0"})
    except RpcFault as exc:
        tag, message = exc.tag, exc.message
    checks.add(
        "configuration change rejected",
        tag == "invalid-value" and "rejected" in (message or ""),
    )

    # out-of-range values must be refused on their own merits as well
    env.plan.set_toggle("reject_config_node", None)
    tag2 = message2 = None
    try:
        client.edit_config({"radio/tx_power_dbm": "99.0"})
    except RpcFault as exc:
        tag2, message2 = exc.tag, exc.message
    checks.add(
        "out-of-range value refused",
        tag2 == "invalid-value" and "range" in (message2 or ""),
    )

    # with timing disabled the clock cannot lock, so activation must refuse
    env.start_sync()
    env.sync.run_exchanges(40)
    checks.add(
        "radio ignored timing while its recovery was disabled",
        env.ru.reported_sync_state() == "FREERUN" and env.sync.exchange_log == [],
    )
    tag3 = message3 = None
    try:
        client.edit_config({"carriers/c1/active": "true"})
    except RpcFault as exc:
        tag3, message3 = exc.tag, exc.message
    checks.add(
        "carrier activation refused without a locked clock",
        tag3 == "invalid-value" and "LOCKED" in (message3 or ""),
    )
    checks.add("radio never radiated", not env.ru.is_radiating_capable())
    checks.add("failed edits left the configuration untouched", client.get() == snapshot)
    return checks.outcome(metrics={"refusals": 3})


@scenario("3.1.12.1")
def troubleshooting_log(env: TestEnv) -> CaseOutcome:
    checks = CheckList()
    client = env.require_session()

    log_id = client.log_start("TROUBLESHOOTING")
    # stimulate state and alarm activity while the log is running
    image, checksum = _image("diag-build")
    client.sw_download("B", "diag-build", image, checksum)
    probe = AlarmSpec(fault_id=11, source="txm", severity="WARNING", text="diagnostic probe")
    env.ru.trigger_alarm(probe)
    env.ru.clear_alarm(probe)
    client.log_stop(log_id)

    doc = client.log_collect(log_id)
    events = doc["events"]
    categories = {e["category"] for e in events}
    checks.add("log session collected events", len(events) >= 3)
    checks.add(
        "state transitions and alarms both captured",
        "state" in categories and "alarm" in categories,
    )
    checks.add("management traffic excluded from troubleshooting logs", "rpc" not in categories)
    checks.add(
        "collection works after stop and names the kind",
        doc["kind"] == "TROUBLESHOOTING" and doc["stopped_ns"] is not None,
    )
    alarm_events = [e for e in events if e["category"] == "alarm"]
    checks.add(
        "alarm records carry the injected fault",
        [e["fault_id"] for e in alarm_events] == [11, 11]
        and [e["cleared"] for e in alarm_events] == [False, True],
    )
    return checks.outcome(metrics={"events": len(events), "log_id": log_id})


@scenario("3.1.12.2")
def trace_log(env: TestEnv) -> CaseOutcome:
    checks = CheckList()
    client = env.require_session()

    log_id = client.log_start("TRACE")
    client.get("identity")
    client.edit_config({"radio/tx_power_dbm": "25.0"})
    client.get("radio")
    client.log_stop(log_id)

    doc = client.log_collect(log_id)
    events = doc["events"]
    ops = [e["operation"] for e in events if e["category"] == "rpc"]
    checks.add("every management operation traced in order", ops == ["GET", "EDIT_CONFIG", "GET"])
    checks.add("trace holds nothing but rpc records", all(e["category"] == "rpc" for e in events))
    checks.add("log control plumbing is not traced", not any(op.startswith("LOG_") for op in ops))
    checks.add(
        "trace records carry message ids and timestamps",
        all("message_id" in e and "t_ns" in e for e in events),
    )
    return checks.outcome(metrics={"traced_operations": len(ops), "log_id": log_id})
