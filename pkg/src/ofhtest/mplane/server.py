"""Management server embedded in the radio.

Owns the datastore, alarm list, software inventory, subscriptions,
supervision watchdog, and diagnostic log sessions. The server is reachable
only through :meth:`dispatch`, which enforces the session gate: nothing but
the call home authentication (handled outside, before a session exists) is
accepted until the session is ESTABLISHED.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable

from ofhtest.mplane.datastore import Datastore, EditError, Validator
from ofhtest.mplane.software import SoftwareError, SoftwareInventory
from ofhtest.mplane.types import (
    MplaneSession,
    Notification,
    RpcEnvelope,
    RpcOperation,
    RpcReply,
    SessionState,
    Severity,
)
from ofhtest.simtime import SimTimeline

log = logging.getLogger(__name__)

SUPERVISION_FAULT_ID = 17


@dataclass
class Alarm:
    fault_id: int
    fault_source: str
    severity: Severity
    text: str = ""
    is_cleared: bool = False
    event_time_ns: int = 0


@dataclass
class ServerHooks:
    """Callbacks into the surrounding radio emulator."""

    on_supervision_expired: Callable[[], None] | None = None
    on_reset: Callable[[], None] | None = None
    on_config_changed: Callable[[dict[str, str]], None] | None = None
    fault_active: Callable[[str], bool] = lambda name: False


@dataclass
class _LogSession:
    log_id: int
    kind: str  # TROUBLESHOOTING or TRACE
    active: bool = True
    started_ns: int = 0
    stopped_ns: int | None = None
    events: list[dict[str, Any]] = field(default_factory=list)


class MplaneServer:
    def __init__(
        self,
        timeline: SimTimeline,
        datastore: Datastore,
        identity: str = "o-ru",
        hooks: ServerHooks | None = None,
    ) -> None:
        self.timeline = timeline
        self.datastore = datastore
        self.identity = identity
        self.hooks = hooks or ServerHooks()
        self.validators: list[Validator] = []
        self.software = SoftwareInventory()
        self.session = MplaneSession()
        self.alarm_history: list[Alarm] = []
        self._active_alarms: dict[tuple[int, str], Alarm] = {}
        self._notify_sink: Callable[[bytes], None] | None = None
        self._subscriptions: dict[str, int] = {}
        self._next_subscription_id = 1
        self._notify_sequence = 0
        self._logs: dict[int, _LogSession] = {}
        self._next_log_id = 1
        self._next_session_id = 1
        self._supervision_handle: int | None = None
        self._supervision_generation = 0
        self._mirror_software()

    def refresh_software_mirror(self) -> None:
        """Re-publish the software inventory into the datastore (for use
        after out-of-band inventory changes such as a reset)."""
        self._mirror_software()

    # -- session lifecycle -----------------------------------------------

    def establish_session(self, peer_identity: str, notify_sink: Callable[[bytes], None]) -> int:
        session_id = self._next_session_id
        self._next_session_id += 1
        self.session = MplaneSession(
            peer_identity=peer_identity,
            session_id=session_id,
            state=SessionState.ESTABLISHED,
        )
        self._notify_sink = notify_sink
        self._subscriptions.clear()
        self._record("state", {"session": "ESTABLISHED", "peer": peer_identity})
        return session_id

    def close_session(self, reason: str) -> None:
        if self.session.state == SessionState.CLOSED:
            return
        self.session.state = SessionState.CLOSED
        self._notify_sink = None
        self._supervision_generation += 1  # invalidates pending expiry checks
        self._record("state", {"session": "CLOSED", "reason": reason})

    def set_notify_sink(self, sink: Callable[[bytes], None] | None) -> None:
        """Redirect pushed notifications, e.g. onto a transport bridge."""
        self._notify_sink = sink

    # -- alarms ------------------------------------------------------------

    def raise_alarm(self, fault_id: int, source: str, severity: Severity, text: str = "") -> Alarm:
        alarm = Alarm(
            fault_id=fault_id,
            fault_source=source,
            severity=severity,
            text=text,
            is_cleared=False,
            event_time_ns=self.timeline.now_ns,
        )
        self.alarm_history.append(alarm)
        self._active_alarms[(fault_id, source)] = alarm
        self._mirror_alarms()
        self._record("alarm", {"fault_id": fault_id, "source": source, "cleared": False})
        self._notify("alarms", {
            "type": "alarm",
            "fault_id": fault_id,
            "fault_source": source,
            "severity": severity.value,
            "is_cleared": False,
            "text": text,
        })
        return alarm

    def clear_alarm(self, fault_id: int, source: str) -> None:
        alarm = Alarm(
            fault_id=fault_id,
            fault_source=source,
            severity=Severity.WARNING,
            is_cleared=True,
            event_time_ns=self.timeline.now_ns,
        )
        self.alarm_history.append(alarm)
        self._active_alarms.pop((fault_id, source), None)
        self._mirror_alarms()
        self._record("alarm", {"fault_id": fault_id, "source": source, "cleared": True})
        self._notify("alarms", {
            "type": "alarm",
            "fault_id": fault_id,
            "fault_source": source,
            "severity": Severity.WARNING.value,
            "is_cleared": True,
            "text": "",
        })

    def active_alarms(self) -> list[Alarm]:
        return sorted(self._active_alarms.values(), key=lambda a: (a.fault_id, a.fault_source))

    # -- dispatch ----------------------------------------------------------

    def dispatch_bytes(self, data: bytes) -> bytes:
        envelope = RpcEnvelope.from_bytes(data)
        return self.dispatch(envelope).to_bytes()

    def dispatch(self, envelope: RpcEnvelope) -> RpcReply:
        log_control = (RpcOperation.LOG_START, RpcOperation.LOG_STOP, RpcOperation.LOG_COLLECT)
        if envelope.operation not in log_control:
            # traces capture the traffic under observation, not the
            # observation plumbing itself
            self._record("rpc", {
                "operation": envelope.operation.value,
                "message_id": envelope.message_id,
            })
        if not self.session.is_open():
            return self._error(
                envelope, "access-denied", f"no RPC accepted in state {self.session.state.value}"
            )
        handler = {
            RpcOperation.GET: self._rpc_get,
            RpcOperation.EDIT_CONFIG: self._rpc_edit_config,
            RpcOperation.SUBSCRIBE: self._rpc_subscribe,
            RpcOperation.SUPERVISION_KICK: self._rpc_supervision_kick,
            RpcOperation.SW_DOWNLOAD: self._rpc_sw_download,
            RpcOperation.SW_INSTALL: self._rpc_sw_install,
            RpcOperation.SW_ACTIVATE: self._rpc_sw_activate,
            RpcOperation.RESET: self._rpc_reset,
            RpcOperation.LOG_START: self._rpc_log_start,
            RpcOperation.LOG_STOP: self._rpc_log_stop,
            RpcOperation.LOG_COLLECT: self._rpc_log_collect,
        }[envelope.operation]
        try:
            return handler(envelope)
        except (EditError, SoftwareError) as exc:
            return self._error(envelope, exc.tag, exc.message)

    # -- handlers ------------------------------------------------------------

    def _rpc_get(self, env: RpcEnvelope) -> RpcReply:
        fragment = self.datastore.get(env.body.get("filter"))
        return RpcReply(message_id=env.message_id, ok=True, data=fragment)

    def _rpc_edit_config(self, env: RpcEnvelope) -> RpcReply:
        changes = dict(env.body.get("changes", {}))
        if not changes:
            return self._error(env, "invalid-value", "empty change set")
        reject = self.hooks.fault_active("reject_config_node")
        validators = list(self.validators)
        if reject:
            validators.append(lambda path, value, tree: "rejected by fault plan")
        self.datastore.edit(changes, validators)
        if self.hooks.on_config_changed:
            self.hooks.on_config_changed(changes)
        return RpcReply(message_id=env.message_id, ok=True)

    def _rpc_subscribe(self, env: RpcEnvelope) -> RpcReply:
        stream = env.body.get("stream", "alarms")
        if stream in self._subscriptions:
            sub_id = self._subscriptions[stream]  # duplicate subscribe is idempotent
        else:
            sub_id = self._next_subscription_id
            self._next_subscription_id += 1
            self._subscriptions[stream] = sub_id
        return RpcReply(message_id=env.message_id, ok=True, data={"subscription_id": sub_id})

    def _rpc_supervision_kick(self, env: RpcEnvelope) -> RpcReply:
        if self.hooks.fault_active("withhold_supervision_ack") and self.session.last_kick_ns is not None:
            # deliberately do not refresh the watchdog
            return self._error(env, "operation-failed", "supervision acknowledgment withheld")
        session = self.session
        if session.last_kick_ns is None:
            interval = float(env.body.get("interval_s", 0))
            guard = float(env.body.get("guard_s", 0))
            if interval <= 0 or guard <= 0:
                return self._error(
                    env, "invalid-value", "first kick must carry interval_s and guard_s"
                )
            session.supervision_interval_s = interval
            session.supervision_guard_s = guard
            session.state = SessionState.SUPERVISED
            self._record("state", {"session": "SUPERVISED"})
        session.last_kick_ns = self.timeline.now_ns
        expiry_ns = self._expiry_instant()
        self._supervision_generation += 1
        generation = self._supervision_generation
        self._supervision_handle = self.timeline.schedule_at(
            expiry_ns, lambda: self._check_supervision(generation)
        )
        self.datastore.force_set("supervision/state", "active")
        return RpcReply(message_id=env.message_id, ok=True, data={"next_expiry_ns": expiry_ns})

    def _expiry_instant(self) -> int:
        session = self.session
        window_ns = int((session.supervision_interval_s + session.supervision_guard_s) * 1e9)
        assert session.last_kick_ns is not None
        return session.last_kick_ns + window_ns

    def _check_supervision(self, generation: int) -> None:
        if generation != self._supervision_generation:
            return  # a later kick superseded this deadline
        session = self.session
        if session.state != SessionState.SUPERVISED or session.last_kick_ns is None:
            return
        if self.timeline.now_ns >= self._expiry_instant():
            self._expire_supervision()

    def _expire_supervision(self) -> None:
        self._record("state", {"session": "SUPERVISION_EXPIRED"})
        self.datastore.force_set("supervision/state", "expired")
        self.raise_alarm(
            SUPERVISION_FAULT_ID,
            "supervision",
            Severity.MAJOR,
            "supervision watchdog expired",
        )
        if self.hooks.on_supervision_expired:
            self.hooks.on_supervision_expired()
        self.close_session("supervision watchdog expired")

    def _rpc_sw_download(self, env: RpcEnvelope) -> RpcReply:
        body = env.body
        image = bytes.fromhex(body.get("image_hex", ""))
        if self.hooks.fault_active("corrupt_software_checksum") and image:
            image = bytes([image[0] ^ 0xFF]) + image[1:]
        state = self.software.download(
            body.get("slot", "B"), body.get("build_id", ""), image, body.get("checksum", "")
        )
        self._mirror_software()
        self._record("state", {"software": body.get("slot", "B"), "download": state.value})
        return RpcReply(message_id=env.message_id, ok=True, data={"state": state.value})

    def _rpc_sw_install(self, env: RpcEnvelope) -> RpcReply:
        self.software.install(env.body.get("slot", "B"))
        self._mirror_software()
        return RpcReply(message_id=env.message_id, ok=True)

    def _rpc_sw_activate(self, env: RpcEnvelope) -> RpcReply:
        self.software.activate(env.body.get("slot", "B"))
        self._mirror_software()
        return RpcReply(message_id=env.message_id, ok=True)

    def _rpc_reset(self, env: RpcEnvelope) -> RpcReply:
        self._record("state", {"reset": "requested"})
        if self.hooks.on_reset:
            # run after the reply is on the wire
            self.timeline.schedule_in(0, self.hooks.on_reset)
        return RpcReply(message_id=env.message_id, ok=True)

    def _rpc_log_start(self, env: RpcEnvelope) -> RpcReply:
        kind = env.body.get("kind", "TROUBLESHOOTING")
        if kind not in ("TROUBLESHOOTING", "TRACE"):
            return self._error(env, "invalid-value", f"unknown log kind {kind}")
        log_id = self._next_log_id
        self._next_log_id += 1
        self._logs[log_id] = _LogSession(log_id=log_id, kind=kind, started_ns=self.timeline.now_ns)
        return RpcReply(message_id=env.message_id, ok=True, data={"log_id": log_id})

    def _rpc_log_stop(self, env: RpcEnvelope) -> RpcReply:
        session = self._logs.get(int(env.body.get("log_id", 0)))
        if session is None:
            return self._error(env, "unknown-node", "no such log session")
        session.active = False
        session.stopped_ns = self.timeline.now_ns
        return RpcReply(message_id=env.message_id, ok=True)

    def _rpc_log_collect(self, env: RpcEnvelope) -> RpcReply:
        session = self._logs.get(int(env.body.get("log_id", 0)))
        if session is None:
            return self._error(env, "unknown-node", "no such log session")
        return RpcReply(
            message_id=env.message_id,
            ok=True,
            data={
                "log_id": session.log_id,
                "kind": session.kind,
                "started_ns": session.started_ns,
                "stopped_ns": session.stopped_ns,
                "events": list(session.events),
            },
        )

    # -- internals -----------------------------------------------------------

    def _error(self, env: RpcEnvelope, tag: str, message: str) -> RpcReply:
        log.debug("rpc-error %s: %s", tag, message)
        return RpcReply(
            message_id=env.message_id,
            ok=False,
            error_tag=tag,
            error_message=message,
            severity=Severity.MAJOR,
        )

    def _notify(self, stream: str, event: dict[str, Any]) -> None:
        if self._notify_sink is None:
            return
        for sub_stream, sub_id in self._subscriptions.items():
            if sub_stream in (stream, "all"):
                self._notify_sequence += 1
                note = Notification(
                    subscription_id=sub_id,
                    stream=stream,
                    event=event,
                    sequence=self._notify_sequence,
                )
                self._notify_sink(note.to_bytes())

    def _record(self, category: str, detail: dict[str, Any]) -> None:
        event = {"t_ns": self.timeline.now_ns, "category": category, **detail}
        for session in self._logs.values():
            if not session.active:
                continue
            wanted = ("rpc",) if session.kind == "TRACE" else ("state", "alarm")
            if category in wanted:
                session.events.append(event)

    def _mirror_alarms(self) -> None:
        self.datastore.force_set("alarms/active_count", str(len(self._active_alarms)))
        listing = ",".join(
            f"{a.fault_id}@{a.fault_source}" for a in self.active_alarms()
        )
        self.datastore.force_set("alarms/active", listing)

    def _mirror_software(self) -> None:
        for slot in self.software.slots.values():
            base = f"software/slots/{slot.name}"
            self.datastore.force_set(f"{base}/build_id", slot.build_id)
            self.datastore.force_set(f"{base}/state", slot.state.value)
            self.datastore.force_set(f"{base}/active", "true" if slot.active else "false")
            self.datastore.force_set(f"{base}/running", "true" if slot.running else "false")
