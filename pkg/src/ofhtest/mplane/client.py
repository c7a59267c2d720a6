"""Management client on the test-equipment side, plus the call home door.

The radio initiates the transport (call home); the tester authenticates the
radio's certificate fingerprint against its trust anchor and only then takes
the manager role over the established channel. All requests flow through a
channel object so that in-memory and TCP transports are interchangeable and
every envelope can be tapped into evidence logs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable

from ofhtest.mplane.types import (
    MplaneSession,
    Notification,
    RpcEnvelope,
    RpcFault,
    RpcOperation,
    RpcReply,
    SessionState,
)

log = logging.getLogger(__name__)


@dataclass
class CallHomeOffer:
    """What the radio presents when it dials in."""

    ru_identity: str
    fingerprint: str
    ipv6_address: str
    connect: Callable[["MplaneClient"], int]
    """Callback that, on acceptance, binds the radio's server to the given
    client and returns the server-assigned session id."""


@dataclass
class CallHomeAttempt:
    time_ns: int
    ru_identity: str
    fingerprint: str
    accepted: bool
    reason: str = ""


class CallHomeListener:
    """Accepts or rejects inbound call home offers by fingerprint."""

    def __init__(self, trust_anchor: str, now: Callable[[], int] = lambda: 0) -> None:
        self.trust_anchor = trust_anchor
        self.attempts: list[CallHomeAttempt] = []
        self._now = now
        self.on_accept: Callable[[MplaneClient], None] | None = None

    def receive_call_home(self, offer: CallHomeOffer) -> tuple[bool, str, "MplaneClient | None"]:
        if offer.fingerprint != self.trust_anchor:
            reason = "certificate fingerprint does not match the trust anchor"
            self.attempts.append(
                CallHomeAttempt(self._now(), offer.ru_identity, offer.fingerprint, False, reason)
            )
            log.debug("call home from %s rejected: %s", offer.ru_identity, reason)
            return False, reason, None
        client = MplaneClient(peer_identity=offer.ru_identity)
        session_id = offer.connect(client)
        client.session = MplaneSession(
            peer_identity=offer.ru_identity,
            session_id=session_id,
            state=SessionState.ESTABLISHED,
        )
        self.attempts.append(
            CallHomeAttempt(self._now(), offer.ru_identity, offer.fingerprint, True)
        )
        if self.on_accept:
            self.on_accept(client)
        return True, "", client


class MplaneClient:
    """Manager-role endpoint: builds envelopes, parses replies."""

    def __init__(self, peer_identity: str = "") -> None:
        self.session = MplaneSession(peer_identity=peer_identity)
        self.notifications: list[Notification] = []
        self._request: Callable[[bytes], bytes] | None = None
        self._next_message_id = 1

    def bind(self, request: Callable[[bytes], bytes]) -> None:
        self._request = request

    def deliver_notification(self, data: bytes) -> None:
        self.notifications.append(Notification.from_bytes(data))

    # -- raw plumbing ---------------------------------------------------

    def raw_request(self, envelope: RpcEnvelope) -> RpcReply:
        if self._request is None:
            raise RuntimeError("client has no bound transport; call home has not completed")
        reply = RpcReply.from_bytes(self._request(envelope.to_bytes()))
        if reply.message_id != envelope.message_id:
            raise RpcFault("protocol-error", "reply message_id does not match the request")
        return reply

    def request(self, operation: RpcOperation, body: dict[str, Any] | None = None) -> RpcReply:
        envelope = RpcEnvelope(
            message_id=self._next_message_id, operation=operation, body=body or {}
        )
        self._next_message_id += 1
        return self.raw_request(envelope)

    def _checked(self, operation: RpcOperation, body: dict[str, Any] | None = None) -> RpcReply:
        reply = self.request(operation, body)
        if not reply.ok:
            raise RpcFault(reply.error_tag, reply.error_message)
        return reply

    # -- typed operations -------------------------------------------------

    def get(self, filter_path: str | None = None) -> dict:
        body = {} if filter_path is None else {"filter": filter_path}
        return self._checked(RpcOperation.GET, body).data

    def edit_config(self, changes: dict[str, str]) -> None:
        self._checked(RpcOperation.EDIT_CONFIG, {"changes": changes})

    def subscribe(self, stream: str = "alarms") -> int:
        reply = self._checked(RpcOperation.SUBSCRIBE, {"stream": stream})
        return int(reply.data["subscription_id"])

    def supervision_kick(self, interval_s: float | None = None, guard_s: float | None = None) -> int:
        body: dict[str, Any] = {}
        if interval_s is not None:
            body["interval_s"] = interval_s
        if guard_s is not None:
            body["guard_s"] = guard_s
        reply = self._checked(RpcOperation.SUPERVISION_KICK, body)
        if interval_s is not None:
            self.session.supervision_interval_s = interval_s
        if guard_s is not None:
            self.session.supervision_guard_s = guard_s
        self.session.state = SessionState.SUPERVISED
        return int(reply.data["next_expiry_ns"])

    def sw_download(self, slot: str, build_id: str, image: bytes, checksum: str) -> str:
        reply = self._checked(
            RpcOperation.SW_DOWNLOAD,
            {"slot": slot, "build_id": build_id, "image_hex": image.hex(), "checksum": checksum},
        )
        return str(reply.data["state"])

    def sw_install(self, slot: str) -> None:
        self._checked(RpcOperation.SW_INSTALL, {"slot": slot})

    def sw_activate(self, slot: str) -> None:
        self._checked(RpcOperation.SW_ACTIVATE, {"slot": slot})

    def reset(self) -> None:
        self._checked(RpcOperation.RESET)
        self.session.state = SessionState.CLOSED

    def log_start(self, kind: str) -> int:
        return int(self._checked(RpcOperation.LOG_START, {"kind": kind}).data["log_id"])

    def log_stop(self, log_id: int) -> None:
        self._checked(RpcOperation.LOG_STOP, {"log_id": log_id})

    def log_collect(self, log_id: int) -> dict:
        return self._checked(RpcOperation.LOG_COLLECT, {"log_id": log_id}).data
