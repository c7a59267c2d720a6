"""Session model and RPC envelope documents.

Envelopes travel as JSON so evidence logs stay directly inspectable. Every
request gets exactly one reply carrying the same message id; server-side
failures are expressed in-band as rpc-error replies, never as silence.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Any


class SessionState(enum.Enum):
    IDLE = "IDLE"
    ADDRESS_ASSIGNED = "ADDRESS_ASSIGNED"
    CALL_HOME_SENT = "CALL_HOME_SENT"
    AUTHENTICATING = "AUTHENTICATING"
    ESTABLISHED = "ESTABLISHED"
    SUPERVISED = "SUPERVISED"
    CLOSED = "CLOSED"


class RpcOperation(enum.Enum):
    GET = "GET"
    EDIT_CONFIG = "EDIT_CONFIG"
    SUBSCRIBE = "SUBSCRIBE"
    SUPERVISION_KICK = "SUPERVISION_KICK"
    SW_DOWNLOAD = "SW_DOWNLOAD"
    SW_INSTALL = "SW_INSTALL"
    SW_ACTIVATE = "SW_ACTIVATE"
    RESET = "RESET"
    LOG_START = "LOG_START"
    LOG_STOP = "LOG_STOP"
    LOG_COLLECT = "LOG_COLLECT"


class Severity(enum.Enum):
    WARNING = "WARNING"
    MINOR = "MINOR"
    MAJOR = "MAJOR"
    CRITICAL = "CRITICAL"


@dataclass
class MplaneSession:
    """State either peer keeps about the management association."""

    peer_identity: str = ""
    session_id: int = 0
    state: SessionState = SessionState.IDLE
    supervision_interval_s: float = 0.0
    supervision_guard_s: float = 0.0
    last_kick_ns: int | None = None

    def is_open(self) -> bool:
        return self.state in (SessionState.ESTABLISHED, SessionState.SUPERVISED)


@dataclass
class RpcEnvelope:
    message_id: int
    operation: RpcOperation
    body: dict[str, Any] = field(default_factory=dict)

    def to_bytes(self) -> bytes:
        doc = {"message_id": self.message_id, "operation": self.operation.value, "body": self.body}
        return json.dumps(doc, sort_keys=True).encode()

    @classmethod
    def from_bytes(cls, data: bytes) -> "RpcEnvelope":
        doc = json.loads(data.decode())
        return cls(
            message_id=int(doc["message_id"]),
            operation=RpcOperation(doc["operation"]),
            body=dict(doc.get("body", {})),
        )


@dataclass
class RpcReply:
    message_id: int
    ok: bool
    data: Any = None
    error_tag: str | None = None
    error_message: str | None = None
    severity: Severity | None = None

    def to_bytes(self) -> bytes:
        doc: dict[str, Any] = {"message_id": self.message_id}
        if self.ok:
            doc["reply"] = "ok" if self.data is None else "data"
            if self.data is not None:
                doc["data"] = self.data
        else:
            doc["reply"] = "rpc-error"
            doc["error"] = {
                "tag": self.error_tag,
                "severity": (self.severity or Severity.MAJOR).value,
                "message": self.error_message,
            }
        return json.dumps(doc, sort_keys=True).encode()

    @classmethod
    def from_bytes(cls, data: bytes) -> "RpcReply":
        doc = json.loads(data.decode())
        if doc.get("reply") == "rpc-error":
            err = doc.get("error", {})
            return cls(
                message_id=int(doc["message_id"]),
                ok=False,
                error_tag=err.get("tag"),
                error_message=err.get("message"),
                severity=Severity(err["severity"]) if "severity" in err else None,
            )
        return cls(message_id=int(doc["message_id"]), ok=True, data=doc.get("data"))


@dataclass
class Notification:
    """Server-initiated event document pushed to subscribers."""

    subscription_id: int
    stream: str
    event: dict[str, Any]
    sequence: int

    def to_bytes(self) -> bytes:
        return json.dumps(
            {
                "notification": {
                    "subscription_id": self.subscription_id,
                    "stream": self.stream,
                    "sequence": self.sequence,
                    "event": self.event,
                }
            },
            sort_keys=True,
        ).encode()

    @classmethod
    def from_bytes(cls, data: bytes) -> "Notification":
        doc = json.loads(data.decode())["notification"]
        return cls(
            subscription_id=int(doc["subscription_id"]),
            stream=doc["stream"],
            event=dict(doc["event"]),
            sequence=int(doc["sequence"]),
        )


class RpcFault(Exception):
    """Raised client-side when a reply is an rpc-error."""

    def __init__(self, tag: str | None, message: str | None) -> None:
        super().__init__(f"{tag}: {message}")
        self.tag = tag
        self.message = message or ""
