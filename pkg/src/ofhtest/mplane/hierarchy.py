"""Hierarchical management forwarding.

In a hierarchical deployment the direct manager of the radio sits in the
middle; an upstream system reaches the radio only through it. The gateway
forwards envelopes verbatim for privileged outer sessions and refuses with
access-denied otherwise, never touching the inner datastore on refusal.
"""

from __future__ import annotations

from dataclasses import dataclass

from ofhtest.mplane.client import MplaneClient
from ofhtest.mplane.types import RpcEnvelope, RpcReply, Severity


@dataclass
class OuterSession:
    identity: str
    privileged: bool


class HierarchicalGateway:
    def __init__(self, inner: MplaneClient) -> None:
        self.inner = inner
        self.forwarded: int = 0
        self.refused: int = 0

    def forward(self, outer: OuterSession, envelope: RpcEnvelope) -> RpcReply:
        """Pass the inner request through unchanged, or refuse it."""
        if not outer.privileged:
            self.refused += 1
            return RpcReply(
                message_id=envelope.message_id,
                ok=False,
                error_tag="access-denied",
                error_message=f"outer session {outer.identity} lacks forwarding privilege",
                severity=Severity.MAJOR,
            )
        self.forwarded += 1
        return self.inner.raw_request(envelope)
