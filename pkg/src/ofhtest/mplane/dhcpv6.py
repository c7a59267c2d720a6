"""Four-message DHCPv6 exchange (solicit, advertise, request, reply).

The radio under test is IPv6-only: before it can call home it needs an
address and the management client's endpoint, both of which arrive here.
This is a deliberately small model of DHCPv6 - one address pool, leases
keyed by client DUID, strict message ordering - because the conformance
cases exercise the handshake shape, not retransmission behavior.
"""

from __future__ import annotations

import enum
import ipaddress
import random
from dataclasses import dataclass


class Dhcpv6Error(Exception):
    pass


class Dhcpv6MessageType(enum.IntEnum):
    # values as in RFC 8415
    SOLICIT = 1
    ADVERTISE = 2
    REQUEST = 3
    REPLY = 7


@dataclass(frozen=True)
class Dhcpv6Message:
    msg_type: Dhcpv6MessageType
    transaction_id: int
    duid: str
    address: str | None = None
    call_home_client: tuple[str, int] | None = None


@dataclass(frozen=True)
class Lease:
    ipv6_address: str
    call_home_client: tuple[str, int]


class Dhcpv6Server:
    """Address pool plus per-client exchange state."""

    def __init__(
        self,
        pool_base: str = "fd00::10",
        pool_size: int = 64,
        call_home_client: tuple[str, int] = ("fd00::1", 4334),
    ) -> None:
        self._base = ipaddress.IPv6Address(pool_base)
        self._pool_size = pool_size
        self.call_home_client = call_home_client
        self._leases: dict[str, str] = {}
        self._advertised: dict[str, str] = {}

    def handle(self, msg: Dhcpv6Message) -> Dhcpv6Message:
        if msg.msg_type == Dhcpv6MessageType.SOLICIT:
            address = self._address_for(msg.duid)
            self._advertised[msg.duid] = address
            return Dhcpv6Message(
                msg_type=Dhcpv6MessageType.ADVERTISE,
                transaction_id=msg.transaction_id,
                duid=msg.duid,
                address=address,
                call_home_client=self.call_home_client,
            )
        if msg.msg_type == Dhcpv6MessageType.REQUEST:
            advertised = self._advertised.get(msg.duid)
            if advertised is None:
                raise Dhcpv6Error(f"request from {msg.duid} without a preceding solicit")
            if msg.address != advertised:
                raise Dhcpv6Error(
                    f"request for {msg.address} does not match advertised {advertised}"
                )
            del self._advertised[msg.duid]
            self._leases[msg.duid] = advertised
            return Dhcpv6Message(
                msg_type=Dhcpv6MessageType.REPLY,
                transaction_id=msg.transaction_id,
                duid=msg.duid,
                address=advertised,
                call_home_client=self.call_home_client,
            )
        raise Dhcpv6Error(f"server cannot handle message type {msg.msg_type.name}")

    def lease_for(self, duid: str) -> str | None:
        return self._leases.get(duid)

    def _address_for(self, duid: str) -> str:
        existing = self._leases.get(duid) or self._advertised.get(duid)
        if existing:
            return existing
        index = len(self._leases) + len(self._advertised)
        if index >= self._pool_size:
            raise Dhcpv6Error("address pool exhausted")
        return str(self._base + index)


def run_dhcpv6_exchange(
    server: Dhcpv6Server, duid: str, rng: random.Random | None = None
) -> tuple[Lease, list[Dhcpv6Message]]:
    """Drive the client side of the exchange; returns the lease and the
    four messages in order for evidence logging."""
    rng = rng or random.Random(0)
    txn = rng.randrange(1 << 24)
    solicit = Dhcpv6Message(Dhcpv6MessageType.SOLICIT, txn, duid)
    advertise = server.handle(solicit)
    if advertise.msg_type != Dhcpv6MessageType.ADVERTISE or advertise.address is None:
        raise Dhcpv6Error("expected an advertise carrying an address")
    request = Dhcpv6Message(Dhcpv6MessageType.REQUEST, txn, duid, address=advertise.address)
    reply = server.handle(request)
    if reply.msg_type != Dhcpv6MessageType.REPLY or reply.call_home_client is None:
        raise Dhcpv6Error("expected a reply carrying the call home endpoint")
    # the assigned address must be a well-formed IPv6 literal
    ipaddress.IPv6Address(reply.address)
    lease = Lease(ipv6_address=reply.address or "", call_home_client=reply.call_home_client)
    return lease, [solicit, advertise, request, reply]
