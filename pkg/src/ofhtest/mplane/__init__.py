"""Management-plane engine: NETCONF-style sessions between tester and RU.

Implements the bring-up chain a radio walks before any IQ flows: DHCPv6
address assignment, call home toward the management client (RFC 8071
style), certificate-fingerprint authentication, datastore reads and atomic
configuration edits, notification subscriptions, supervision watchdog,
software management, hierarchical forwarding, and diagnostic log sessions.
Envelopes are JSON documents framed either over an in-memory channel
(default, simulated time) or a length-prefixed TCP stream.
"""

from ofhtest.mplane.types import (
    MplaneSession,
    RpcEnvelope,
    RpcFault,
    RpcOperation,
    RpcReply,
    SessionState,
    Severity,
)
from ofhtest.mplane.datastore import Datastore, EditError
from ofhtest.mplane.dhcpv6 import (
    Dhcpv6Error,
    Dhcpv6Message,
    Dhcpv6MessageType,
    Dhcpv6Server,
    Lease,
    run_dhcpv6_exchange,
)
from ofhtest.mplane.software import SlotState, SoftwareInventory, SoftwareSlot
from ofhtest.mplane.server import Alarm, MplaneServer, ServerHooks
from ofhtest.mplane.client import CallHomeListener, CallHomeOffer, MplaneClient
from ofhtest.mplane.hierarchy import HierarchicalGateway
from ofhtest.mplane.transport import (
    InMemoryChannel,
    TcpChannel,
    read_frame,
    write_frame,
)

__all__ = [
    "MplaneSession",
    "RpcEnvelope",
    "RpcFault",
    "RpcOperation",
    "RpcReply",
    "SessionState",
    "Severity",
    "Datastore",
    "EditError",
    "Dhcpv6Error",
    "Dhcpv6Message",
    "Dhcpv6MessageType",
    "Dhcpv6Server",
    "Lease",
    "run_dhcpv6_exchange",
    "SlotState",
    "SoftwareInventory",
    "SoftwareSlot",
    "Alarm",
    "MplaneServer",
    "ServerHooks",
    "CallHomeListener",
    "CallHomeOffer",
    "MplaneClient",
    "HierarchicalGateway",
    "InMemoryChannel",
    "TcpChannel",
    "read_frame",
    "write_frame",
]
