"""Per-case execution environments.

Every catalog case runs against a freshly built world: its own simulated
timeline, radio emulator, DHCPv6 service, call home listener, and seeded
RNG streams. Nothing bleeds between cases, so a case replays identically
given the same profile and seed.

The environment also encodes the prerequisite ladder the procedures lean
on. A case whose subject is CU-plane traffic needs a management session, a
locked clock, and an active carrier before its subject is observable at
all; when one of those cannot be met the case is reported BLOCKED rather
than FAIL, keeping "the radio misbehaved" distinct from "the radio was
never reachable".
"""

from __future__ import annotations

import random
import socket

from ofhtest.cuplane.carrier import CarrierConfig
from ofhtest.cuplane.flows import DelayWindow
from ofhtest.emulator.faults import FaultPlan
from ofhtest.emulator.ru import RuEmulator
from ofhtest.mplane.client import CallHomeListener, MplaneClient, RpcFault
from ofhtest.mplane.dhcpv6 import Dhcpv6Server
from ofhtest.mplane.transport import TcpChannel, serve_envelopes, write_frame
from ofhtest.runner.profile import LabProfile
from ofhtest.simtime import SimTimeline
from ofhtest.splane.clock import ServoConfig, SimClock, SyncState
from ofhtest.splane.measurement import SyncRunner
from ofhtest.splane.ptp import PathModel, PtpProfileConfig, lls_c1


class PrerequisiteMissing(Exception):
    """A precondition of the procedure (not its subject) is unavailable."""


class TestEnv:
    """One case's isolated world plus the prerequisite ladder."""

    def __init__(self, profile: LabProfile, case_id: str, tag: str = "") -> None:
        self.profile = profile
        self.case_id = case_id
        self.label = case_id if not tag else f"{case_id}/{tag}"
        self.seed = profile.seed_for(self.label)
        self.rng = random.Random(self.seed)

        self.timeline = SimTimeline()
        self.carrier = CarrierConfig()
        self.windows = DelayWindow()
        self.plan: FaultPlan = profile.plan_for_case(case_id)
        self.ru = RuEmulator(
            self.timeline,
            carrier=self.carrier,
            windows=self.windows,
            plan=self.plan,
            rng=random.Random(profile.seed_for(self.label + "/ru")),
        )
        self.dhcp = Dhcpv6Server()
        self.listener = CallHomeListener(
            trust_anchor=self.ru.fingerprint, now=lambda: self.timeline.now_ns
        )
        self.listener.on_accept = self._adopt_client

        self.client: MplaneClient | None = None
        self.sync: SyncRunner | None = None
        self.master_clock = SimClock()
        self._booted = False
        self._children: list[TestEnv] = []
        self._bridges: list[tuple[TcpChannel, socket.socket]] = []

    # -- bring-up ladder ---------------------------------------------------

    def boot(self) -> MplaneClient | None:
        """Run DHCPv6 and call home once; later calls are no-ops."""
        if not self._booted:
            self._booted = True
            self.ru.boot(self.dhcp, self.listener)
        return self.client

    def require_session(self) -> MplaneClient:
        self.boot()
        if self.client is None or not self.ru.server.session.is_open():
            raise PrerequisiteMissing(
                "management session was never established (call home did not complete)"
            )
        return self.client

    def start_sync(
        self,
        path: PathModel | None = None,
        slave: SimClock | None = None,
        profile_cfg: PtpProfileConfig | None = None,
        servo: ServoConfig | None = None,
    ) -> SyncRunner:
        """Attach a grandmaster/path model and begin timestamp exchanges."""
        self.sync = SyncRunner(
            self.timeline,
            self.master_clock,
            slave or SimClock(phase_offset_ns=500.0),
            path or lls_c1(),
            profile=profile_cfg,
            servo=servo,
            rng=random.Random(self.profile.seed_for(self.label + "/sync")),
            participating=self.ru.sync_participating,
            on_transition=self.ru.on_sync_transition,
        )
        self.ru.start_sync()
        return self.sync

    def require_lock(self, budget_s: float = 30.0) -> SyncRunner:
        if self.sync is None:
            self.start_sync()
        assert self.sync is not None
        if self.ru.sync_state is not SyncState.LOCKED:
            if not self.sync.run_until_locked(budget_s):
                raise PrerequisiteMissing(
                    f"clock never locked within {budget_s} s "
                    f"(state {self.ru.sync_state.value})"
                )
        return self.sync

    def require_traffic_ready(self) -> MplaneClient:
        """Session up, clock locked, carrier active: the CU-plane gate."""
        client = self.require_session()
        self.require_lock()
        if self.ru.active_carrier_count() == 0:
            try:
                client.edit_config({"carriers/c1/active": "true"})
            except RpcFault as exc:
                raise PrerequisiteMissing(f"carrier activation refused: {exc}") from exc
        if not self.ru.is_radiating_capable():
            raise PrerequisiteMissing("radio did not reach the radiating state")
        return client

    # -- sub-environments and teardown --------------------------------------

    def fresh(self, tag: str) -> "TestEnv":
        """A sibling world for a sub-run (e.g. one per sync topology)."""
        child = TestEnv(self.profile, self.case_id, tag=tag)
        self._children.append(child)
        return child

    def close(self) -> None:
        for child in self._children:
            child.close()
        for channel, radio_sock in self._bridges:
            channel.close()
            try:
                radio_sock.close()
            except OSError:
                pass
        self._bridges.clear()

    # -- transport adoption ---------------------------------------------------

    def _adopt_client(self, client: MplaneClient) -> None:
        """Listener hook: runs for the initial session and any re-dial."""
        self.client = client
        if self.profile.transport == "tcp":
            self._bridge_over_tcp(client)

    def _bridge_over_tcp(self, client: MplaneClient) -> None:
        """Re-home the established session onto a framed socket stream."""
        manager_sock, radio_sock = socket.socketpair()
        server_thread = serve_envelopes(radio_sock, self.ru.server.dispatch_bytes)
        channel = TcpChannel(manager_sock, on_notification=client.deliver_notification)
        client.bind(channel.request)
        push_lock = server_thread.push_lock  # type: ignore[attr-defined]

        def push(data: bytes) -> None:
            with push_lock:
                write_frame(radio_sock, data)

        self.ru.server.set_notify_sink(push)
        self._bridges.append((channel, radio_sock))
