"""Reference radio emulator: bring-up state machine and plane processing.

The emulator plays the role of the device on the far side of the fronthaul.
It boots through DHCPv6 and NETCONF call home, serves a management datastore
over the in-memory transport, tracks its clock discipline state, and only
radiates when every gate on that path is open: management session up,
carrier activated, activation itself guarded by sync lock. Control and
user-plane frames are window-checked against arrival time before any
processing, and everything the radio does lands in evidence logs the test
procedures read back.

Fault injection goes through a :class:`~ofhtest.emulator.faults.FaultPlan`
rather than special-cased code paths; the nominal logic never branches on
which test is running.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field

import numpy as np

from ofhtest.codec import (
    BEAM_WEIGHT_SCALE,
    EcpriHeader,
    EcpriMessageType,
    SectionType,
    UplaneMessage,
    UplaneSection,
    blocks_from_arrays,
    bfp_decompress,
    compress_array,
    decode_cplane,
    decode_ecpri,
    decode_uplane,
    encode_ecpri,
    encode_uplane,
)
from ofhtest.codec.eaxc import EaxcId, pack_eaxc
from ofhtest.cuplane.analyzer import classify_arrival
from ofhtest.cuplane.beams import BeamTable, make_steering_table
from ofhtest.cuplane.carrier import (
    NS_PER_SUBFRAME,
    RES_PER_PRB,
    SUBFRAMES_PER_FRAME,
    CarrierConfig,
)
from ofhtest.cuplane.flows import DelayWindow, SeqCounter, TimedFrame
from ofhtest.emulator.faults import AlarmSpec, FaultPlan
from ofhtest.emulator.rf import SignalGenerator, VirtualRf
from ofhtest.mplane.client import CallHomeListener, CallHomeOffer, MplaneClient
from ofhtest.mplane.datastore import Datastore
from ofhtest.mplane.dhcpv6 import Dhcpv6Server, Lease, run_dhcpv6_exchange
from ofhtest.mplane.server import MplaneServer, ServerHooks
from ofhtest.mplane.transport import InMemoryChannel
from ofhtest.mplane.types import Severity
from ofhtest.simtime import SimTimeline
from ofhtest.splane.clock import SyncState

COUNTER_NAMES = (
    "received",
    "dropped_early",
    "dropped_late",
    "not_ready",
    "unknown_beam",
    "unscheduled",
)

TX_POWER_MIN_DBM = -20.0
TX_POWER_MAX_DBM = 40.0


class RuPhase(enum.Enum):
    """Bring-up ladder. Within one epoch the radio only climbs."""

    BOOT = "BOOT"
    DHCP = "DHCP"
    CALL_HOME = "CALL_HOME"
    MPLANE_UP = "MPLANE_UP"
    SYNCING = "SYNCING"
    CONFIGURED = "CONFIGURED"
    CARRIERS_ACTIVE = "CARRIERS_ACTIVE"


_PHASE_ORDER = {phase: i for i, phase in enumerate(RuPhase)}


@dataclass(frozen=True)
class RuEvent:
    """One externally meaningful thing the radio did.

    ``visible`` marks events observable without a management session
    (transport activity and RF emissions); everything else can only be
    learned by asking the radio over NETCONF.
    """

    time_ns: int
    kind: str
    visible: bool
    detail: str


@dataclass(frozen=True)
class GatePoint:
    """Snapshot of the radiation gate at an interesting instant."""

    time_ns: int
    event: str
    sync_state: SyncState
    active_carriers: int
    radiating: bool


@dataclass
class _DlGrant:
    start_symbol: int
    num_symbol: int
    start_prb: int
    num_prb: int
    beam_id: int
    beam_weights: tuple[complex, ...] | None


def _corrupt_fingerprint(fingerprint: str) -> str:
    # flip the first hex digit so the certificate no longer matches
    head = fingerprint[0]
    flipped = "0" if head != "0" else "f"
    return flipped + fingerprint[1:]


def _initial_tree(identity: str, carrier: CarrierConfig) -> dict:
    return {
        "identity": {
            "ru_id": identity,
            "vendor": "ofhtest",
            "model": "ru-sim-1",
        },
        "sync": {"state": SyncState.FREERUN.value, "domain": "24"},
        "supervision": {"state": "inactive"},
        "radio": {
            "band": carrier.band,
            "n_prb": str(carrier.n_prb),
            "scs_khz": str(carrier.scs_khz),
            "tdd_pattern": carrier.tdd_pattern,
            "tx_power_dbm": "24.0",
        },
        "carriers": {
            "c1": {
                "active": "false",
                "tx_power_dbm": "24.0",
                "center_mhz": "3750.0",
            },
        },
    }


class RuEmulator:
    """The radio side of the harness: one device, one life, many gates."""

    def __init__(
        self,
        timeline: SimTimeline,
        carrier: CarrierConfig | None = None,
        beam_table: BeamTable | None = None,
        windows: DelayWindow | None = None,
        plan: FaultPlan | None = None,
        identity: str = "ru-sim-0001",
        fingerprint: str = "3c:9a:77:10:de:ad:be:ef",
        call_home_retry_s: float = 5.0,
        call_home_budget: int = 3,
        rng: random.Random | None = None,
    ) -> None:
        self.timeline = timeline
        self.carrier = carrier or CarrierConfig()
        self.beam_table = beam_table or make_steering_table()
        self.windows = windows or DelayWindow()
        self.plan = plan or FaultPlan()
        self.identity = identity
        self.fingerprint = fingerprint
        self.call_home_retry_s = call_home_retry_s
        self.call_home_budget = call_home_budget
        self._rng = rng or random.Random(0x0FA7)

        self.datastore = Datastore(_initial_tree(identity, self.carrier))
        self.server = MplaneServer(
            timeline,
            self.datastore,
            identity=identity,
            hooks=ServerHooks(
                on_supervision_expired=self._on_supervision_expired,
                on_reset=self._on_reset,
                on_config_changed=self._on_config_changed,
                fault_active=self.plan.active,
            ),
        )
        self.server.validators.append(self._validate_activation)
        self.server.validators.append(self._validate_tx_power)

        self.rf = VirtualRf(self.carrier)
        self.receive_path = SignalGenerator(self.carrier)
        self.uplink_out: list[TimedFrame] = []
        self._ul_seq = SeqCounter()

        self.sync_state = SyncState.FREERUN
        self.phase = RuPhase.BOOT
        self.epoch = 0
        self.phase_history: list[tuple[int, int, RuPhase]] = [(timeline.now_ns, 0, RuPhase.BOOT)]
        self.events: list[RuEvent] = []
        self.gate_log: list[GatePoint] = []
        self.counters: dict[str, int] = {name: 0 for name in COUNTER_NAMES}
        self._mirror_counters()

        self.lease: Lease | None = None
        self.dhcp_messages: list = []
        self.mgmt_frames: list[tuple[int, int, bytes]] = []  # (direction, time, frame)
        self._dl_schedule: dict[int, list[_DlGrant]] = {}
        self._dhcp_server: Dhcpv6Server | None = None
        self._listener: CallHomeListener | None = None
        self._redial_pending = False

    # -- bring-up ----------------------------------------------------------

    def boot(
        self, dhcp_server: Dhcpv6Server | None, listener: CallHomeListener
    ) -> MplaneClient | None:
        """Acquire an address and dial home. Returns the manager-side client
        on first-attempt success; on rejection, retries keep running on the
        timeline and the result is visible in the listener's attempt log."""
        self._dhcp_server = dhcp_server
        self._listener = listener
        self._enter_phase(RuPhase.DHCP)
        if dhcp_server is None:
            self._event("dhcp", True, "no DHCPv6 service reachable, stalling")
            return None
        lease, messages = run_dhcpv6_exchange(dhcp_server, duid=self.identity, rng=self._rng)
        self.lease = lease
        self.dhcp_messages = list(messages)
        self._event("dhcp", True, f"leased {lease.ipv6_address}")
        self._enter_phase(RuPhase.CALL_HOME)
        return self._dial_home(self.call_home_budget)

    def redial(self) -> MplaneClient | None:
        """One fresh call home attempt (manual recovery path)."""
        return self._dial_home(1)

    def _dial_home(self, budget: int) -> MplaneClient | None:
        if self._listener is None or self.lease is None:
            raise RuntimeError("cannot dial before boot() provided a listener and lease")
        fingerprint = self.fingerprint
        if self.plan.active("drop_callhome_auth"):
            fingerprint = _corrupt_fingerprint(fingerprint)
        offer = CallHomeOffer(
            ru_identity=self.identity,
            fingerprint=fingerprint,
            ipv6_address=self.lease.ipv6_address,
            connect=self._connect,
        )
        self._event("call_home", True, f"dialing from {self.lease.ipv6_address}")
        accepted, reason, client = self._listener.receive_call_home(offer)
        if accepted:
            self._enter_phase(RuPhase.MPLANE_UP)
            self._event("call_home", True, "accepted")
            return client
        self._event("call_home", True, f"rejected: {reason}")
        if budget > 1:
            self.timeline.schedule_in(
                int(self.call_home_retry_s * 1e9), lambda: self._dial_home(budget - 1)
            )
        return None

    def _connect(self, client: MplaneClient) -> int:
        channel = InMemoryChannel(self.server.dispatch_bytes, tap=self._tap_mgmt)
        client.bind(channel.request)
        return self.server.establish_session("ter", client.deliver_notification)

    def _tap_mgmt(self, direction: int, frame: bytes) -> None:
        self.mgmt_frames.append((direction, self.timeline.now_ns, frame))

    # -- timing plane ------------------------------------------------------

    def start_sync(self) -> None:
        """Begin participating in timestamp exchanges."""
        self._enter_phase(RuPhase.SYNCING)
        self._event("sync", False, "timing participation started")

    def sync_participating(self) -> bool:
        """Gate handed to the exchange driver as its participation check."""
        if self.plan.active("disable_sync"):
            return False
        return _PHASE_ORDER[self.phase] >= _PHASE_ORDER[RuPhase.SYNCING]

    def on_sync_transition(self, state: SyncState) -> None:
        previous = self.sync_state
        self.sync_state = state
        self.datastore.force_set("sync/state", state.value)
        self._event("sync_transition", False, state.value)
        if previous is SyncState.LOCKED and state is not SyncState.LOCKED:
            self.deactivate_carriers(f"sync degraded to {state.value}")
        self._gate_point(f"sync_{state.value.lower()}")

    def reported_sync_state(self) -> str:
        """What the management plane says about the clock, for procedures
        that must cross-check the servo against the datastore."""
        return self.datastore.leaf("sync/state")

    # -- management hooks ---------------------------------------------------

    def _validate_activation(self, path: str, value: str, tree: dict) -> str | None:
        if path.startswith("carriers/") and path.endswith("/active") and value == "true":
            if self.sync_state is not SyncState.LOCKED:
                return (
                    f"carrier activation requires sync LOCKED, clock is {self.sync_state.value}"
                )
        return None

    def _validate_tx_power(self, path: str, value: str, tree: dict) -> str | None:
        if path.split("/")[-1] != "tx_power_dbm":
            return None
        try:
            dbm = float(value)
        except ValueError:
            return "tx power must be a number in dBm"
        if not TX_POWER_MIN_DBM <= dbm <= TX_POWER_MAX_DBM:
            return (
                f"tx power {dbm} dBm outside supported range "
                f"[{TX_POWER_MIN_DBM}, {TX_POWER_MAX_DBM}]"
            )
        return None

    def _on_config_changed(self, changes: dict[str, str]) -> None:
        self._event("config", False, ", ".join(f"{p}={v}" for p, v in sorted(changes.items())))
        touched_activation = any(
            path.startswith("carriers/") and path.endswith("/active") for path in changes
        )
        if self.active_carrier_count() > 0:
            self._enter_phase(RuPhase.CARRIERS_ACTIVE)
        elif _PHASE_ORDER[self.phase] >= _PHASE_ORDER[RuPhase.MPLANE_UP]:
            self._enter_phase(RuPhase.CONFIGURED)
        if touched_activation:
            self._gate_point("carrier_config")

    def _on_supervision_expired(self) -> None:
        self.deactivate_carriers("supervision lost")
        self._event("supervision_expired", False, "watchdog fired, session closing")
        self._bump_epoch(RuPhase.CALL_HOME)

    def _on_reset(self) -> None:
        slot = self.server.software.apply_reset()
        self.server.refresh_software_mirror()
        self.server.close_session("reset")
        self.deactivate_carriers("reset")
        self.sync_state = SyncState.FREERUN
        self.datastore.force_set("sync/state", SyncState.FREERUN.value)
        self._reset_counters()
        self._bump_epoch(RuPhase.BOOT)
        self._event("reset", False, f"rebooted into slot {slot.name} ({slot.build_id})")
        if self._dhcp_server is not None and self._listener is not None:
            self._enter_phase(RuPhase.DHCP)
            lease, messages = run_dhcpv6_exchange(
                self._dhcp_server, duid=self.identity, rng=self._rng
            )
            self.lease = lease
            self.dhcp_messages = list(messages)
            self._event("dhcp", True, f"leased {lease.ipv6_address}")
            self._enter_phase(RuPhase.CALL_HOME)
            self._dial_home(self.call_home_budget)

    def trigger_alarm(self, spec: AlarmSpec | None = None) -> None:
        """Raise the operator-visible alarm a procedure asked for."""
        spec = spec or self.plan.raise_alarm or AlarmSpec()
        self.server.raise_alarm(
            spec.fault_id, spec.source, Severity(spec.severity), spec.text
        )
        self._event("alarm", False, f"fault {spec.fault_id} raised")

    def clear_alarm(self, spec: AlarmSpec | None = None) -> None:
        spec = spec or self.plan.raise_alarm or AlarmSpec()
        self.server.clear_alarm(spec.fault_id, spec.source)
        self._event("alarm", False, f"fault {spec.fault_id} cleared")

    # -- carrier state -------------------------------------------------------

    def active_carrier_count(self) -> int:
        carriers = self.datastore.snapshot().get("carriers", {})
        return sum(
            1
            for cfg in carriers.values()
            if isinstance(cfg, dict) and cfg.get("active") == "true"
        )

    def deactivate_carriers(self, reason: str) -> None:
        """Autonomous shutdown of every active carrier (not a manager edit)."""
        carriers = self.datastore.snapshot().get("carriers", {})
        changed = False
        for name, cfg in carriers.items():
            if isinstance(cfg, dict) and cfg.get("active") == "true":
                self.datastore.force_set(f"carriers/{name}/active", "false")
                changed = True
        if changed:
            self._event("carrier_shutdown", False, reason)
            self._gate_point(f"carrier_shutdown: {reason}")

    def is_radiating_capable(self) -> bool:
        return self.phase is RuPhase.CARRIERS_ACTIVE and self.active_carrier_count() > 0

    # -- CU-plane receive path -------------------------------------------------

    def receive_frame(self, frame: bytes, arrival_ns: int | None = None) -> None:
        """Process one fronthaul frame as it lands on the transport."""
        arrival = self.timeline.now_ns if arrival_ns is None else arrival_ns
        header, payload = decode_ecpri(frame)
        if not self.is_radiating_capable():
            self.counters["not_ready"] += 1
            self._mirror_counters()
            return
        if header.message_type is EcpriMessageType.RT_CONTROL:
            self._handle_cplane(arrival, header, payload)
        elif header.message_type is EcpriMessageType.IQ_DATA:
            self._handle_uplane(arrival, payload)

    def _locate_slot(self, arrival: int, frame_id: int, subframe: int, slot: int) -> tuple[int, int]:
        """(slot_t0, slot_index) for a wire address near the arrival instant.

        The wire carries only 8 bits of frame number; the radio's own clock
        disambiguates by picking the absolute frame that puts the addressed
        slot closest to the moment the frame landed.
        """
        base = self.carrier.slot_start_ns(frame_id, subframe, slot)
        period_ns = 256 * SUBFRAMES_PER_FRAME * NS_PER_SUBFRAME
        wraps = round((arrival - base) / period_ns)
        slot_t0 = base + wraps * period_ns
        index = self.carrier.slot_index(frame_id + 256 * wraps, subframe, slot)
        return slot_t0, index

    def _handle_cplane(self, arrival: int, header: EcpriHeader, payload: bytes) -> None:
        msg = decode_cplane(payload, ru_ports=self.carrier.ru_ports)
        slot_t0, slot_index = self._locate_slot(
            arrival, msg.frame_id, msg.subframe_id, msg.slot_id
        )
        ref_time = slot_t0 + self.carrier.symbol_offset_ns(msg.start_symbol_id)
        verdict = classify_arrival(self.windows, "C", arrival, ref_time)
        if verdict != "ok":
            self.counters[f"dropped_{verdict}"] += 1
            self._mirror_counters()
            return
        self.counters["received"] += 1
        self._mirror_counters()
        kind = self.carrier.slot_kind(msg.frame_id, msg.subframe_id, msg.slot_id)
        if msg.section_type is SectionType.ST3 and msg.st3 is not None:
            occasion_start = slot_t0 + msg.st3.time_offset * 1000
            for section in msg.sections:
                self._schedule_prach_capture(msg, section, slot_index, occasion_start, header.eaxc)
        elif kind == "D":
            grants = self._dl_schedule.setdefault(slot_index, [])
            for section in msg.sections:
                grants.append(
                    _DlGrant(
                        start_symbol=msg.start_symbol_id,
                        num_symbol=section.num_symbol,
                        start_prb=section.start_prb,
                        num_prb=section.num_prb or self.carrier.n_prb,
                        beam_id=section.beam_id,
                        beam_weights=section.beam_weights,
                    )
                )
        else:
            for section in msg.sections:
                for offset in range(section.num_symbol):
                    symbol = msg.start_symbol_id + offset
                    capture_time = slot_t0 + self.carrier.symbol_offset_ns(symbol)
                    self._schedule_ul_capture(msg, section, slot_index, symbol, capture_time, header.eaxc)

    def _schedule_ul_capture(self, msg, section, slot_index, symbol, capture_time, eaxc) -> None:
        def capture() -> None:
            if not self.is_radiating_capable():
                return
            n_prb = section.num_prb or self.carrier.n_prb
            re_start = section.start_prb * RES_PER_PRB
            samples = self.receive_path.sample_ul(
                slot_index, symbol, re_start, n_prb * RES_PER_PRB
            )
            self._emit_uplink(msg, section.section_id, section.start_prb, n_prb,
                              symbol, samples, capture_time, eaxc)

        self.timeline.schedule_at(max(capture_time, self.timeline.now_ns), capture)

    def _schedule_prach_capture(self, msg, section, slot_index, occasion_start, eaxc) -> None:
        def capture() -> None:
            if not self.is_radiating_capable():
                return
            n_prb = section.num_prb or self.carrier.n_prb
            waveform, mistimed = self.receive_path.sample_prach(slot_index, occasion_start)
            samples = np.zeros(n_prb * RES_PER_PRB, dtype=np.complex128)
            if waveform is not None:
                samples[: waveform.size] = waveform
            elif mistimed:
                self.counters["dropped_late"] += 1
                self._mirror_counters()
            self._emit_uplink(msg, section.section_id, section.start_prb, n_prb,
                              0, samples, occasion_start, eaxc)

        self.timeline.schedule_at(max(occasion_start, self.timeline.now_ns), capture)

    def _emit_uplink(self, cmsg, section_id, start_prb, n_prb, symbol, samples,
                     emit_time, eaxc: EaxcId) -> None:
        quantized = np.round(samples.real) + 1j * np.round(samples.imag)
        exponents, mantissas = compress_array(quantized.reshape(n_prb, RES_PER_PRB))
        umsg = UplaneMessage(
            frame_id=cmsg.frame_id,
            subframe_id=cmsg.subframe_id,
            slot_id=cmsg.slot_id,
            symbol_id=symbol,
            sections=[
                UplaneSection(
                    section_id=section_id,
                    start_prb=start_prb,
                    num_prb=n_prb,
                    prbs=blocks_from_arrays(exponents, mantissas),
                )
            ],
        )
        header = EcpriHeader(
            message_type=EcpriMessageType.IQ_DATA,
            eaxc=eaxc,
            sequence_id=self._ul_seq.take(pack_eaxc(eaxc)),
        )
        self.uplink_out.append(
            TimedFrame(
                time_ns=emit_time,
                frame=encode_ecpri(header, encode_uplane(umsg)),
                plane="U",
                eaxc=pack_eaxc(eaxc),
            )
        )
        self._event("emission", True, f"uplink symbol {symbol}")
        self._gate_point("uplink_emission")

    def _handle_uplane(self, arrival: int, payload: bytes) -> None:
        msg = decode_uplane(payload, all_prb_count=self.carrier.n_prb)
        slot_t0, slot_index = self._locate_slot(
            arrival, msg.frame_id, msg.subframe_id, msg.slot_id
        )
        symbol_time = slot_t0 + self.carrier.symbol_offset_ns(msg.symbol_id)
        verdict = classify_arrival(self.windows, "U", arrival, symbol_time)
        if verdict != "ok":
            self.counters[f"dropped_{verdict}"] += 1
            self._mirror_counters()
            return
        grants = self._dl_schedule.get(slot_index, [])
        all_matched = True
        for section in msg.sections:
            grant = self._find_grant(grants, msg.symbol_id, section)
            if grant is None:
                all_matched = False
                self.counters["unscheduled"] += 1
                continue
            self._radiate(slot_index, msg.symbol_id, section, grant)
        if all_matched:
            self.counters["received"] += 1
        self._mirror_counters()

    def _find_grant(self, grants: list[_DlGrant], symbol: int, section) -> _DlGrant | None:
        section_prbs = section.num_prb or self.carrier.n_prb
        for grant in grants:
            if not grant.start_symbol <= symbol < grant.start_symbol + grant.num_symbol:
                continue
            if grant.start_prb == section.start_prb and grant.num_prb == section_prbs:
                return grant
        return None

    def _radiate(self, slot_index: int, symbol: int, section, grant: _DlGrant) -> None:
        weights = self._resolve_beam(grant)
        if weights is None:
            self.counters["unknown_beam"] += 1
            return
        pairs: list[complex] = []
        for block in section.prbs:
            pairs.extend(i + 1j * q for i, q in bfp_decompress(block))
        samples = np.asarray(pairs, dtype=np.complex128)
        self.rf.add_emission(
            slot_index, symbol, section.start_prb * RES_PER_PRB, samples, weights
        )
        self._event("emission", True, f"downlink slot {slot_index} symbol {symbol}")
        self._gate_point("downlink_emission")

    def _resolve_beam(self, grant: _DlGrant) -> np.ndarray | None:
        if grant.beam_weights is not None:
            # inline weights arrive in the wire fixed-point scale
            raw = np.asarray(grant.beam_weights, dtype=np.complex128)
            return raw / BEAM_WEIGHT_SCALE
        if grant.beam_id == 0:
            # no beamforming requested: pass through on the first port
            weights = np.zeros(self.carrier.ru_ports, dtype=np.complex128)
            weights[0] = 1.0
            return weights
        entry = self.beam_table.get(grant.beam_id)
        if entry is None:
            return None
        return np.asarray(entry.weights, dtype=np.complex128)

    # -- bookkeeping -----------------------------------------------------------

    def _enter_phase(self, phase: RuPhase) -> None:
        if _PHASE_ORDER[phase] <= _PHASE_ORDER[self.phase]:
            return
        self.phase = phase
        self.phase_history.append((self.timeline.now_ns, self.epoch, phase))

    def _bump_epoch(self, phase: RuPhase) -> None:
        self.epoch += 1
        self.phase = phase
        self.phase_history.append((self.timeline.now_ns, self.epoch, phase))

    def _event(self, kind: str, visible: bool, detail: str) -> None:
        self.events.append(RuEvent(self.timeline.now_ns, kind, visible, detail))

    def _gate_point(self, event: str) -> None:
        self.gate_log.append(
            GatePoint(
                time_ns=self.timeline.now_ns,
                event=event,
                sync_state=self.sync_state,
                active_carriers=self.active_carrier_count(),
                radiating=event.endswith("_emission"),
            )
        )

    def _reset_counters(self) -> None:
        for name in self.counters:
            self.counters[name] = 0
        self._mirror_counters()

    def _mirror_counters(self) -> None:
        for name, value in self.counters.items():
            self.datastore.force_set(f"counters/{name}", str(value))
