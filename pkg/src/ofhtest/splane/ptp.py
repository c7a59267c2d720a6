"""Two-way time transfer, best-master selection, and path topologies.

The exchange algebra is the standard two-way formula: with timestamps
t1 (sync out, master clock), t2 (sync in, slave clock), t3 (delay-req out,
slave clock), t4 (delay-req in, master clock),

    offset = ((t2 - t1) - (t4 - t3)) / 2
    delay  = ((t2 - t1) + (t4 - t3)) / 2

which recovers the true offset exactly when the path is symmetric and
splits any asymmetry evenly into the offset estimate - the reason lab
calibration exists at all.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ofhtest.splane.clock import SimClock


@dataclass(frozen=True)
class PtpProfileConfig:
    """ITU-T G.8275.1-shaped profile parameters."""

    domain: int = 24
    announce_rate_hz: float = 8.0
    sync_rate_hz: float = 16.0
    delay_req_rate_hz: float = 16.0

    def violations(self) -> list[str]:
        problems = []
        if not 24 <= self.domain <= 43:
            problems.append(f"domain {self.domain} outside the telecom range [24, 43]")
        if self.announce_rate_hz != 8.0:
            problems.append(f"announce rate {self.announce_rate_hz} Hz, profile requires 8 Hz")
        if self.sync_rate_hz != 16.0:
            problems.append(f"sync rate {self.sync_rate_hz} Hz, profile requires 16 Hz")
        if self.delay_req_rate_hz != 16.0:
            problems.append(
                f"delay-req rate {self.delay_req_rate_hz} Hz, profile requires 16 Hz"
            )
        return problems


@dataclass(frozen=True)
class Announce:
    """Fields that drive best-master selection, best-first ordering."""

    priority1: int
    clock_class: int
    clock_accuracy: int
    priority2: int
    clock_identity: str

    def key(self) -> tuple:
        return (
            self.priority1,
            self.clock_class,
            self.clock_accuracy,
            self.priority2,
            self.clock_identity,
        )


def bmca_select(announces: list[Announce]) -> Announce | None:
    """Lexicographic comparison; lower wins, clock identity breaks ties."""
    if not announces:
        return None
    return min(announces, key=Announce.key)


@dataclass(frozen=True)
class HopModel:
    """One full-timing-support network element in the chain."""

    residence_ns: float = 800.0
    jitter_std_ns: float = 0.0


@dataclass
class PathModel:
    """Propagation delays plus the boundary/transparent hops in between."""

    forward_delay_ns: float = 500.0
    reverse_delay_ns: float = 500.0
    hops: list[HopModel] = field(default_factory=list)

    def sample(self, rng: random.Random) -> tuple[float, float]:
        fwd = self.forward_delay_ns
        rev = self.reverse_delay_ns
        for hop in self.hops:
            fwd += hop.residence_ns
            rev += hop.residence_ns
            if hop.jitter_std_ns:
                fwd += rng.gauss(0.0, hop.jitter_std_ns)
                rev += rng.gauss(0.0, hop.jitter_std_ns)
        return fwd, rev

    @property
    def asymmetry_ns(self) -> float:
        return self.forward_delay_ns - self.reverse_delay_ns


def lls_c1(asymmetry_ns: float = 0.0) -> PathModel:
    """Direct fiber between tester and radio."""
    return PathModel(forward_delay_ns=500.0 + asymmetry_ns, reverse_delay_ns=500.0)


def lls_c2(switches: int = 2, jitter_std_ns: float = 10.0, asymmetry_ns: float = 0.0) -> PathModel:
    """Fronthaul switches between tester and radio, frequency+phase aware."""
    hops = [HopModel(residence_ns=800.0, jitter_std_ns=jitter_std_ns) for _ in range(switches)]
    return PathModel(forward_delay_ns=900.0 + asymmetry_ns, reverse_delay_ns=900.0, hops=hops)


def lls_c3(chain: int = 3, jitter_std_ns: float = 10.0, asymmetry_ns: float = 0.0) -> PathModel:
    """Timing distributed across a chain of network elements."""
    hops = [HopModel(residence_ns=1200.0, jitter_std_ns=jitter_std_ns) for _ in range(chain)]
    return PathModel(forward_delay_ns=1500.0 + asymmetry_ns, reverse_delay_ns=1500.0, hops=hops)


@dataclass(frozen=True)
class PtpExchange:
    t1: float
    t2: float
    t3: float
    t4: float

    @property
    def offset_est_ns(self) -> float:
        return ((self.t2 - self.t1) - (self.t4 - self.t3)) / 2.0

    @property
    def delay_est_ns(self) -> float:
        return ((self.t2 - self.t1) + (self.t4 - self.t3)) / 2.0


def ptp_exchange(
    master: SimClock,
    slave: SimClock,
    path: PathModel,
    t_start_ns: float,
    rng: random.Random,
    turnaround_ns: float = 1000.0,
) -> PtpExchange:
    """Run one sync/delay-req round trip starting at simulated t_start."""
    fwd, rev = path.sample(rng)
    t1 = master.read(t_start_ns)
    t2 = slave.read(t_start_ns + fwd)
    t3 = slave.read(t_start_ns + fwd + turnaround_ns)
    t4 = master.read(t_start_ns + fwd + turnaround_ns + rev)
    return PtpExchange(t1=t1, t2=t2, t3=t3, t4=t4)
