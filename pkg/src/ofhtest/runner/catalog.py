"""The OTIC fronthaul conformance catalog.

Thirty-one WG4-style conformance cases across the management (3.1.x),
control/user (3.2.5.x), and synchronization (3.3.x) plane groups, in the
order a certification campaign runs them: M-plane first, because nothing
else on the interface is observable until the management session is up.

Each entry names the executable procedure implementing it; the binding is
checked before any campaign runs, so a catalog entry without a procedure
(or a procedure without an entry) refuses to execute at all rather than
silently skipping.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

MANDATORY = "MANDATORY"
CONDITIONAL_MANDATORY = "CONDITIONAL_MANDATORY"


class Plane(enum.Enum):
    M = "M"
    C = "C"
    U = "U"
    CU = "CU"
    S = "S"


@dataclass(frozen=True)
class TestCase:
    id: str
    title: str
    plane: Plane
    category: str
    procedure: str  # registry key of the executable scenario
    expected: str  # "positive" or "negative" verdict semantics

    def __post_init__(self) -> None:
        if self.category not in (MANDATORY, CONDITIONAL_MANDATORY):
            raise ValueError(f"unknown category {self.category!r}")
        if self.expected not in ("positive", "negative"):
            raise ValueError(f"unknown expectation {self.expected!r}")


def _case(
    case_id: str,
    title: str,
    plane: Plane,
    expected: str = "positive",
    category: str = MANDATORY,
) -> TestCase:
    return TestCase(
        id=case_id,
        title=title,
        plane=plane,
        category=category,
        procedure=case_id,
        expected=expected,
    )


_CATALOG: tuple[TestCase, ...] = (
    _case("3.1.1.7", "Transport and Handshake in IPv6 Environment (positive case)", Plane.M),
    _case(
        "3.1.1.8",
        "Transport and Handshake in IPv6 Environment (negative case)",
        Plane.M,
        expected="negative",
    ),
    _case("3.1.2.1", "Subscription to Notifications", Plane.M),
    _case("3.1.3.1", "M-Plane Connection Supervision (positive case)", Plane.M),
    _case(
        "3.1.3.2",
        "M-Plane Connection Supervision (negative case)",
        Plane.M,
        expected="negative",
    ),
    _case("3.1.4.1", "Retrieval without Filter Applied", Plane.M),
    _case("3.1.4.2", "Retrieval with Filter Applied", Plane.M),
    _case("3.1.5.1", "O-RU Alarm Notification Generation", Plane.M),
    _case("3.1.5.2", "Retrieval of Active Alarm List", Plane.M),
    _case("3.1.6.1", "O-RU Software Update (positive case)", Plane.M),
    _case("3.1.6.2", "O-RU Software Update (negative case)", Plane.M, expected="negative"),
    _case("3.1.7.1", "Software Activation without Reset", Plane.M),
    _case("3.1.7.2", "Supplemental Reset after Software Activation", Plane.M),
    _case(
        "3.1.8.6",
        "Sudo on Hierarchical M-plane architecture (positive case)",
        Plane.M,
        category=CONDITIONAL_MANDATORY,
    ),
    _case("3.1.10.1", "O-RU configurability test (positive case)", Plane.M),
    _case(
        "3.1.10.2",
        "O-RU configurability test (negative case)",
        Plane.M,
        expected="negative",
    ),
    _case("3.1.12.1", "Troubleshooting Test", Plane.M),
    _case("3.1.12.2", "Trace Test", Plane.M),
    _case("3.2.5.1.1", "UC-Plane O-RU Scenario Class Base 3GPP DL/UL", Plane.CU),
    _case(
        "3.2.5.1.2",
        "UC-Plane O-RU Scenario Class Extended 3GPP DL/UL - Resource Allocation",
        Plane.CU,
    ),
    _case(
        "3.2.5.1.3",
        "UC-Plane O-RU Scenario Class Extended using RB parameter 3GPP DL/UL - Resource Allocation",
        Plane.CU,
    ),
    _case(
        "3.2.5.2.1",
        "UC-Plane O-RU Scenario Class Beamforming 3GPP DL - No Beamforming",
        Plane.CU,
    ),
    _case(
        "3.2.5.2.2",
        "UC-Plane O-RU Scenario Class Beamforming 3GPP UL - No Beamforming",
        Plane.CU,
    ),
    _case(
        "3.2.5.2.5",
        "UC-Plane O-RU Scenario Class Beamforming 3GPP DL - Weight-based Dynamic Beamforming",
        Plane.CU,
        category=CONDITIONAL_MANDATORY,
    ),
    _case(
        "3.2.5.4.1",
        "UC-Plane O-RU Scenario Class DLM Test #1: Downlink - Positive testing",
        Plane.CU,
    ),
    _case(
        "3.2.5.4.2",
        "UC-Plane O-RU Scenario Class DLM Test #2: Uplink - Positive testing",
        Plane.CU,
    ),
    _case(
        "3.2.5.4.3",
        "UC-Plane O-RU Scenario Class DLM Test #3: Downlink - Negative testing",
        Plane.CU,
        expected="negative",
    ),
    _case(
        "3.2.5.4.4",
        "UC-Plane O-RU Scenario Class DLM Test #4: Uplink - Negative Testing",
        Plane.CU,
        expected="negative",
    ),
    _case("3.2.5.8.1", "UC-Plane O-RU Scenario Class ST3 Test #1: NR PRACH", Plane.CU),
    _case(
        "3.3.2",
        "Functional test of O-RU using ITU-T G.8275.1 Profile (LLS-C1/C2/C3)",
        Plane.S,
    ),
    _case(
        "3.3.3",
        "Performance test of O-RU using ITU-T G.8275.1 Profile (LLS-C1/C2/C3)",
        Plane.S,
    ),
)


def load_catalog() -> list[TestCase]:
    """The full catalog, in campaign execution order."""
    ids = [case.id for case in _CATALOG]
    if len(set(ids)) != len(ids):
        raise AssertionError("catalog ids are not unique")
    return list(_CATALOG)


def case_by_id(case_id: str) -> TestCase:
    for case in _CATALOG:
        if case.id == case_id:
            return case
    raise KeyError(f"unknown test case id {case_id!r}")
