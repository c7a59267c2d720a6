"""Hermetic conformance test harness for the O-RAN open fronthaul interface.

The package models both ends of an open fronthaul link: a test-equipment
side (DU emulation, signal analysis, grandmaster clock, NETCONF-style
manager) and a reference O-RU emulator, glued together by a discrete-event
timeline so that every run is deterministic and wall-clock free. On top of
that sits a conformance runner that executes an OTIC-style test catalog
spanning the M-, C/U- and S-plane groups and renders machine- and
human-readable reports.
"""

__version__ = "0.1.0"
