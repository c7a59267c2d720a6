"""Discrete-event simulated timeline.

Every component in the harness shares one :class:`SimTimeline`. Nothing in
hermetic mode reads the wall clock; "now" is an integer nanosecond counter
that only moves when events are executed. Determinism follows from the event
ordering rule: events fire in (time, insertion sequence) order, so two runs
that schedule the same work in the same order replay identically.
"""

from __future__ import annotations

import heapq
from typing import Callable


class SimTimeline:
    """Priority-queue event loop over integer nanosecond time."""

    def __init__(self, start_ns: int = 0) -> None:
        self.now_ns: int = start_ns
        self._heap: list[tuple[int, int, int, Callable[[], None]]] = []
        self._seq = 0
        self._cancelled: set[int] = set()

    def schedule_at(self, t_ns: int, fn: Callable[[], None]) -> int:
        """Schedule ``fn`` at absolute time ``t_ns``; returns a handle."""
        if t_ns < self.now_ns:
            raise ValueError(f"cannot schedule in the past: {t_ns} < {self.now_ns}")
        self._seq += 1
        heapq.heappush(self._heap, (t_ns, self._seq, self._seq, fn))
        return self._seq

    def schedule_in(self, delay_ns: int, fn: Callable[[], None]) -> int:
        return self.schedule_at(self.now_ns + delay_ns, fn)

    def cancel(self, handle: int) -> None:
        self._cancelled.add(handle)

    def run_until(self, t_ns: int) -> None:
        """Execute all events with time <= t_ns, then advance now to t_ns."""
        while self._heap and self._heap[0][0] <= t_ns:
            when, _, handle, fn = heapq.heappop(self._heap)
            if handle in self._cancelled:
                self._cancelled.discard(handle)
                continue
            self.now_ns = when
            fn()
        if t_ns > self.now_ns:
            self.now_ns = t_ns

    def run_all(self, limit_ns: int | None = None) -> None:
        """Drain the queue, optionally stopping at ``limit_ns``."""
        while self._heap:
            if limit_ns is not None and self._heap[0][0] > limit_ns:
                break
            when, _, handle, fn = heapq.heappop(self._heap)
            if handle in self._cancelled:
                self._cancelled.discard(handle)
                continue
            self.now_ns = when
            fn()
        if limit_ns is not None and limit_ns > self.now_ns:
            self.now_ns = limit_ns

    def pending(self) -> int:
        return sum(1 for item in self._heap if item[2] not in self._cancelled)
