"""Time-ordered pending-event queue.

Ties on equal timestamps resolve by event priority (arrival, then service
completion, then dispatch, then trace sampling), then by insertion order.
"""
from __future__ import annotations

import heapq
import itertools

ARRIVAL = 0
COMPLETION = 1
DISPATCH = 2
SAMPLE = 3


class EventQueue:
    def __init__(self):
        self._heap: list = []
        self._seq = itertools.count()

    def push(self, time: float, priority: int, kind: str, data=None) -> None:
        heapq.heappush(self._heap, (time, priority, next(self._seq), kind, data))

    def pop(self):
        time, _, _, kind, data = heapq.heappop(self._heap)
        return time, kind, data

    def peek_time(self) -> float:
        return self._heap[0][0] if self._heap else float("inf")

    def __len__(self):
        return len(self._heap)
