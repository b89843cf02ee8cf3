"""Entity-level simulation of the zone's charging/dispatch network.

Vehicles arrive Poisson(lambda_v) with an SoC class drawn from ``p``. A
depleted vehicle fully charges at the single central station with
probability ``q_0`` (then serves class n) or partially charges at the C-point
pool (then serves class 1). A class-i vehicle parks for class-i customers
with probability ``q_i``, otherwise partially charges and parks for class
i+1. Customers take a parked vehicle of their class at once, or wait FIFO
for the next one; response time is request-to-assignment delay. Assigned
vehicles leave the model.
"""
from __future__ import annotations

from collections import deque

import numpy as np

from ..errors import SimulationError
from .engine import ARRIVAL, COMPLETION, SAMPLE, EventQueue
from .report import SimConfig, SimReport, class_stats, growth_flag, methodology
from .streams import Streams


class _Zone:
    """Mutable state of one physical-mode run."""

    def __init__(self, cfg: SimConfig):
        zone = cfg.zone
        self.cfg = cfg
        self.n = n = zone.n_classes
        self.C = zone.c_points
        streams = Streams(cfg.seed)
        self.veh_arrivals = streams.exponential("vehicle_arrivals", zone.lambda_v)
        self.class_draw = streams.uniform("vehicle_class")
        self.routing = streams.uniform("routing")
        self.partial_service = streams.exponential("partial_service", n * zone.mu_c)
        self.full_service = streams.exponential("full_service", zone.mu_c)
        self.cust_streams = {
            i: streams.exponential(f"customers[{i}]", zone.lambda_c[i - 1]) for i in range(1, n + 1) if zone.lambda_c[i - 1] > 0
        }
        self.cum_p = np.cumsum(zone.p).tolist()
        self.cum_p[-1] = 1.0
        self.q = list(cfg.policy.q)

        self.parked = [0] * (n + 1)  # index 1..n
        self.waiting = [deque() for _ in range(n + 1)]
        self.pool_queue: deque = deque()
        self.pool_busy = 0
        self.full_queue = 0
        self.full_busy = 0
        self.entered = 0
        self.dispatched = 0
        self.parked_total = 0
        self.pool_arrivals = 0
        self.full_arrivals = 0
        self.responses = [([], []) for _ in range(n + 1)]  # (request time, response)
        self.max_queue = {"partial_pool": 0, "full_station": 0}
        for i in range(1, n + 1):
            self.max_queue[f"customers[{i}]"] = 0
            self.max_queue[f"parked[{i}]"] = 0

    def audit(self):
        inside = self.parked_total + len(self.pool_queue) + self.pool_busy + self.full_queue + self.full_busy
        if self.entered != inside + self.dispatched:
            raise SimulationError(
                f"vehicle flow not conserved: entered={self.entered}, inside={inside}, dispatched={self.dispatched}"
            )

    def park(self, t: float, i: int):
        if self.waiting[i]:
            req = self.waiting[i].popleft()
            self.dispatched += 1
            if req >= self.cfg.warmup:
                self.responses[i][0].append(req)
                self.responses[i][1].append(t - req)
        else:
            self.parked[i] += 1
            self.parked_total += 1
            key = f"parked[{i}]"
            if self.parked[i] > self.max_queue[key]:
                self.max_queue[key] = self.parked[i]

    def to_pool(self, eq: EventQueue, t: float, target: int):
        if t >= self.cfg.warmup:
            self.pool_arrivals += 1
        if self.pool_busy < self.C:
            self.pool_busy += 1
            eq.push(t + self.partial_service.next(), COMPLETION, "partial_done", target)
        else:
            self.pool_queue.append(target)
        size = self.pool_busy + len(self.pool_queue)
        if size > self.max_queue["partial_pool"]:
            self.max_queue["partial_pool"] = size

    def to_full(self, eq: EventQueue, t: float):
        if t >= self.cfg.warmup:
            self.full_arrivals += 1
        if self.full_busy == 0:
            self.full_busy = 1
            eq.push(t + self.full_service.next(), COMPLETION, "full_done", None)
        else:
            self.full_queue += 1
        size = self.full_busy + self.full_queue
        if size > self.max_queue["full_station"]:
            self.max_queue["full_station"] = size

    def snapshot(self) -> list[int]:
        row = [self.pool_busy + len(self.pool_queue), self.full_busy + self.full_queue]
        row += [len(self.waiting[i]) for i in range(1, self.n + 1)]
        row += [self.parked[i] for i in range(1, self.n + 1)]
        return row


def run_physical(cfg: SimConfig, audit: bool = True) -> SimReport:
    z = _Zone(cfg)
    n, h, w = z.n, cfg.horizon, cfg.warmup
    eq = EventQueue()
    eq.push(z.veh_arrivals.next(), ARRIVAL, "vehicle", None)
    for i, s in z.cust_streams.items():
        eq.push(s.next(), ARRIVAL, "customer", i)
    grid = np.linspace(0.0, h, cfg.trace_points + 1)
    for t in grid:
        eq.push(float(t), SAMPLE, "sample", None)
    samples = []

    while eq and eq.peek_time() <= h:
        t, kind, data = eq.pop()
        if kind == "vehicle":
            eq.push(t + z.veh_arrivals.next(), ARRIVAL, "vehicle", None)
            z.entered += 1
            k = 0
            u = z.class_draw.next()
            while u >= z.cum_p[k]:
                k += 1
            go = z.routing.next() < z.q[k]
            if k == 0:
                if go:
                    z.to_full(eq, t)
                else:
                    z.to_pool(eq, t, 1)
            elif go:
                z.park(t, k)
            else:
                z.to_pool(eq, t, k + 1)
        elif kind == "customer":
            i = data
            eq.push(t + z.cust_streams[i].next(), ARRIVAL, "customer", i)
            if z.parked[i] > 0:
                z.parked[i] -= 1
                z.parked_total -= 1
                z.dispatched += 1
                if t >= w:
                    z.responses[i][0].append(t)
                    z.responses[i][1].append(0.0)
            else:
                z.waiting[i].append(t)
                key = f"customers[{i}]"
                if len(z.waiting[i]) > z.max_queue[key]:
                    z.max_queue[key] = len(z.waiting[i])
        elif kind == "partial_done":
            if z.pool_queue:
                nxt = z.pool_queue.popleft()
                eq.push(t + z.partial_service.next(), COMPLETION, "partial_done", nxt)
            else:
                z.pool_busy -= 1
            z.park(t, data)
        elif kind == "full_done":
            if z.full_queue:
                z.full_queue -= 1
                eq.push(t + z.full_service.next(), COMPLETION, "full_done", None)
            else:
                z.full_busy = 0
            z.park(t, n)
        elif kind == "sample":
            samples.append(z.snapshot())
        if audit:
            z.audit()

    zone = cfg.zone
    span = h - w
    trace = np.asarray(samples, dtype=np.int64)
    names = ["partial_pool", "full_station"] + [f"customers[{i}]" for i in range(1, n + 1)] + [f"parked[{i}]" for i in range(1, n + 1)]
    traces = {"time": grid[: trace.shape[0]].tolist()}
    growth = {}
    for col, name in enumerate(names):
        traces[name] = trace[:, col].tolist()
        if not name.startswith("parked"):
            growth[name] = growth_flag(grid[: trace.shape[0]], trace[:, col], cfg)
    classes = []
    for i in range(1, n + 1):
        req = np.asarray(z.responses[i][0])
        rt = np.asarray(z.responses[i][1])
        unserved = sum(1 for r in z.waiting[i] if r >= w)
        classes.append(class_stats(i, req, rt, cfg, unserved))
    return SimReport(
        mode="physical",
        seed=cfg.seed,
        horizon=h,
        warmup=w,
        classes=classes,
        util_partial=z.pool_arrivals / (span * zone.c_points * n * zone.mu_c),
        util_full=z.full_arrivals / (span * zone.mu_c),
        max_queue=z.max_queue,
        growth=growth,
        traces=traces,
        methodology=methodology(cfg),
    )
