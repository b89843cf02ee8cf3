"""Per-class M/M/1 stations: customers arrive at the class demand rate and
are served at the class vehicle-supply rate.

Two engines produce identical sample paths from the same streams:
``lindley`` runs the FIFO recursion ``D_k = max(A_k, D_{k-1}) + S_k`` in
closed vectorized form; ``events`` drives the same stations through the
event queue and exists to cross-check the first.
"""
from __future__ import annotations

from collections import deque

import numpy as np

from ..model import derive_rates
from .engine import ARRIVAL, COMPLETION, SAMPLE, EventQueue
from .report import ClassStats, SimConfig, SimReport, class_stats, growth_flag, methodology
from .streams import BLOCK, Streams


def _arrival_times(gen: np.random.Generator, rate: float, horizon: float) -> np.ndarray:
    # draw in BLOCK multiples so the sequence matches the buffered event engine
    chunks, total = [], 0.0
    while total < horizon:
        block = gen.standard_exponential(BLOCK) / rate
        chunks.append(block)
        total += block.sum()
    t = np.cumsum(np.concatenate(chunks))
    return t[t < horizon]


def lindley_departures(arrivals: np.ndarray, services: np.ndarray) -> np.ndarray:
    """Departure epochs of a FIFO single-server queue.

    ``D_k = S_1 + ... + S_k + max_{j <= k}(A_j - S_1 - ... - S_{j-1})``.
    """
    cum = np.cumsum(services)
    return cum + np.maximum.accumulate(arrivals - (cum - services))


def _station_paths(cfg: SimConfig):
    zone = cfg.zone
    supply = derive_rates(zone, cfg.policy).lambda_v_class
    streams = Streams(cfg.seed)
    paths = []
    for k in range(zone.n_classes):
        lam, mu = zone.lambda_c[k], supply[k]
        if lam <= 0:
            paths.append((np.zeros(0), np.zeros(0)))
            continue
        a = _arrival_times(streams.generator(f"customers[{k + 1}]"), lam, cfg.horizon)
        if mu <= 0:
            paths.append((a, np.full(a.size, np.inf)))
            continue
        gen = streams.generator(f"supply[{k + 1}]")
        nblocks = -(-a.size // BLOCK) if a.size else 0
        s = (gen.standard_exponential(nblocks * BLOCK) / mu)[: a.size]
        paths.append((a, lindley_departures(a, s)))
    return paths


def _events_paths(cfg: SimConfig):
    zone = cfg.zone
    supply = derive_rates(zone, cfg.policy).lambda_v_class
    streams = Streams(cfg.seed)
    n = zone.n_classes
    eq = EventQueue()
    arr_streams, svc_streams = {}, {}
    arrivals = [[] for _ in range(n)]
    departures = [[] for _ in range(n)]
    waiting = [deque() for _ in range(n)]
    busy = [False] * n
    for k in range(n):
        if zone.lambda_c[k] > 0:
            arr_streams[k] = streams.exponential(f"customers[{k + 1}]", zone.lambda_c[k])
            eq.push(arr_streams[k].next(), ARRIVAL, "arrival", k)
        if supply[k] > 0:
            svc_streams[k] = streams.exponential(f"supply[{k + 1}]", supply[k])
    while eq.peek_time() < cfg.horizon:
        t, kind, k = eq.pop()
        if kind == "arrival":
            arrivals[k].append(t)
            eq.push(t + arr_streams[k].next(), ARRIVAL, "arrival", k)
            if k not in svc_streams:
                continue
            if busy[k]:
                waiting[k].append(t)
            else:
                busy[k] = True
                eq.push(t + svc_streams[k].next(), COMPLETION, "done", k)
        else:
            departures[k].append(t)
            if waiting[k]:
                waiting[k].popleft()
                eq.push(t + svc_streams[k].next(), COMPLETION, "done", k)
            else:
                busy[k] = False
    paths = []
    for k in range(n):
        a = np.asarray(arrivals[k])
        d = np.full(a.size, np.inf)
        d[: len(departures[k])] = departures[k]
        paths.append((a, d))
    return paths


def run_abstract(cfg: SimConfig) -> SimReport:
    paths = _station_paths(cfg) if cfg.engine == "lindley" else _events_paths(cfg)
    w, h = cfg.warmup, cfg.horizon
    grid = np.linspace(0.0, h, cfg.trace_points + 1)
    classes: list[ClassStats] = []
    traces, max_queue, growth = {"time": grid.tolist()}, {}, {}
    for k, (a, d) in enumerate(paths):
        name = f"station[{k + 1}]"
        done = (a >= w) & (d <= h)
        unserved = int(np.sum((a >= w) & (d > h)))
        overlap = np.clip(np.minimum(d, h) - np.maximum(a, w), 0.0, None)
        in_system = float(overlap.sum() / (h - w))
        classes.append(class_stats(k + 1, a[done], (d - a)[done], cfg, unserved, mean_in_system=in_system))
        d_sorted = np.sort(d[d <= h])
        trace = np.searchsorted(a, grid, side="right") - np.searchsorted(d_sorted, grid, side="right")
        traces[name] = trace.tolist()
        max_queue[name] = _max_in_system(a, d_sorted)
        growth[name] = growth_flag(grid, trace, cfg)
    return SimReport(
        mode="abstract",
        seed=cfg.seed,
        horizon=h,
        warmup=w,
        classes=classes,
        max_queue=max_queue,
        growth=growth,
        traces=traces,
        methodology=methodology(cfg),
    )


def _max_in_system(a: np.ndarray, d: np.ndarray) -> int:
    if a.size == 0:
        return 0
    times = np.concatenate([a, d])
    steps = np.concatenate([np.ones(a.size, dtype=np.int64), -np.ones(d.size, dtype=np.int64)])
    # departures sort after arrivals at equal times
    order = np.lexsort((-steps, times))
    return int(np.cumsum(steps[order]).max())
