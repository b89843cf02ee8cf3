"""Simulation configuration, result types and output statistics."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from ..errors import ConfigError, SimulationError
from ..model import Policy, Unstable, ZoneConfig, derive_rates, response_times

MODES = ("abstract", "physical")
DEFAULT_BATCHES = 20
WARMUP_FRACTION = 0.1
GROWTH_ASCENT_FRACTION = 0.75

CSV_FIELDS = ["mode", "seed", "class", "mean_rt_min", "p95_rt_min", "ci_halfwidth", "served", "util_partial", "util_full"]


@dataclass(frozen=True)
class SimConfig:
    zone: ZoneConfig
    policy: Policy
    mode: str = "abstract"
    horizon: float = 1e6
    warmup: float | None = None  # default: 10% of the horizon
    seed: int = 0
    engine: str = "lindley"  # abstract mode only: "lindley" or "events"
    batches: int = DEFAULT_BATCHES
    trace_points: int = 2000

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.engine not in ("lindley", "events"):
            raise ConfigError(f"engine must be 'lindley' or 'events', got {self.engine!r}")
        if self.warmup is None:
            object.__setattr__(self, "warmup", WARMUP_FRACTION * self.horizon)
        if not (self.horizon > self.warmup >= 0):
            raise ConfigError(f"need horizon > warmup >= 0, got horizon={self.horizon}, warmup={self.warmup}")
        if len(self.policy.q) != self.zone.n_classes:
            raise ConfigError("policy length does not match n_classes")
        if self.batches < 2:
            raise ConfigError("need at least 2 batches")


@dataclass
class ClassStats:
    cls: int
    served: int
    mean_rt: float
    p95_rt: float
    ci_halfwidth: float
    unserved_at_horizon: int = 0
    mean_in_system: float | None = None  # abstract mode: time-average customers at the station


@dataclass
class SimReport:
    mode: str
    seed: int
    horizon: float
    warmup: float
    classes: list[ClassStats]
    util_partial: float | None = None
    util_full: float | None = None
    max_queue: dict = field(default_factory=dict)
    growth: dict = field(default_factory=dict)
    traces: dict = field(default_factory=dict)
    methodology: dict = field(default_factory=dict)

    def to_dict(self, include_traces: bool = False) -> dict:
        out = asdict(self)
        if not include_traces:
            out.pop("traces")
        return _clean(out)

    def csv_rows(self) -> list[dict]:
        rows = []
        for c in self.classes:
            rows.append({
                "mode": self.mode,
                "seed": self.seed,
                "class": c.cls,
                "mean_rt_min": _fmt(c.mean_rt),
                "p95_rt_min": _fmt(c.p95_rt),
                "ci_halfwidth": _fmt(c.ci_halfwidth),
                "served": c.served,
                "util_partial": _fmt(self.util_partial),
                "util_full": _fmt(self.util_full),
            })
        return rows

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        if header:
            w.writeheader()
        w.writerows(self.csv_rows())
        return buf.getvalue()


def _fmt(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return repr(float(v))


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return _clean(obj.item())
    return obj


def batch_means(times: np.ndarray, values: np.ndarray, start: float, stop: float, batches: int):
    """Mean of ``values`` in each of ``batches`` equal time slices of ``[start, stop)``."""
    edges = np.linspace(start, stop, batches + 1)
    idx = np.clip(np.searchsorted(edges, times, side="right") - 1, 0, batches - 1)
    sums = np.bincount(idx, weights=values, minlength=batches)
    counts = np.bincount(idx, minlength=batches)
    with np.errstate(invalid="ignore", divide="ignore"):
        return sums / counts


def ci_halfwidth(means: np.ndarray, level: float = 0.95) -> float:
    means = means[np.isfinite(means)]
    k = means.size
    if k < 2:
        return math.nan
    return float(stats.t.ppf(0.5 + level / 2, k - 1) * means.std(ddof=1) / math.sqrt(k))


def class_stats(cls: int, req: np.ndarray, rt: np.ndarray, cfg: SimConfig, unserved: int = 0, **extra) -> ClassStats:
    if rt.size == 0:
        return ClassStats(cls, 0, math.nan, math.nan, math.nan, unserved, **extra)
    means = batch_means(req, rt, cfg.warmup, cfg.horizon, cfg.batches)
    return ClassStats(
        cls=cls,
        served=int(rt.size),
        mean_rt=float(rt.mean()),
        p95_rt=float(np.percentile(rt, 95)),
        ci_halfwidth=ci_halfwidth(means),
        unserved_at_horizon=unserved,
        **extra,
    )


def growth_flag(times: np.ndarray, values: np.ndarray, cfg: SimConfig) -> bool:
    """Sustained-growth detector on a sampled queue-length trace.

    Flags when at least 75% of consecutive post-warmup batch means increase and
    the last batch exceeds the first.
    """
    keep = times >= cfg.warmup
    if keep.sum() < cfg.batches:
        return False
    means = batch_means(times[keep], values[keep].astype(float), cfg.warmup, cfg.horizon, cfg.batches)
    means = means[np.isfinite(means)]
    if means.size < 3:
        return False
    ascents = int(np.sum(np.diff(means) > 0))
    return ascents >= GROWTH_ASCENT_FRACTION * (means.size - 1) and means[-1] > means[0]


def methodology(cfg: SimConfig) -> dict:
    return {
        "warmup_min": cfg.warmup,
        "warmup_rule": "10% of horizon unless given",
        "ci": f"batch means over {cfg.batches} equal time batches, Student t 95%",
        "growth_flag": f">= {GROWTH_ASCENT_FRACTION:.0%} ascending batch means of sampled queue length",
        "engine": cfg.engine if cfg.mode == "abstract" else "event queue",
    }


@dataclass
class ClassValidation:
    cls: int
    empirical: float
    formula: float
    rel_err: float
    ok: bool


def validate_against_formula(report: SimReport, config: ZoneConfig, policy: Policy, rel_tol: float = 0.05) -> list[ClassValidation]:
    """Compare each class's empirical mean response with ``1/(supply - demand)``."""
    if report.mode != "abstract":
        raise SimulationError("mode mismatch: only abstract-mode reports are comparable with the M/M/1 formula")
    rts = response_times(config, derive_rates(config, policy))
    if any(isinstance(r, Unstable) for r in rts):
        raise SimulationError("unstable class in validation")
    out = []
    for stat, formula in zip(report.classes, rts):
        emp = stat.mean_rt
        err = abs(emp - formula) / formula if math.isfinite(emp) else math.inf
        out.append(ClassValidation(stat.cls, emp, formula, err, err <= rel_tol))
    return out
