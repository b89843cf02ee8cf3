"""Experiment families: distribution shapes, baseline policies, sweeps.

Distribution parameters are fixed here because nothing upstream pins them:
gaussian shapes are centred at ``(n-1)/2`` with spread ``n/4``; monotone
shapes are linear ramps whose largest entry is three times the smallest.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InfeasibleModel
from .lp.problem import LpSolution, optimize
from .model import Policy, Unstable, ZoneConfig, avg_response_time, derive_rates, margins
from .stability import check_charging_stability, lemma1_check, optimal_class_count

SHAPES = ("uniform", "gaussian", "increasing", "decreasing")
POLICY_KINDS = ("optimal", "always_charge", "always_charge_literal", "equal_split")
RAMP_RATIO = 3.0

SWEEP_FIELDS = [
    "sweep_id", "point", "lambda_v", "mu_c", "C", "n", "sum_lambda_c", "p_shape", "c_shape",
    "policy", "R_star", "max_rt_min", "avg_rt_min", "stable",
]


@dataclass(frozen=True)
class DistShape:
    kind: str
    mean: float | None = None  # class units; gaussian only
    spread: float | None = None

    def __post_init__(self):
        if self.kind not in SHAPES:
            raise ConfigError(f"unknown distribution shape {self.kind!r}; expected one of {SHAPES}")


def make_distribution(shape: DistShape | str, n: int, target_sum: float) -> tuple[float, ...]:
    """Length-``n`` non-negative vector of the given shape summing to ``target_sum``."""
    if isinstance(shape, str):
        shape = DistShape(shape)
    if n < 2:
        raise ConfigError("n must be >= 2")
    k = np.arange(n, dtype=float)
    if shape.kind == "uniform":
        w = np.ones(n)
    elif shape.kind == "increasing":
        w = 1.0 + (RAMP_RATIO - 1.0) * k / (n - 1)
    elif shape.kind == "decreasing":
        w = RAMP_RATIO - (RAMP_RATIO - 1.0) * k / (n - 1)
    else:
        mean = (n - 1) / 2 if shape.mean is None else shape.mean
        spread = n / 4 if shape.spread is None else shape.spread
        w = np.exp(-0.5 * ((k - mean) / spread) ** 2)
    v = w / w.sum() * target_sum
    if target_sum > 0:
        # push the rounding residue into the largest entry
        i = int(np.argmax(v))
        v[i] += target_sum - math.fsum(v)
    return tuple(float(x) for x in v)


def make_zone(lambda_v, mu_c, c_points, n, sum_lambda_c, p_shape="uniform", c_shape="uniform") -> ZoneConfig:
    return ZoneConfig(
        lambda_v=lambda_v,
        mu_c=mu_c,
        c_points=c_points,
        n_classes=n,
        p=make_distribution(p_shape, n, 1.0),
        lambda_c=make_distribution(c_shape, n, sum_lambda_c),
    )


def make_policy(kind: str, n: int, solution: LpSolution | None = None, q=None) -> Policy:
    """Baseline or optimal policy.

    ``always_charge`` routes every vehicle to partial charging (all zeros);
    ``always_charge_literal`` is the all-ones reading of the same name.
    """
    if kind == "optimal":
        if solution is None or not solution.optimal:
            raise ConfigError("optimal policy requested without an optimal LP solution")
        return solution.policy
    if kind == "always_charge":
        return Policy.constant(n, 0.0)
    if kind == "always_charge_literal":
        return Policy.constant(n, 1.0)
    if kind == "equal_split":
        return Policy.constant(n, 0.5)
    if kind == "explicit":
        if q is None or len(q) != n:
            raise ConfigError(f"explicit policy needs {n} values")
        return Policy(tuple(q))
    raise ConfigError(f"unknown policy kind {kind!r}")


@dataclass
class Evaluation:
    """Response-time figures of one (zone, policy) pair."""

    policy: Policy | None
    r: float | None  # min margin (R* for the optimal policy)
    max_rt: float
    avg_rt: float
    stable: bool


def evaluate(config: ZoneConfig, policy: Policy) -> Evaluation:
    """Max/avg response time; both infinite when any queue, charging included, is unstable."""
    rates = derive_rates(config, policy)
    m = margins(config, rates)
    partial_ok, full_ok = check_charging_stability(config, rates)
    stable = min(m) > 0 and partial_ok and full_ok
    if not stable:
        return Evaluation(policy, min(m), math.inf, math.inf, False)
    return Evaluation(policy, min(m), 1.0 / min(m), avg_response_time(config, policy), True)


def evaluate_kind(config: ZoneConfig, kind: str, solution: LpSolution | None = None) -> Evaluation:
    if kind == "optimal":
        if solution is None:
            solution = solve_or_none(config)
        if solution is None or not solution.optimal:
            return Evaluation(None, None, math.inf, math.inf, False)
        ev = evaluate(config, solution.policy)
        ev.r = solution.r_star
        return ev
    return evaluate(config, make_policy(kind, config.n_classes))


def solve_or_none(config: ZoneConfig) -> LpSolution | None:
    if not lemma1_check(config):
        return None
    try:
        return optimize(config)
    except InfeasibleModel:
        return None


def gain(baseline: float, optimal: float) -> float:
    """Relative reduction (%) of ``optimal`` against ``baseline``."""
    if math.isinf(baseline):
        return 100.0 if math.isfinite(optimal) else math.nan
    return 100.0 * (baseline - optimal) / baseline


def compare_policies(config: ZoneConfig, kinds=("always_charge", "always_charge_literal", "equal_split")) -> list[dict]:
    """Optimal policy against baselines, with percentage gains in max and avg."""
    sol = solve_or_none(config)
    opt = evaluate_kind(config, "optimal", sol)
    rows = [{"policy": "optimal", "max_rt_min": opt.max_rt, "avg_rt_min": opt.avg_rt, "stable": opt.stable,
             "gain_max_pct": 0.0, "gain_avg_pct": 0.0}]
    for kind in kinds:
        ev = evaluate_kind(config, kind)
        rows.append({
            "policy": kind,
            "max_rt_min": ev.max_rt,
            "avg_rt_min": ev.avg_rt,
            "stable": ev.stable,
            "gain_max_pct": gain(ev.max_rt, opt.max_rt) if opt.stable else math.nan,
            "gain_avg_pct": gain(ev.avg_rt, opt.avg_rt) if opt.stable else math.nan,
        })
    return rows


def _expand(value, name):
    if isinstance(value, dict):
        try:
            return list(np.linspace(float(value["start"]), float(value["stop"]), int(value["num"])))
        except KeyError as exc:
            raise ConfigError(f"{name}: range needs start, stop and num") from exc
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


SWEEP_KEYS = {"sweep_id", "lambda_v", "mu_c", "c_points", "n_classes", "sum_lambda_c", "p_shape", "c_shape", "policy"}


def sweep(spec: dict) -> list[dict]:
    """Evaluate every grid point of a sweep spec, in deterministic order.

    Spec keys: ``sweep_id``, ``lambda_v``, ``mu_c``, ``c_points``,
    ``n_classes`` (int, list, or ``"nstar"``), ``sum_lambda_c`` (number, list
    or ``{"start", "stop", "num"}``), ``p_shape``, ``c_shape``, ``policy``
    (kind or list of kinds). The product is iterated with ``sum_lambda_c``
    varying fastest. ``R_star`` is the policy's minimum margin (the LP optimum
    for ``optimal``).
    """
    unknown = set(spec) - SWEEP_KEYS
    if unknown:
        raise ConfigError(f"unknown sweep spec fields: {sorted(unknown)}")
    for key in ("lambda_v", "mu_c", "c_points", "sum_lambda_c"):
        if key not in spec:
            raise ConfigError(f"sweep spec missing {key!r}")
    lv, mu, cp = float(spec["lambda_v"]), float(spec["mu_c"]), int(spec["c_points"])
    ns = [optimal_class_count(lv, mu, cp) if v == "nstar" else int(v) for v in _expand(spec.get("n_classes", "nstar"), "n_classes")]
    loads = [float(v) for v in _expand(spec["sum_lambda_c"], "sum_lambda_c")]
    p_shapes = _expand(spec.get("p_shape", "uniform"), "p_shape")
    c_shapes = _expand(spec.get("c_shape", "uniform"), "c_shape")
    kinds = _expand(spec.get("policy", "optimal"), "policy")
    for k in kinds:
        if k not in POLICY_KINDS:
            raise ConfigError(f"unknown policy kind {k!r}")
    rows = []
    for point, (n, ps, cs, kind, load) in enumerate(itertools.product(ns, p_shapes, c_shapes, kinds, loads)):
        zone = make_zone(lv, mu, cp, n, load, ps, cs)
        ev = evaluate_kind(zone, kind)
        rows.append({
            "sweep_id": spec.get("sweep_id", "sweep"),
            "point": point,
            "lambda_v": lv,
            "mu_c": mu,
            "C": cp,
            "n": n,
            "sum_lambda_c": load,
            "p_shape": ps,
            "c_shape": cs,
            "policy": kind,
            "R_star": ev.r,
            "max_rt_min": ev.max_rt,
            "avg_rt_min": ev.avg_rt,
            "stable": ev.stable,
        })
    return rows


def rows_to_csv(rows: list[dict], fields: list[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for row in rows:
        w.writerow({k: _cell(v) for k, v in row.items()})
    return buf.getvalue()


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return "inf" if math.isinf(v) else ("" if math.isnan(v) else repr(v))
    if isinstance(v, Unstable):
        return "inf"
    return v
