"""Stability predicates and the class-count bound.

All comparisons are exact strict inequalities on floats; numerical slack for
the optimizer lives in :mod:`aemod.lp`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .model import DerivedRates, Policy, ZoneConfig, derive_rates


@dataclass(frozen=True)
class StabilityReport:
    per_class_stable: tuple[bool, ...]
    partial_pool_stable: bool
    full_station_stable: bool
    lemma1_ok: bool
    lemma2_bound: float
    n_star: int

    @property
    def stable(self) -> bool:
        return all(self.per_class_stable) and self.partial_pool_stable and self.full_station_stable


def check_class_stability(config: ZoneConfig, rates: DerivedRates) -> tuple[bool, ...]:
    return tuple(s > d for s, d in zip(rates.lambda_v_class, config.lambda_c))


def partial_capacity(config: ZoneConfig, n_classes: int | None = None) -> float:
    """Service capacity C * n * mu_c of the partial-charging pool."""
    n = config.n_classes if n_classes is None else n_classes
    return config.c_points * n * config.mu_c


def check_charging_stability(config: ZoneConfig, rates: DerivedRates) -> tuple[bool, bool]:
    """(partial pool stable, full station stable)."""
    return rates.partial_load < partial_capacity(config), rates.full_load < config.mu_c


def lemma1_check(config: ZoneConfig) -> bool:
    """Total customer demand strictly below the vehicle in-flow."""
    return config.total_demand < config.lambda_v


def class_count_bound(lambda_v: float, mu_c: float, c_points: int) -> float:
    return lambda_v / (c_points * mu_c) - 1.0 / c_points


def lemma2_bound(config: ZoneConfig) -> float:
    """Lower bound that the class count must strictly exceed."""
    return class_count_bound(config.lambda_v, config.mu_c, config.c_points)


def n_star_from_bound(bound: float) -> int:
    """Smallest integer strictly above ``bound``, never below 2."""
    if bound == math.floor(bound):
        n = int(bound) + 1
    else:
        n = math.ceil(bound)
    return max(2, n)


def optimal_class_count(lambda_v: float, mu_c: float, c_points: int) -> int:
    return n_star_from_bound(class_count_bound(lambda_v, mu_c, c_points))


def n_star(config: ZoneConfig) -> int:
    return n_star_from_bound(lemma2_bound(config))


def lemma2_ok(config: ZoneConfig) -> bool:
    return config.n_classes > lemma2_bound(config)


def report(config: ZoneConfig, policy: Policy) -> StabilityReport:
    rates = derive_rates(config, policy)
    partial_ok, full_ok = check_charging_stability(config, rates)
    return StabilityReport(
        per_class_stable=check_class_stability(config, rates),
        partial_pool_stable=partial_ok,
        full_station_stable=full_ok,
        lemma1_ok=lemma1_check(config),
        lemma2_bound=lemma2_bound(config),
        n_star=n_star(config),
    )
