"""Zone parameters, dispatch policies and the rate algebra linking them.

Indexing convention used throughout the package:

* vehicle-side vectors (``p``, ``q``) are indexed by SoC class ``0..n-1``;
  class ``n`` never receives arriving vehicles, so ``p_n = 0`` is implicit.
* customer-side vectors (``lambda_c``, per-class supply rates, response
  times) hold classes ``1..n`` at positions ``0..n-1``; class 0 customers do
  not exist.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError

PROB_SUM_TOL = 1e-12


def _as_tuple(values, name: str) -> tuple[float, ...]:
    try:
        out = tuple(float(v) for v in values)
    except TypeError as exc:
        raise ConfigError(f"{name} must be a sequence of numbers") from exc
    if any(not math.isfinite(v) for v in out):
        raise ConfigError(f"{name} contains a non-finite entry")
    return out


@dataclass(frozen=True)
class ZoneConfig:
    """Exogenous parameters of a single service zone.

    ``lambda_c[k]`` is the arrival rate of class ``k+1`` customers.
    Demand that exceeds supply is representable here on purpose; admissibility
    is judged by :mod:`aemod.stability`.
    """

    lambda_v: float
    mu_c: float
    c_points: int
    n_classes: int
    p: tuple[float, ...]
    lambda_c: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "p", _as_tuple(self.p, "p"))
        object.__setattr__(self, "lambda_c", _as_tuple(self.lambda_c, "lambda_c"))
        for name in ("lambda_v", "mu_c"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
                raise ConfigError(f"{name} must be a positive finite number, got {value!r}")
        for name in ("c_points", "n_classes"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.c_points < 1:
            raise ConfigError("c_points must be >= 1")
        if self.n_classes < 2:
            raise ConfigError("n_classes must be >= 2")
        n = self.n_classes
        if len(self.p) != n:
            raise ConfigError(f"p has length {len(self.p)}, expected n_classes={n}")
        if len(self.lambda_c) != n:
            raise ConfigError(f"lambda_c has length {len(self.lambda_c)}, expected n_classes={n}")
        if any(pi < 0 or pi > 1 for pi in self.p):
            raise ConfigError("every p_i must lie in [0, 1]")
        if abs(math.fsum(self.p) - 1.0) > PROB_SUM_TOL:
            raise ConfigError(f"p must sum to 1 within {PROB_SUM_TOL:g}, sums to {math.fsum(self.p)!r}")
        if any(lc < 0 for lc in self.lambda_c):
            raise ConfigError("lambda_c entries must be >= 0")

    @property
    def n(self) -> int:
        return self.n_classes

    @property
    def total_demand(self) -> float:
        return math.fsum(self.lambda_c)

    def scaled(self, factor: float) -> "ZoneConfig":
        """Same zone with every rate (lambda_v, mu_c, lambda_c) multiplied by ``factor``."""
        return ZoneConfig(
            lambda_v=self.lambda_v * factor,
            mu_c=self.mu_c * factor,
            c_points=self.c_points,
            n_classes=self.n_classes,
            p=self.p,
            lambda_c=tuple(lc * factor for lc in self.lambda_c),
        )

    def to_dict(self) -> dict:
        return {
            "lambda_v": self.lambda_v,
            "mu_c": self.mu_c,
            "c_points": self.c_points,
            "n_classes": self.n_classes,
            "p": list(self.p),
            "lambda_c": list(self.lambda_c),
        }


@dataclass(frozen=True)
class Policy:
    """Dispatch/charge proportions ``q_0..q_{n-1}``.

    ``q[0]`` is the probability a depleted vehicle fully charges; ``q[i]``
    (i >= 1) the probability a class-i vehicle is dispatched directly.
    """

    q: tuple[float, ...]

    def __post_init__(self):
        q = _as_tuple(self.q, "q")
        if not q:
            raise ConfigError("policy must have at least one entry")
        if any(qi < 0 or qi > 1 for qi in q):
            raise ConfigError(f"every q_i must lie in [0, 1], got {q}")
        object.__setattr__(self, "q", q)

    def __len__(self):
        return len(self.q)

    @classmethod
    def constant(cls, n: int, value: float) -> "Policy":
        return cls((float(value),) * n)

    @classmethod
    def clipped(cls, values: Sequence[float]) -> "Policy":
        """Build from solver output, clipping round-off just outside [0, 1]."""
        return cls(tuple(min(1.0, max(0.0, float(v))) for v in values))


@dataclass(frozen=True)
class DerivedRates:
    """Per-class vehicle supply and charging loads implied by a policy.

    ``lambda_v_class[k]`` is the supply rate of class ``k+1``.
    """

    lambda_v_class: tuple[float, ...]
    partial_load: float
    full_load: float


@dataclass(frozen=True)
class Unstable:
    """Response time of a class whose supply does not exceed its demand.

    ``margin`` is the (non-positive) supply minus demand.
    """

    margin: float

    def __float__(self):
        return math.inf

    def __repr__(self):
        return f"Unstable(margin={self.margin:.6g})"


@dataclass(frozen=True)
class MaxResponse:
    value: float | Unstable
    argmax: int  # customer class, 1-based

    @property
    def stable(self) -> bool:
        return not isinstance(self.value, Unstable)

    def __float__(self):
        return float(self.value)


def _check_policy(config: ZoneConfig, policy: Policy) -> None:
    if len(policy.q) != config.n_classes:
        raise ConfigError(f"policy has {len(policy.q)} entries, config has n_classes={config.n_classes}")


def derive_rates(config: ZoneConfig, policy: Policy) -> DerivedRates:
    """Class supply rates and charging-queue arrival rates for ``policy``."""
    _check_policy(config, policy)
    n, lv = config.n_classes, config.lambda_v
    p, q = config.p, policy.q
    supply = [lv * (p[i - 1] * (1.0 - q[i - 1]) + p[i] * q[i]) for i in range(1, n)]
    supply.append(lv * (p[n - 1] * (1.0 - q[n - 1]) + p[0] * q[0]))
    partial = lv * math.fsum(p[i] * (1.0 - q[i]) for i in range(n))
    return DerivedRates(tuple(supply), partial, lv * p[0] * q[0])


def margins(config: ZoneConfig, rates: DerivedRates) -> tuple[float, ...]:
    """Supply minus demand per customer class (the response *rates*)."""
    return tuple(s - d for s, d in zip(rates.lambda_v_class, config.lambda_c))


def response_times(config: ZoneConfig, rates: DerivedRates) -> list[float | Unstable]:
    """Expected M/M/1 sojourn time of each customer class, or :class:`Unstable`."""
    out: list[float | Unstable] = []
    for m in margins(config, rates):
        out.append(1.0 / m if m > 0 else Unstable(m))
    return out


def max_response_time(config: ZoneConfig, policy: Policy) -> MaxResponse:
    """Worst class response time; ``argmax`` is the 1-based class of the smallest margin."""
    m = margins(config, derive_rates(config, policy))
    k = int(np.argmin(m))  # first occurrence on ties
    value = 1.0 / m[k] if m[k] > 0 else Unstable(m[k])
    return MaxResponse(value, k + 1)


def avg_response_time(config: ZoneConfig, policy: Policy) -> float:
    """Mean of the per-class response times; ``inf`` if any class is unstable."""
    rts = response_times(config, derive_rates(config, policy))
    if any(isinstance(r, Unstable) for r in rts):
        return math.inf
    return math.fsum(rts) / len(rts)
