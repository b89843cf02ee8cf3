"""Brute-force search over policies, independent of the simplex path.

Exhaustive mode walks the full grid ``{0, step, 2*step, ..., 1}^n``; it is
only allowed for ``n <= 5``. Larger zones fall back to seeded random search,
whose result is a lower bound on the optimum and nothing more.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..model import Policy, ZoneConfig
from ..stability import partial_capacity
from .problem import EPS_R, EPS_STRICT

MAX_EXHAUSTIVE_N = 5
CHUNK = 1 << 16


@dataclass
class OracleResult:
    policy: Policy | None
    best_r: float | None
    mode: str
    evaluated: int

    @property
    def feasible(self) -> bool:
        return self.policy is not None


def _score(config: ZoneConfig, Q: np.ndarray, eps_strict: float) -> np.ndarray:
    """Min margin for each row of ``Q``; ``-inf`` where a charging queue is unstable."""
    lv = config.lambda_v
    p = np.asarray(config.p)
    lc = np.asarray(config.lambda_c)
    kept = p * Q  # direct dispatch mass (q_0: full charge)
    moved = p * (1.0 - Q)  # partial-charge mass
    supply = np.empty_like(Q)
    supply[:, :-1] = moved[:, :-1] + kept[:, 1:]
    supply[:, -1] = moved[:, -1] + kept[:, 0]
    r = (lv * supply - lc).min(axis=1)
    cap = partial_capacity(config)
    ok = lv * moved.sum(axis=1) < cap * (1.0 - eps_strict)
    ok &= lv * kept[:, 0] < config.mu_c * (1.0 - eps_strict)
    ok &= r >= EPS_R * lv
    return np.where(ok, r, -np.inf)


def _grid_best(config: ZoneConfig, axis: np.ndarray, eps_strict: float):
    """Exhaustive scan; the first decision is looped, the rest broadcast."""
    n, lv = config.n_classes, config.lambda_v
    p, lc = config.p, config.lambda_c
    k = axis.size
    rest = n - 1
    shape = (k,) * rest

    def ax(j):  # grid of q_j (j >= 1) broadcast along its own dimension
        s = [1] * rest
        s[j - 1] = k
        return axis.reshape(s)

    cap = partial_capacity(config) * (1.0 - eps_strict)
    r_floor = EPS_R * lv
    moved_rest = sum(lv * p[j] * (1.0 - ax(j)) for j in range(1, n))
    base = []  # margins of classes 2..n-1 do not involve q_0
    for i in range(2, n):
        base.append(lv * (p[i - 1] * (1.0 - ax(i - 1)) + p[i] * ax(i)) - lc[i - 1])
    inner = np.full(shape, np.inf)
    for m in base:
        inner = np.minimum(inner, m)
    best_r, best_idx = -np.inf, None
    for i0, q0 in enumerate(axis):
        if lv * p[0] * q0 >= config.mu_c * (1.0 - eps_strict):
            continue
        m1 = lv * (p[0] * (1.0 - q0) + p[1] * ax(1)) - lc[0]
        mn = lv * (p[n - 1] * (1.0 - ax(n - 1)) + p[0] * q0) - lc[n - 1]
        r = np.minimum(np.minimum(inner, m1), mn)
        ok = (lv * p[0] * (1.0 - q0) + moved_rest < cap) & (r >= r_floor)
        r = np.where(ok, r, -np.inf)
        flat = int(np.argmax(r))
        if r.flat[flat] > best_r:
            best_r, best_idx = float(r.flat[flat]), (i0,) + np.unravel_index(flat, r.shape)
    if best_idx is None:
        return None, None
    return np.array([axis[i] for i in best_idx]), best_r


def grid_oracle(
    config: ZoneConfig,
    step: float,
    *,
    eps_strict: float = EPS_STRICT,
    samples: int = 200_000,
    seed: int = 0,
) -> OracleResult:
    """Best min-margin policy on a grid (or by random search for large n).

    Charging-stability rows use the same relative slack as the LP so that the
    two searches range over the same feasible set.
    """
    n = config.n_classes
    if n <= MAX_EXHAUSTIVE_N:
        k = int(round(1.0 / step))
        if abs(k * step - 1.0) > 1e-9:
            raise ValueError("step must divide 1")
        axis = np.linspace(0.0, 1.0, k + 1)
        best_q, best_r = _grid_best(config, axis, eps_strict)
        mode, count = "exhaustive", axis.size ** n
    else:
        mode, count = "random", 0
        best_r, best_q = -np.inf, None
        rng = np.random.default_rng(seed)
        while count < samples:
            m = min(CHUNK, samples - count)
            Q = rng.random((m, n))
            scores = _score(config, Q, eps_strict)
            i = int(np.argmax(scores))
            count += m
            if scores[i] > best_r:
                best_r, best_q = float(scores[i]), Q[i].copy()
    if best_q is None or not np.isfinite(best_r):
        return OracleResult(None, None, mode, count)
    return OracleResult(Policy(tuple(best_q)), float(best_r), mode, count)
