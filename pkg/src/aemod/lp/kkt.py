"""Optimality-structure checks for a solved dispatching program.

Beyond generic KKT conditions (dual feasibility, stationarity, complementary
slackness) this verifies the case structure of the optimal decisions: for
each decision ``q_j`` the sign of the difference between the multipliers of
the two customer classes it feeds decides whether ``q_j`` sits at 0, at 1, or
is pinned by the two classes' tight supply constraints.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..model import ZoneConfig
from .problem import LpSolution, build_lp


@dataclass
class KktCheck:
    name: str
    ok: bool
    index: int | None = None
    detail: str = ""


@dataclass
class KktReport:
    checks: list[KktCheck] = field(default_factory=list)
    ties: list[int] = field(default_factory=list)  # q indices on the equal-multiplier branch
    vacuous: list[int] = field(default_factory=list)  # q indices the structure says nothing about

    @property
    def failures(self) -> list[KktCheck]:
        return [c for c in self.checks if not c.ok]

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def degenerate(self) -> bool:
        return bool(self.vacuous)

    def add(self, name, ok, index=None, detail=""):
        self.checks.append(KktCheck(name, bool(ok), index, detail))

    def summary(self) -> str:
        state = "pass" if self.passed else "FAIL"
        extra = f", ties at q{self.ties}" if self.ties else ""
        extra += f", vacuous at q{self.vacuous}" if self.vacuous else ""
        lines = [f"KKT {state}: {len(self.checks)} checks, {len(self.failures)} failed{extra}"]
        lines += [f"  {c.name}[{c.index}]: {c.detail}" for c in self.failures]
        return "\n".join(lines)


def tight_q(config: ZoneConfig, q: np.ndarray, r_star: float, cls: int) -> tuple[int, float]:
    """Decision value that makes class ``cls``'s supply constraint tight.

    Returns ``(j, value)``: class ``cls < n`` pins ``q_cls`` given
    ``q_{cls-1}``; class ``n`` pins ``q_{n-1}`` given ``q_0``.
    """
    n, lv, p, lc = config.n_classes, config.lambda_v, config.p, config.lambda_c
    j = cls if cls < n else n - 1
    if p[j] <= 0:
        return j, math.nan  # q_j carries no vehicles; nothing to pin
    if cls < n:
        value = p[cls - 1] * q[cls - 1] / p[cls] - (lv * p[cls - 1] - lc[cls - 1] - r_star) / (lv * p[cls])
        return cls, value
    value = (p[n - 1] + p[0] * q[0] - (lc[n - 1] + r_star) / lv) / p[n - 1]
    return n - 1, value


def kkt_verify(config: ZoneConfig, solution: LpSolution, tol: float = 1e-7, q_tol: float = 1e-6) -> KktReport:
    if not solution.optimal:
        raise ValueError("kkt_verify needs an optimal solution")
    problem = build_lp(config, check_admissible=False)
    a, b, c = problem.a, problem.b, problem.c
    n, lv, p = config.n_classes, config.lambda_v, config.p
    q = np.asarray(solution.policy.q)
    x = np.append(q, solution.r_star)
    nu = solution.nu
    alpha, beta, omega = solution.alpha, solution.beta, solution.omega
    scale = max(1.0, lv)
    rep = KktReport()

    worst = float(nu.min())
    rep.add("dual_feasibility", worst >= -tol, detail=f"min multiplier {worst:.3g}")
    resid = a.T @ nu + c
    rep.add("stationarity", np.abs(resid).max() <= tol * scale, detail=f"max |A^T nu + c| {np.abs(resid).max():.3g}")
    rep.add("alpha_sum", abs(alpha.sum() - 1.0) <= tol, detail=f"sum alpha = {alpha.sum():.12g}")
    slack = b - a @ x
    rep.add("primal_feasibility", slack.min() >= -tol * scale, detail=f"min slack {slack.min():.3g}")
    for r, rk in enumerate(problem.row_kind):
        cs = nu[r] * slack[r]
        if abs(cs) > tol * scale:
            rep.add("complementary_slackness", False, r, f"{rk}: nu={nu[r]:.3g} slack={slack[r]:.3g}")
    rep.add("charging_multipliers_zero", beta.max() <= tol, detail=f"beta={beta.tolist()}")
    rep.add("r_positivity_multiplier_zero", abs(omega[n]) <= tol, detail=f"omega_n={omega[n]:.3g}")

    for j in range(n):
        # q_j feeds class j+1 (j >= 1) or class n (j = 0) directly; its
        # complement feeds class j+1 (j >= 1) or class 1 (j = 0)
        if j == 0:
            hi, lo = alpha[0], alpha[n - 1]  # alpha_1 vs alpha_n
            pair = (1, n)
        else:
            hi, lo = alpha[j], alpha[j - 1]  # alpha_{j+1} vs alpha_j
            pair = (j, j + 1)
        if p[j] <= 0:
            rep.vacuous.append(j)
            continue
        diff = hi - lo
        if diff > tol:
            rep.add("q_zero_branch", abs(q[j]) <= q_tol, j, f"alpha diff {diff:.3g}, q={q[j]:.9g}")
        elif diff < -tol:
            rep.add("q_one_branch", abs(q[j] - 1.0) <= q_tol, j, f"alpha diff {diff:.3g}, q={q[j]:.9g}")
        elif hi > tol and lo > tol:
            rep.ties.append(j)
            for cls in pair:
                k, value = tight_q(config, q, solution.r_star, cls)
                if math.isnan(value):
                    if k not in rep.vacuous:
                        rep.vacuous.append(k)
                    continue
                rep.add("interior_branch", abs(q[k] - value) <= q_tol, k,
                        f"class {cls} tight gives q_{k}={value:.9g}, solver q_{k}={q[k]:.9g}")
        else:
            # equal multipliers that are (near) zero: the structure is silent
            rep.ties.append(j)
            rep.vacuous.append(j)
    return rep
