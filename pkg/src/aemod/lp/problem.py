"""The max-min response-rate program in ``A x <= b`` form, and its solution.

Variables are ``x = (q_0, ..., q_{n-1}, R)`` with cost ``c = (0, ..., 0, -1)``.
Row order (``3n + 3`` materialized rows; the ``R <= inf`` row is dropped)::

    customer_queue(1..n)   supply margin of each class >= R
    partial_pool           charging-point pool below capacity
    full_station           full-charge station below capacity
    upper_bound(0..n-1)    q_i <= 1
    lower_bound(0..n-1)    -q_i <= 0
    r_positivity           -R <= -eps

Strict inequalities are tightened by a relative slack (see ``EPS_STRICT``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InfeasibleModel, VerificationError
from ..model import Policy, ZoneConfig
from ..stability import lemma1_check, partial_capacity
from .simplex import simplex

EPS_STRICT = 1e-6
# R > 0 has no natural scale of its own; use the vehicle in-flow
EPS_R = 1e-9

LEMMA1_MESSAGE = (
    "admissibility check failed: total customer demand {demand:.6g} is not strictly less than "
    "the total arrival rate of the vehicles {lambda_v:.6g}"
)


@dataclass(frozen=True)
class RowKind:
    kind: str
    index: int | None = None

    def __str__(self):
        return self.kind if self.index is None else f"{self.kind}({self.index})"


@dataclass
class LpProblem:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    row_kind: list[RowKind]
    config: ZoneConfig
    eps: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.config.n_classes

    @property
    def nominal_rows(self) -> int:
        return 3 * self.n + 4

    def rows(self, kind: str) -> list[int]:
        return [k for k, rk in enumerate(self.row_kind) if rk.kind == kind]

    def to_dict(self) -> dict:
        return {
            "variables": [f"q_{i}" for i in range(self.n)] + ["R"],
            "a": self.a.tolist(),
            "b": self.b.tolist(),
            "c": self.c.tolist(),
            "row_kind": [str(rk) for rk in self.row_kind],
            "nominal_rows": self.nominal_rows,
            "omitted_rows": ["upper_bound(R) <= inf"],
            "eps": dict(self.eps),
            "config": self.config.to_dict(),
        }


@dataclass
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    config: ZoneConfig
    policy: Policy | None = None
    r_star: float | None = None
    alpha: np.ndarray | None = None  # customer rows, classes 1..n
    beta: np.ndarray | None = None  # (partial pool, full station)
    gamma: np.ndarray | None = None  # q_i <= 1
    omega: np.ndarray | None = None  # q_i >= 0 and R > 0 (last entry)
    iterations: int = 0
    dual_source: str = "basis"
    dual_objective: float | None = None
    x: np.ndarray | None = None
    beta_tol: float = 1e-9

    @property
    def attained(self) -> bool:
        """True when the optimum of the strict-inequality program is attained.

        A charging multiplier that cannot be made zero means the optimum sits on
        a stability boundary, which the strict program excludes: only its
        supremum exists there.
        """
        return self.optimal and float(np.max(self.beta)) <= self.beta_tol * max(1.0, float(np.max(self.alpha)))

    @property
    def nu(self) -> np.ndarray:
        return np.concatenate([self.alpha, self.beta, self.gamma, self.omega])

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    def to_dict(self) -> dict:
        out = {"status": self.status, "iterations": self.iterations, "config": self.config.to_dict()}
        if self.optimal:
            out.update(
                policy=list(self.policy.q),
                r_star=self.r_star,
                max_response_time=1.0 / self.r_star,
                alpha=self.alpha.tolist(),
                beta=self.beta.tolist(),
                gamma=self.gamma.tolist(),
                omega=self.omega.tolist(),
                dual_source=self.dual_source,
                dual_objective=self.dual_objective,
                attained=self.attained,
            )
        return out


@dataclass
class DualSolution:
    status: str
    nu: np.ndarray | None = None
    objective: float | None = None  # b @ nu, equal to R* at optimum
    iterations: int = 0

    @property
    def g_value(self) -> float:
        """Value of the Lagrange dual function, ``-b @ nu`` (equals ``-R*``)."""
        return -self.objective


def build_lp(config: ZoneConfig, *, check_admissible: bool = True, eps_strict: float = EPS_STRICT) -> LpProblem:
    if check_admissible and not lemma1_check(config):
        raise InfeasibleModel(LEMMA1_MESSAGE.format(demand=config.total_demand, lambda_v=config.lambda_v))
    n, lv, p, lc = config.n_classes, config.lambda_v, config.p, config.lambda_c
    a = np.zeros((3 * n + 3, n + 1))
    b = np.zeros(3 * n + 3)
    kinds: list[RowKind] = []

    for i in range(1, n + 1):
        r = i - 1
        if i < n:
            a[r, i - 1] += lv * p[i - 1]
            a[r, i] -= lv * p[i]
        else:
            a[r, n - 1] += lv * p[n - 1]
            a[r, 0] -= lv * p[0]
        a[r, n] = 1.0
        b[r] = lv * p[i - 1] - lc[i - 1]
        kinds.append(RowKind("customer_queue", i))

    cap = partial_capacity(config)
    eps_partial = eps_strict * cap
    eps_full = eps_strict * config.mu_c
    eps_r = EPS_R * lv
    r = n
    a[r, :n] = [-lv * pi for pi in p]
    b[r] = cap - eps_partial - lv
    kinds.append(RowKind("partial_pool"))
    a[r + 1, 0] = lv * p[0]
    b[r + 1] = config.mu_c - eps_full
    kinds.append(RowKind("full_station"))
    for i in range(n):
        a[n + 2 + i, i] = 1.0
        b[n + 2 + i] = 1.0
        kinds.append(RowKind("upper_bound", i))
    for i in range(n):
        a[2 * n + 2 + i, i] = -1.0
        kinds.append(RowKind("lower_bound", i))
    a[3 * n + 2, n] = -1.0
    b[3 * n + 2] = -eps_r
    kinds.append(RowKind("r_positivity"))

    c = np.zeros(n + 1)
    c[n] = -1.0
    return LpProblem(a, b, c, kinds, config, {"partial_pool": eps_partial, "full_station": eps_full, "r_positivity": eps_r})


def _split_nu(nu: np.ndarray, n: int):
    return nu[:n], nu[n:n + 2], nu[n + 2:2 * n + 2], nu[2 * n + 2:]


def solve_primal(problem: LpProblem) -> LpSolution:
    """Optimal policy and R*; multipliers read from the final basis.

    The variables are free in the matrix form (their bounds are explicit rows),
    so each is split into a positive and a negative part.
    """
    a, b, c = problem.a, problem.b, problem.c
    res = simplex(np.concatenate([c, -c]), np.hstack([a, -a]), b)
    if res.status != "optimal":
        return LpSolution(res.status, problem.config, iterations=res.iterations)
    nvar = c.size
    x = res.x[:nvar] - res.x[nvar:]
    alpha, beta, gamma, omega = _split_nu(res.ineq_duals, problem.n)
    return LpSolution(
        "optimal",
        problem.config,
        policy=Policy.clipped(x[:-1]),
        r_star=float(x[-1]),
        alpha=alpha,
        beta=beta,
        gamma=gamma,
        omega=omega,
        iterations=res.iterations,
        dual_source="basis",
        dual_objective=float(b @ res.ineq_duals),
        x=x,
    )


def solve_dual(problem: LpProblem) -> DualSolution:
    """Solve ``min b @ nu  s.t.  A.T @ nu + c = 0, nu >= 0`` independently.

    Among alternative dual optima the one with least charging-row weight is
    returned (the charging multipliers vanish whenever that is possible).
    """
    a, b, c = problem.a, problem.b, problem.c
    secondary = np.zeros(b.size)
    secondary[problem.rows("partial_pool") + problem.rows("full_station")] = 1.0
    res = simplex(b, A_eq=a.T, b_eq=-c, secondary=secondary)
    if res.status != "optimal":
        # dual unbounded <=> primal infeasible
        return DualSolution(res.status, iterations=res.iterations)
    return DualSolution("optimal", res.x, float(b @ res.x), res.iterations)


def solve(problem: LpProblem, *, check_gap: bool = True, gap_tol: float = 1e-6) -> LpSolution:
    """Primal optimum with multipliers taken from the separately solved dual."""
    sol = solve_primal(problem)
    if not sol.optimal:
        return sol
    dual = solve_dual(problem)
    if dual.status != "optimal":
        raise VerificationError(f"primal optimal but dual LP returned {dual.status}")
    gap = abs(sol.r_star - dual.objective)
    if check_gap and gap > gap_tol * max(1.0, abs(sol.r_star)):
        raise VerificationError(f"duality gap {gap:.3g} exceeds tolerance (R*={sol.r_star:.12g}, dual={dual.objective:.12g})")
    sol.alpha, sol.beta, sol.gamma, sol.omega = _split_nu(dual.nu, problem.n)
    sol.dual_source = "dual_lp"
    sol.dual_objective = dual.objective
    sol.iterations += dual.iterations
    return sol


def optimize(config: ZoneConfig, **kwargs) -> LpSolution:
    return solve(build_lp(config), **kwargs)


def theorem2_value(solution: LpSolution) -> float:
    """Closed-form R* from the customer-row and upper-bound multipliers."""
    cfg = solution.config
    n, lv, p, lc = cfg.n_classes, cfg.lambda_v, cfg.p, cfg.lambda_c
    terms = [(lv * p[i - 1] - lc[i - 1]) * solution.alpha[i - 1] for i in range(1, n + 1)]
    terms.extend(solution.gamma[:n])
    return math.fsum(terms)
