"""Dense-tableau, two-phase primal simplex with Bland's anti-cycling rule.

Solves::

    minimize    c @ x
    subject to  A_ub @ x <= b_ub
                A_eq @ x == b_eq
                x >= 0

Multipliers are reported with the Lagrangian sign convention
``L = c @ x + nu @ (A_ub @ x - b_ub) + eta @ (A_eq @ x - b_eq)``, so
inequality duals are non-negative at an optimum.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import SolverError

PIVOT_TOL = 1e-9
ITER_FACTOR = 50


@dataclass
class SimplexResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None = None
    fun: float | None = None
    ineq_duals: np.ndarray | None = None
    eq_duals: np.ndarray | None = None
    iterations: int = 0
    basis: list[int] = field(default_factory=list)


class _Tableau:
    def __init__(self, T: np.ndarray, basis: list[int], max_iter: int, tol: float):
        self.T = T  # rows x (ncols + 1); last column is the rhs
        self.basis = basis
        self.max_iter = max_iter
        self.tol = tol
        self.iterations = 0

    def pivot(self, r: int, j: int, *cost_rows: np.ndarray) -> None:
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        nz = np.nonzero(np.abs(col) > 0.0)[0]
        if nz.size:
            T[nz] -= np.outer(col[nz], T[r])
        for z in cost_rows:
            if z[j] != 0.0:
                z -= z[j] * T[r]
        self.basis[r] = j
        self.iterations += 1

    def reduced_costs(self, c: np.ndarray) -> np.ndarray:
        """Cost row ``[c_j - c_B B^-1 a_j ..., -c_B B^-1 b]`` for the current basis."""
        z = np.append(c, 0.0).astype(float)
        for r, j in enumerate(self.basis):
            if z[j] != 0.0:
                z -= z[j] * self.T[r]
        return z

    def run(self, z: np.ndarray, allowed: np.ndarray, *extra: np.ndarray) -> str:
        """Bland-rule iterations on cost row ``z`` (updated in place)."""
        T = self.T
        while True:
            candidates = np.nonzero(allowed & (z[:-1] < -self.tol))[0]
            if candidates.size == 0:
                return "optimal"
            if self.iterations >= self.max_iter:
                raise SolverError(f"simplex iteration cap {self.max_iter} exceeded")
            j = int(candidates[0])
            col = T[:, j]
            rows = np.nonzero(col > PIVOT_TOL)[0]
            if rows.size == 0:
                return "unbounded"
            ratios = T[rows, -1] / col[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
            r = int(min(ties, key=lambda i: self.basis[i]))
            self.pivot(r, j, z, *extra)


def simplex(
    c,
    A_ub=None,
    b_ub=None,
    A_eq=None,
    b_eq=None,
    *,
    secondary=None,
    tol: float = 1e-9,
    max_iter: int | None = None,
) -> SimplexResult:
    """Solve a standard-form LP; see module docstring.

    ``secondary`` is an optional second cost vector optimized over the optimal
    face of ``c`` (lexicographic tie-break between alternative optima).
    """
    c = np.asarray(c, dtype=float)
    nvar = c.size
    A_ub = np.zeros((0, nvar)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    A_eq = np.zeros((0, nvar)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq
    if A_ub.shape[1] != nvar or A_eq.shape[1] != nvar or b_ub.size != m_ub or b_eq.size != m_eq:
        raise ValueError("inconsistent LP dimensions")

    # standard form [A_ub I; A_eq 0] [x; s] = b
    M = np.zeros((m, nvar + m_ub))
    M[:m_ub, :nvar] = A_ub
    M[:m_ub, nvar:] = np.eye(m_ub)
    M[m_ub:, :nvar] = A_eq
    rhs = np.concatenate([b_ub, b_eq])
    n_std = nvar + m_ub

    sign = np.where(rhs < 0, -1.0, 1.0)
    need_art = [i for i in range(m) if i >= m_ub or sign[i] < 0]
    n_art = len(need_art)
    ncols = n_std + n_art
    T = np.zeros((m, ncols + 1))
    T[:, :n_std] = M * sign[:, None]
    T[:, -1] = rhs * sign
    basis = [0] * m
    for i in range(m_ub):
        basis[i] = nvar + i
    for k, i in enumerate(need_art):
        T[i, n_std + k] = 1.0
        basis[i] = n_std + k

    cap = max_iter if max_iter is not None else ITER_FACTOR * (m + ncols)
    tab = _Tableau(T, basis, cap, tol)

    if n_art:
        c1 = np.zeros(ncols)
        c1[n_std:] = 1.0
        z1 = tab.reduced_costs(c1)
        tab.run(z1, np.ones(ncols, dtype=bool))
        scale = max(1.0, float(np.abs(rhs).max(initial=0.0)))
        if -z1[-1] > 1e-9 * scale:
            return SimplexResult("infeasible", iterations=tab.iterations)
        # drive zero-level artificials out of the basis, dropping redundant rows
        keep = []
        for r in range(tab.T.shape[0]):
            if tab.basis[r] >= n_std:
                nz = np.nonzero(np.abs(tab.T[r, :n_std]) > PIVOT_TOL)[0]
                if nz.size:
                    tab.pivot(r, int(nz[0]))
                    keep.append(r)
            else:
                keep.append(r)
        tab.T = np.hstack([tab.T[keep, :n_std], tab.T[keep, -1:]])
        tab.basis = [tab.basis[r] for r in keep]
        rows_kept = np.array(keep, dtype=int)
    else:
        rows_kept = np.arange(m)

    c_std = np.concatenate([c, np.zeros(m_ub)])
    z = tab.reduced_costs(c_std)
    allowed = np.ones(n_std, dtype=bool)
    z2 = None
    if secondary is not None:
        s_std = np.concatenate([np.asarray(secondary, dtype=float), np.zeros(m_ub)])
        z2 = tab.reduced_costs(s_std)
    status = tab.run(z, allowed, *(() if z2 is None else (z2,)))
    if status != "optimal":
        return SimplexResult(status, iterations=tab.iterations)
    if z2 is not None:
        # only columns with zero primary reduced cost may enter: stays on the optimal face
        face = z[:-1] <= tol
        tab.run(z2, face, z)

    B = M[np.ix_(rows_kept, tab.basis)]
    xb = np.linalg.solve(B, rhs[rows_kept])
    x_std = np.zeros(n_std)
    x_std[tab.basis] = xb
    y_kept = np.linalg.solve(B.T, c_std[tab.basis])
    y = np.zeros(m)
    y[rows_kept] = y_kept
    x = x_std[:nvar]
    return SimplexResult(
        "optimal",
        x=x,
        fun=float(c @ x),
        ineq_duals=-y[:m_ub],
        eq_duals=-y[m_ub:],
        iterations=tab.iterations,
        basis=list(tab.basis),
    )
