"""Small dense linear-program solver.

Solves  min c.x  s.t.  A x >= b,  x >= 0  with a two-phase tableau simplex
under Bland's rule (lowest eligible index enters; ratio ties leave by lowest
basis index), which makes every solve deterministic and cycle-free.  The
tableau keeps the artificial block around after phase 1 so the basis inverse
can be read off it; that is what makes appending priced-out columns cheap
for the column-generation callers.

Problems here are tiny (rows = distinct sizes, columns = patterns), so a
dense float64 tableau is the right tool.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DomainError

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-9
GAP_TOL = 1e-7


@dataclass(frozen=True)
class LinearProgram:
    """min c.x  s.t.  A x >= b,  x >= 0."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if A.ndim != 2 or c.ndim != 1 or b.ndim != 1:
            raise DomainError("LP arrays have wrong rank")
        if A.shape != (b.size, c.size):
            raise DomainError(f"LP shape mismatch: A{A.shape} c{c.shape} b{b.shape}")
        if not (np.isfinite(c).all() and np.isfinite(A).all()
                and np.isfinite(b).all()):
            raise DomainError("LP entries must be finite")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)


@dataclass
class LpSolution:
    status: str                 # "optimal" | "infeasible" | "unbounded"
    primal: np.ndarray | None = None
    dual: np.ndarray | None = None
    objective: float | None = None
    dual_objective: float | None = None
    primal_residual: float = 0.0
    duality_gap: float = 0.0


class SimplexTableau:
    """Mutable simplex state for one LP; supports appending columns."""

    def __init__(self, lp: LinearProgram):
        m, n = lp.A.shape
        self.m, self.n_struct = m, n
        self.flip = lp.b < 0
        A = lp.A.copy()
        b = lp.b.copy()
        A[self.flip] *= -1.0
        b[self.flip] *= -1.0
        # columns: [structural | slack/surplus | artificial], rhs last
        S = np.diag(np.where(self.flip, 1.0, -1.0))
        self.T = np.hstack([A, S, np.eye(m), b[:, None]])
        self.costs = np.concatenate([lp.c, np.zeros(2 * m)])
        self.basis = list(range(n + m, n + 2 * m))
        self.b_scale = 1.0 + float(np.abs(lp.b).max()) if m else 1.0
        self.status = None

    # -- column indexing helpers ------------------------------------------
    @property
    def n_total(self) -> int:
        return self.T.shape[1] - 1

    def _is_artificial(self, j: int) -> bool:
        return j >= self.n_struct + self.m

    # -- pivoting ----------------------------------------------------------
    def _pivot(self, row: int, col: int):
        T = self.T
        T[row] /= T[row, col]
        for r in range(T.shape[0]):
            if r != row and T[r, col] != 0.0:
                T[r] -= T[r, col] * T[row]
        self.basis[row] = col

    def _reduced_costs(self, costs: np.ndarray) -> np.ndarray:
        cb = costs[self.basis]
        return costs - cb @ self.T[:, :-1]

    def _run_simplex(self, costs: np.ndarray, allow_artificial: bool) -> str:
        max_iter = 2000 + 200 * (self.m + self.n_total)
        for _ in range(max_iter):
            rc = self._reduced_costs(costs)
            enter = -1
            for j in range(self.n_total):
                if not allow_artificial and self._is_artificial(j):
                    continue
                if rc[j] < -PIVOT_TOL:
                    enter = j
                    break
            if enter < 0:
                return "optimal"
            col = self.T[:, enter]
            rhs = self.T[:, -1]
            leave = -1
            best = np.inf
            for r in range(self.m):
                if col[r] > PIVOT_TOL:
                    ratio = rhs[r] / col[r]
                    if ratio < best - 1e-12 or (
                            abs(ratio - best) <= 1e-12
                            and (leave < 0 or self.basis[r] < self.basis[leave])):
                        best = ratio
                        leave = r
            if leave < 0:
                return "unbounded"
            self._pivot(leave, enter)
        raise ContractError("simplex iteration limit exceeded")

    # -- solving -----------------------------------------------------------
    def solve(self) -> str:
        if self.m == 0:
            self.status = "unbounded" if (self.costs[:self.n_struct] < -PIVOT_TOL).any() \
                else "optimal"
            return self.status
        phase1 = np.zeros(self.n_total)
        phase1[self.n_struct + self.m:] = 1.0
        self._run_simplex(phase1, allow_artificial=True)
        if self.T[:, -1][self._artificial_rows()].sum() > FEAS_TOL * self.b_scale:
            self.status = "infeasible"
            return self.status
        self._evict_artificials()
        self.status = self._run_simplex(self.costs, allow_artificial=False)
        return self.status

    def _artificial_rows(self):
        return [r for r, j in enumerate(self.basis) if self._is_artificial(j)]

    def _evict_artificials(self):
        for r in self._artificial_rows():
            row = self.T[r, :-1]
            pivot_col = -1
            for j in range(self.n_struct + self.m):
                if abs(row[j]) > PIVOT_TOL:
                    pivot_col = j
                    break
            if pivot_col >= 0:
                self._pivot(r, pivot_col)
            # else: redundant row, artificial stays basic at value 0

    def resume(self) -> str:
        """Re-optimize after add_column; basis is still primal feasible."""
        self.status = self._run_simplex(self.costs, allow_artificial=False)
        return self.status

    def add_column(self, column: np.ndarray, cost: float) -> int:
        """Append one structural column (in original row orientation)."""
        col = np.asarray(column, dtype=float).copy()
        if col.shape != (self.m,):
            raise DomainError("column has wrong length")
        col[self.flip] *= -1.0
        binv = self.T[:, self.n_struct + self.m:self.n_struct + 2 * self.m]
        transformed = binv @ col
        pos = self.n_struct
        self.T = np.insert(self.T, pos, transformed, axis=1)
        self.costs = np.insert(self.costs, pos, cost)
        self.basis = [j + 1 if j >= pos else j for j in self.basis]
        self.n_struct += 1
        return pos

    # -- extraction --------------------------------------------------------
    def primal(self) -> np.ndarray:
        x = np.zeros(self.n_total)
        for r, j in enumerate(self.basis):
            x[j] = self.T[r, -1]
        return x[:self.n_struct]

    def dual(self) -> np.ndarray:
        cb = self.costs[self.basis]
        binv = self.T[:, self.n_struct + self.m:self.n_struct + 2 * self.m]
        y = cb @ binv
        return np.where(self.flip, -y, y)

    def objective(self) -> float:
        return float(self.costs[self.basis] @ self.T[:, -1])


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Solve the LP; on optimal also report residuals used by the tests."""
    tab = SimplexTableau(lp)
    status = tab.solve()
    if status != "optimal":
        return LpSolution(status=status)
    x = tab.primal()
    y = tab.dual()
    obj = float(lp.c @ x)
    dual_obj = float(lp.b @ y)
    resid = float(np.maximum(lp.b - lp.A @ x, 0.0).max(initial=0.0))
    resid = max(resid, float(np.maximum(-x, 0.0).max(initial=0.0)))
    return LpSolution(status="optimal", primal=x, dual=y, objective=obj,
                      dual_objective=dual_obj, primal_residual=resid,
                      duality_gap=abs(obj - dual_obj))


def basic_support(solution: LpSolution, tol: float = 1e-9) -> list[int]:
    """Indices of primal variables above tol; at most one per constraint row."""
    if solution.status != "optimal":
        raise ContractError("basic_support requires an optimal solution")
    return [int(i) for i in np.flatnonzero(solution.primal > tol)]
