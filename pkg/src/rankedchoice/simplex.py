"""Dense two-phase revised simplex for standard-form linear programs.

Solves min c.z subject to E z = d, z >= 0, returning optimal primal and dual
vectors. Sized for restricted masters with at most a few thousand rows and
columns: the basis inverse is kept explicitly and updated per pivot, with
periodic refactorization. Dantzig pricing by default, switching permanently
to Bland's rule after a run of degenerate pivots to rule out cycling.

Warm starts: callers may hand in a feasible starting basis (e.g. the optimal
basis of the previous master, still feasible after appending columns), which
skips phase 1 entirely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TOL = 1e-9
REFACTOR_EVERY = 200
MAX_PIVOTS = 200_000


class SimplexError(RuntimeError):
    """Numerical failure or iteration-limit hit inside the solver."""


class InfeasibleError(SimplexError):
    """Phase 1 finished with artificial mass left over."""


class UnboundedError(SimplexError):
    """A column prices out attractive with no blocking ratio."""


@dataclass
class LpSolution:
    x: np.ndarray          # primal values, one per column
    duals: np.ndarray      # one multiplier per row
    objective: float
    basis: list[int]       # basic column indices, one per row
    pivots: int


class _Tableau:
    def __init__(self, E: np.ndarray, d: np.ndarray, c: np.ndarray, basis: list[int]):
        self.E = E
        self.d = d
        self.c = c
        self.m = E.shape[0]
        self.basis = list(basis)
        self.binv = np.linalg.inv(E[:, self.basis])
        self.xb = self.binv @ d
        self.pivots = 0
        self.degenerate_streak = 0
        self.bland = False

    def refactor(self) -> None:
        self.binv = np.linalg.inv(self.E[:, self.basis])
        self.xb = self.binv @ self.d

    def duals(self, cost: np.ndarray) -> np.ndarray:
        return cost[self.basis] @ self.binv

    def run(self, cost: np.ndarray, frozen: np.ndarray | None = None) -> None:
        """Pivot to optimality of ``cost``; ``frozen`` columns never enter."""
        m = self.m
        while True:
            if self.pivots >= MAX_PIVOTS:
                raise SimplexError("pivot limit exceeded")
            y = cost[self.basis] @ self.binv
            reduced = cost - y @ self.E
            reduced[self.basis] = 0.0
            if frozen is not None:
                reduced[frozen] = np.inf
            if self.bland:
                candidates = np.flatnonzero(reduced < -TOL)
                if candidates.size == 0:
                    return
                enter = int(candidates[0])
            else:
                enter = int(np.argmin(reduced))
                if reduced[enter] >= -TOL:
                    return
            direction = self.binv @ self.E[:, enter]
            positive = direction > TOL
            if not positive.any():
                raise UnboundedError("objective unbounded below")
            ratios = np.full(m, np.inf)
            ratios[positive] = self.xb[positive] / direction[positive]
            theta = ratios.min()
            rows = np.flatnonzero(ratios <= theta + TOL)
            if self.bland:
                leave = int(min(rows, key=lambda r: self.basis[r]))
            else:
                leave = int(rows[np.argmax(direction[rows])])
            if theta <= TOL:
                self.degenerate_streak += 1
                if self.degenerate_streak > 10 * m:
                    self.bland = True
            else:
                self.degenerate_streak = 0
            # eta update of the inverse and the basic solution
            self.binv[leave] /= direction[leave]
            others = direction.copy()
            others[leave] = 0.0
            self.binv -= np.outer(others, self.binv[leave])
            self.xb -= direction * theta
            self.xb[leave] = theta
            self.basis[leave] = enter
            self.pivots += 1
            if self.pivots % REFACTOR_EVERY == 0:
                self.refactor()
            self.xb = np.maximum(self.xb, 0.0)


def solve_lp(
    E: np.ndarray,
    d: np.ndarray,
    c: np.ndarray,
    basis: list[int] | None = None,
) -> LpSolution:
    """Solve min c.z s.t. E z = d, z >= 0.

    With ``basis`` given (a feasible basis), phase 1 is skipped. Otherwise
    rows are sign-normalized and an artificial identity basis is driven out
    first; rows whose artificial cannot be pivoted out are redundant and are
    dropped (their dual is reported as 0).
    """
    E = np.asarray(E, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    m, ncols = E.shape
    if basis is not None:
        tab = _Tableau(E, d, c, basis)
        if (tab.xb < -1e-7).any():
            raise SimplexError("warm-start basis is not primal feasible")
        tab.xb = np.maximum(tab.xb, 0.0)
        tab.run(c)
        return _extract(tab, c, ncols)

    flip = d < 0
    E2 = E.copy()
    E2[flip] *= -1.0
    d2 = d.copy()
    d2[flip] *= -1.0
    art = np.arange(ncols, ncols + m)
    E_aug = np.hstack([E2, np.eye(m)])
    c_phase1 = np.concatenate([np.zeros(ncols), np.ones(m)])
    tab = _Tableau(E_aug, d2, c_phase1, list(art))
    tab.run(c_phase1)
    if float(c_phase1[tab.basis] @ tab.xb) > 1e-7:
        raise InfeasibleError("no feasible point")

    # pivot leftover artificials out; a row with no real pivot is redundant
    keep_rows = np.ones(m, dtype=bool)
    for r in range(m):
        if tab.basis[r] < ncols:
            continue
        row = tab.binv[r] @ E2
        drove_out = False
        for j in np.flatnonzero(np.abs(row) > 1e-7):
            if j in tab.basis:
                continue
            direction = tab.binv @ E_aug[:, j]
            if abs(direction[r]) > 1e-7:
                piv = direction[r]
                tab.binv[r] /= piv
                for i in range(m):
                    if i != r and direction[i] != 0.0:
                        tab.binv[i] -= direction[i] * tab.binv[r]
                tab.basis[r] = int(j)
                tab.refactor()
                drove_out = True
                break
        if not drove_out:
            keep_rows[r] = False

    if not keep_rows.all():
        rows = np.flatnonzero(keep_rows)
        sub = solve_lp(E2[rows], d2[rows], c,
                       basis=[tab.basis[r] for r in np.flatnonzero(keep_rows)])
        duals = np.zeros(m)
        duals[rows] = sub.duals
        duals[flip] *= -1.0
        return LpSolution(sub.x, duals, sub.objective, sub.basis, tab.pivots + sub.pivots)

    c_phase2 = np.concatenate([c, np.zeros(m)])
    frozen = np.zeros(ncols + m, dtype=bool)
    frozen[art] = True
    tab.run(c_phase2, frozen=frozen)
    sol = _extract(tab, c_phase2, ncols)
    sol.duals[flip] *= -1.0
    return sol


def _extract(tab: _Tableau, cost: np.ndarray, ncols: int) -> LpSolution:
    x = np.zeros(ncols)
    for r, j in enumerate(tab.basis):
        if j < ncols:
            x[j] = max(tab.xb[r], 0.0)
    duals = tab.duals(cost)
    objective = float(cost[tab.basis] @ tab.xb)
    return LpSolution(x, np.asarray(duals), objective, list(tab.basis), tab.pivots)


class IncrementalLp:
    """A standard-form LP that grows column by column, keeping the factorized
    basis alive across solves. Intended for column generation: appending a
    column leaves the current basis feasible, so each re-solve is a handful
    of pivots instead of a refactorization."""

    def __init__(self, E: np.ndarray, d: np.ndarray, c: np.ndarray, basis: list[int]):
        E = np.asarray(E, dtype=np.float64)
        self.m, n = E.shape
        self._cap = max(2 * n, 64)
        self._E = np.zeros((self.m, self._cap))
        self._E[:, :n] = E
        self._c = np.zeros(self._cap)
        self._c[:n] = c
        self.ncols = n
        self.d = np.asarray(d, dtype=np.float64)
        self._tab = _Tableau(self._E[:, :n], self.d, self._c[:n], basis)
        if (self._tab.xb < -1e-7).any():
            raise SimplexError("starting basis is not primal feasible")
        self._tab.xb = np.maximum(self._tab.xb, 0.0)

    def add_column(self, column: np.ndarray, cost: float) -> int:
        """Append a column; returns its index. The current basis is kept."""
        if self.ncols == self._cap:
            self._cap *= 2
            E = np.zeros((self.m, self._cap))
            E[:, :self.ncols] = self._E[:, :self.ncols]
            self._E = E
            c = np.zeros(self._cap)
            c[:self.ncols] = self._c[:self.ncols]
            self._c = c
        j = self.ncols
        self._E[:, j] = column
        self._c[j] = cost
        self.ncols += 1
        return j

    def solve(self) -> LpSolution:
        E = self._E[:, :self.ncols]
        c = self._c[:self.ncols]
        self._tab.E = E
        self._tab.run(c)
        return _extract(self._tab, c, self.ncols)
