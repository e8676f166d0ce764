"""Dantzig selector through a dense tableau simplex solver.

The LP is  min c^T x  s.t.  A x <= b,  x >= 0.  Phase one uses a single
auxiliary variable (feasible after one pivot on the most violated row);
pricing is Dantzig's largest-coefficient rule until 50 consecutive
non-improving pivots, after which Bland's rule takes over for the rest of the
solve.  Reported primal and dual vectors are recomputed from the final basis,
not read off the tableau, and are checked before being returned.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cd import Controls, SolveResult, gram_parts, lambda_max
from .errors import Infeasible, NoConvergence, NotStandardized, Unbounded
from .linalg import CoefVector, Dataset

PIVOT_TOL = 1e-9
COST_TOL = 1e-9
FEAS_TOL = 1e-9
BLAND_AFTER = 50
SNAP_TOL = 1e-9


class CyclingDetected(UserWarning):
    """Stalling was detected and Bland's rule was switched on."""


@dataclass(frozen=True)
class LinearProgram:
    objective: np.ndarray
    constraint_matrix: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).ravel()
        a = np.atleast_2d(np.asarray(self.constraint_matrix, dtype=float))
        b = np.asarray(self.rhs, dtype=float).ravel()
        if a.shape != (b.size, c.size):
            raise ValueError(f"inconsistent LP dimensions: A {a.shape}, b {b.size}, c {c.size}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise ValueError("LP data must be finite")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "constraint_matrix", a)
        object.__setattr__(self, "rhs", b)


@dataclass
class LPSolution:
    x: np.ndarray
    dual: np.ndarray
    objective: float
    dual_objective: float
    status: str
    pivots: int = 0
    bland: bool = False
    basis: tuple = ()

    @property
    def gap(self) -> float:
        return abs(self.objective - self.dual_objective)


class _Tableau:
    def __init__(self, a, b, with_aux):
        m, nvar = a.shape
        self.m = m
        self.nvar = nvar
        width = nvar + m + (1 if with_aux else 0)
        t = np.zeros((m, width))
        t[:, :nvar] = a
        t[:, nvar:nvar + m] = np.eye(m)
        if with_aux:
            t[:, -1] = -1.0
        self.t = t
        self.rhs = b.astype(float).copy()
        self.basis = np.arange(nvar, nvar + m)
        self.cost = np.zeros(width)
        self.obj = 0.0
        self.pivots = 0
        self.stall = 0
        self.bland = False

    def set_objective(self, cost):
        # reduced costs d = cost - c_B^T T ; obj = c_B^T rhs
        self.cost = cost - cost[self.basis] @ self.t
        self.obj = float(cost[self.basis] @ self.rhs)

    def pivot(self, row, col):
        t = self.t
        piv = t[row, col]
        t[row] /= piv
        self.rhs[row] /= piv
        colv = t[:, col].copy()
        colv[row] = 0.0
        t -= np.outer(colv, t[row])
        self.rhs -= colv * self.rhs[row]
        d = self.cost[col]
        self.cost -= d * t[row]
        self.obj += d * self.rhs[row]
        self.basis[row] = col
        self.pivots += 1

    def entering(self, allowed):
        d = np.where(allowed, self.cost, 0.0)
        cand = np.flatnonzero(d < -COST_TOL)
        if cand.size == 0:
            return None
        if self.bland:
            return int(cand[0])
        return int(cand[np.argmin(d[cand])])

    def leaving(self, col):
        colv = self.t[:, col]
        ok = colv > PIVOT_TOL
        if not np.any(ok):
            return None
        ratios = np.full(self.m, np.inf)
        ratios[ok] = np.maximum(self.rhs[ok], 0.0) / colv[ok]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + 1e-12 * max(1.0, best))
        # smallest basic index among ties (Bland); also a sane default otherwise
        return int(ties[np.argmin(self.basis[ties])])

    def run(self, allowed, max_pivots):
        while True:
            col = self.entering(allowed)
            if col is None:
                return "optimal"
            row = self.leaving(col)
            if row is None:
                return "unbounded"
            before = self.obj
            self.pivot(row, col)
            if self.obj < before - 1e-12 * max(1.0, abs(before)):
                self.stall = 0
            else:
                self.stall += 1
                if self.stall >= BLAND_AFTER and not self.bland:
                    self.bland = True
                    warnings.warn("simplex stalled; switching to Bland's rule", CyclingDetected)
            if self.pivots > max_pivots:
                raise NoConvergence(f"simplex exceeded {max_pivots} pivots")


def simplex_solve(lp: LinearProgram, max_pivots: Optional[int] = None) -> LPSolution:
    """Solve min c^T x s.t. A x <= b, x >= 0; returns primal, duals (<= 0), status."""
    a, b, c = lp.constraint_matrix, lp.rhs, lp.objective
    m, nvar = a.shape
    if max_pivots is None:
        max_pivots = 50 * (m + nvar) + 1000
    need_aux = bool(m) and b.min() < -FEAS_TOL
    tab = _Tableau(a, b, need_aux)
    width = tab.t.shape[1]
    if need_aux:
        aux = width - 1
        cost1 = np.zeros(width)
        cost1[aux] = 1.0
        tab.set_objective(cost1)
        tab.pivot(int(np.argmin(tab.rhs)), aux)
        tab.run(np.ones(width, dtype=bool), max_pivots)
        if tab.obj > 1e-8 * max(1.0, np.abs(b).max()):
            raise Infeasible("linear program has no feasible point")
        rows = np.flatnonzero(tab.basis == aux)
        for row in rows:
            cols = np.flatnonzero(np.abs(tab.t[row, :aux]) > PIVOT_TOL)
            if cols.size:
                tab.pivot(int(row), int(cols[0]))
        allowed = np.ones(width, dtype=bool)
        allowed[aux] = False
        cost2 = np.zeros(width)
        cost2[:nvar] = c
        tab.stall = 0
        tab.set_objective(cost2)
        tab.cost[aux] = 0.0
    else:
        allowed = np.ones(width, dtype=bool)
        cost2 = np.zeros(width)
        cost2[:nvar] = c
        tab.set_objective(cost2)
    status = tab.run(allowed, max_pivots)
    if status == "unbounded":
        raise Unbounded("linear program is unbounded below")
    return _certify(a, b, c, tab)


def _certify(a, b, c, tab) -> LPSolution:
    m, nvar = a.shape
    basis = np.array(tab.basis)
    full = np.hstack([a, np.eye(m)])
    if np.any(basis >= nvar + m):
        raise NoConvergence("auxiliary variable stuck in the basis")
    bmat = full[:, basis]
    cost = np.concatenate([c, np.zeros(m)])
    xb = np.linalg.solve(bmat, b)
    y = np.linalg.solve(bmat.T, cost[basis])
    z = np.zeros(nvar + m)
    z[basis] = xb
    x = np.maximum(z[:nvar], 0.0)
    primal = float(c @ x)
    dual = float(b @ y)
    scale = max(1.0, np.abs(b).max(), np.abs(c).max())
    if np.any(a @ x - b > 1e-7 * scale) or np.any(z < -1e-7 * scale):
        raise NoConvergence("final basis is not primal feasible")
    reduced = c - a.T @ y
    if np.any(reduced < -1e-7 * scale) or np.any(y > 1e-7 * scale):
        raise NoConvergence("final basis is not dual feasible")
    return LPSolution(x, y, primal, dual, "optimal", tab.pivots, tab.bland, tuple(int(i) for i in basis))


def dantzig_lp(data: Dataset, lam: float) -> LinearProgram:
    """min sum(u + v)  s.t.  |(1/n) X^T (y - X(u - v))| <= lam,  u, v >= 0."""
    G, corr = gram_parts(data)
    a = np.block([[G, -G], [-G, G]])
    b = np.concatenate([lam + corr, lam - corr])
    return LinearProgram(np.ones(2 * data.p), a, b)


def dantzig_fit(data: Dataset, lam: float) -> SolveResult:
    if not data.standardized:
        raise NotStandardized("dantzig_fit requires a standardized dataset")
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    p = data.p
    G, corr = gram_parts(data)
    if lam >= np.max(np.abs(corr)):
        beta = np.zeros(p)
        sol = None
    else:
        sol = simplex_solve(dantzig_lp(data, lam))
        beta = sol.x[:p] - sol.x[p:]
        beta[np.abs(beta) < SNAP_TOL] = 0.0
    slack = float(np.max(np.abs(corr - G @ beta)) - lam)
    flags = {"constraint_excess": slack}
    if sol is not None:
        flags.update(gap=sol.gap, dual_objective=sol.dual_objective, pivots=sol.pivots,
                     bland=sol.bland)
    else:
        flags.update(gap=0.0, dual_objective=0.0, pivots=0, bland=False)
    coef = CoefVector.from_beta(beta, data)
    return SolveResult(coef, float(lam), float(np.sum(np.abs(beta))), flags["pivots"], True,
                       flags=flags)


@dataclass
class DantzigPath:
    """CV handle: geometric grid from lambda_max down to min_ratio * lambda_max."""

    n_lambda: int = 5
    min_ratio: float = 0.5

    def grid(self, data: Dataset) -> np.ndarray:
        top = lambda_max(data)
        if self.n_lambda == 1:
            return np.array([top])
        return top * self.min_ratio ** (np.arange(self.n_lambda) / (self.n_lambda - 1))

    def fit_path(self, data: Dataset, grid) -> np.ndarray:
        return np.array([dantzig_fit(data, float(lam)).coef.beta for lam in grid])


def dantzig_cv_fit(data: Dataset, selector=None, rng=0, handle: Optional[DantzigPath] = None):
    from .selection import kfold_cv

    handle = handle or DantzigPath()
    cv = selector(data, handle) if selector else kfold_cv(data, handle, k=10, rule="min", rng=rng)
    res = dantzig_fit(data, cv.chosen_lambda)
    res.flags["cv"] = cv
    return res
