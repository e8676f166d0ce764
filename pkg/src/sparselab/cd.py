"""Coordinate-descent solvers on (1/(2n)) * RSS + penalty.

All solvers work on standardized data through the Gram matrix (1/n) X^T X and
the correlation vector (1/n) X^T y, so one sweep costs O(p^2) regardless of n.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numba import njit
from scipy.stats import norm

from .errors import (
    DegenerateSigma,
    InvalidPenalty,
    NotStandardized,
    RankDeficient,
    SupportTooLarge,
)
from .linalg import CoefVector, Dataset, ols_refit
from .penalties import DEFAULT_SCAD_A, PenaltySpec, penalty_value, scad_value
from .scenarios import RngStream

CD_TOL = 1e-9
CD_MAX_SWEEPS = 100_000
POLISH_EVERY = 10
PATH_DEV_MAX = 0.999
PATH_DEV_STEP = 1e-5
SIGMA_TOL = 1e-8
SIGMA_MAX_OUTER = 100
SIGMA_FLOOR = 1e-12
DEFAULT_PHI_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)

_SOLVER_KINDS = ("lasso", "ridge", "enet", "scad", "adaptive_lasso")


class MaxIterExceeded(UserWarning):
    """Coordinate descent hit its sweep cap; the returned iterate is not converged."""


@dataclass(frozen=True)
class Controls:
    tol: float = CD_TOL
    max_sweeps: int = CD_MAX_SWEEPS
    debug: bool = False


@dataclass(frozen=True)
class SolveResult:
    coef: CoefVector
    lam: float
    objective: float
    iterations: int
    converged: bool
    sigma_hat: Optional[float] = None
    phi: Optional[float] = None
    flags: dict = field(default_factory=dict)

    @property
    def support(self) -> tuple:
        return self.coef.support


# ---------------------------------------------------------------------------
# kernels

@njit(cache=True)
def _scad_update(z, lam, a, v):
    # argmin_b v/2 b^2 - z b + SCAD(b; lam, a), valid while v > 1/(a-1)
    az = abs(z)
    s = 1.0 if z > 0 else -1.0
    if az <= lam:
        return 0.0
    if az <= lam * (1.0 + v):
        return s * (az - lam) / v
    if az <= a * lam * v:
        return s * (az - a * lam / (a - 1.0)) / (v - 1.0 / (a - 1.0))
    return z / v


@njit(cache=True)
def _sweep(G, grad, beta, l1, l2, scad, a, only_active):
    p = beta.shape[0]
    dmax = 0.0
    for j in range(p):
        old = beta[j]
        if only_active and old == 0.0:
            continue
        gjj = G[j, j]
        z = grad[j] + gjj * old
        if scad:
            new = _scad_update(z, l1[j], a, gjj)
        else:
            mag = abs(z) - l1[j]
            if mag > 0.0:
                new = (mag if z > 0 else -mag) / (gjj + 2.0 * l2[j])
            else:
                new = 0.0
        if new != old:
            d = new - old
            for k in range(p):
                grad[k] -= G[k, j] * d
            beta[j] = new
            if abs(d) > dmax:
                dmax = abs(d)
    return dmax


@njit(cache=True)
def _chol_solve_inplace(M, b):
    # returns False when M is not numerically positive definite
    k = M.shape[0]
    L = np.zeros((k, k))
    top = 0.0
    for i in range(k):
        if M[i, i] > top:
            top = M[i, i]
    for i in range(k):
        for j in range(i + 1):
            s = M[i, j]
            for r in range(j):
                s -= L[i, r] * L[j, r]
            if i == j:
                if s <= 1e-10 * top:
                    return False
                L[i, i] = np.sqrt(s)
            else:
                L[i, j] = s / L[j, j]
    for i in range(k):
        s = b[i]
        for r in range(i):
            s -= L[i, r] * b[r]
        b[i] = s / L[i, i]
    for i in range(k - 1, -1, -1):
        s = b[i]
        for r in range(i + 1, k):
            s -= L[r, i] * b[r]
        b[i] = s / L[i, i]
    return True


@njit(cache=True)
def _polish(G, c, grad, beta, l1, l2):
    # exact minimizer on the current active set and signs; kept only if signs agree
    p = beta.shape[0]
    k = 0
    for j in range(p):
        if beta[j] != 0.0:
            k += 1
    if k == 0:
        return
    idx = np.empty(k, dtype=np.int64)
    k = 0
    for j in range(p):
        if beta[j] != 0.0:
            idx[k] = j
            k += 1
    M = np.empty((k, k))
    rhs = np.empty(k)
    for a in range(k):
        ja = idx[a]
        for b in range(k):
            M[a, b] = G[ja, idx[b]]
        M[a, a] += 2.0 * l2[ja]
        rhs[a] = c[ja] - (l1[ja] if beta[ja] > 0 else -l1[ja])
    if not _chol_solve_inplace(M, rhs):
        return
    for a in range(k):
        if rhs[a] * beta[idx[a]] <= 0.0:
            return
    for a in range(k):
        beta[idx[a]] = rhs[a]
    for i in range(p):
        s = c[i]
        for a in range(k):
            s -= G[i, idx[a]] * rhs[a]
        grad[i] = s


@njit(cache=True)
def _cd_kernel(G, c, beta, l1, l2, scad, a, tol, max_sweeps):
    p = beta.shape[0]
    grad = c.copy()
    for j in range(p):
        if beta[j] != 0.0:
            for k in range(p):
                grad[k] -= G[k, j] * beta[j]
    sweeps = 0
    while sweeps < max_sweeps:
        dmax = _sweep(G, grad, beta, l1, l2, scad, a, False)
        sweeps += 1
        if dmax < tol:
            return sweeps, True
        inner = 0
        while sweeps < max_sweeps:
            dmax = _sweep(G, grad, beta, l1, l2, scad, a, True)
            sweeps += 1
            inner += 1
            if dmax < tol:
                break
            if not scad and inner % POLISH_EVERY == 0:
                _polish(G, c, grad, beta, l1, l2)
    return sweeps, False


@njit(cache=True)
def _path_kernel(G, c, tss, lams, w1, w2, scad, a, tol, max_sweeps, dev_max, dev_step):
    # tss = y^T y / n; the path stops early once the explained deviance saturates
    p = c.shape[0]
    out = np.zeros((lams.shape[0], p))
    iters = np.zeros(lams.shape[0], dtype=np.int64)
    conv = np.ones(lams.shape[0], dtype=np.bool_)
    beta = np.zeros(p)
    prev = 0.0
    fitted = lams.shape[0]
    for i in range(lams.shape[0]):
        l1 = lams[i] * w1
        l2 = lams[i] * w2
        it, ok = _cd_kernel(G, c, beta, l1, l2, scad, a, tol, max_sweeps)
        out[i] = beta
        iters[i] = it
        conv[i] = ok
        if tss > 0.0:
            quad = 0.0
            lin = 0.0
            for j in range(p):
                if beta[j] != 0.0:
                    lin += c[j] * beta[j]
                    for k in range(p):
                        quad += beta[j] * G[j, k] * beta[k]
            dev = 1.0 - (tss - 2.0 * lin + quad) / tss
            if dev >= dev_max or (i > 0 and dev - prev < dev_step * dev):
                fitted = i + 1
                for r in range(i + 1, lams.shape[0]):
                    out[r] = beta
                break
            prev = dev
    return out, iters, conv, fitted


# ---------------------------------------------------------------------------
# helpers

def _require_standardized(data: Dataset):
    if not data.standardized:
        raise NotStandardized("solver requires a standardized dataset")


def gram_parts(data: Dataset):
    n = data.n
    x = data.x
    G = x.T @ x / n
    G = 0.5 * (G + G.T)
    c = x.T @ data.y / n
    return np.ascontiguousarray(G), np.ascontiguousarray(c)


def _penalty_vectors(penalty: PenaltySpec, p: int):
    """Per-coordinate unit-lambda weights (l1, l2) and the SCAD switch."""
    ones = np.ones(p)
    kind = penalty.kind
    if kind == "lasso":
        return ones, np.zeros(p), False
    if kind == "ridge":
        return np.zeros(p), ones, False
    if kind == "enet":
        return penalty.alpha * ones, (1 - penalty.alpha) * ones, False
    if kind == "scad":
        return ones, np.zeros(p), True
    if kind == "adaptive_lasso":
        w = np.asarray(penalty.weights, dtype=float)
        if w.shape != (p,):
            raise InvalidPenalty(f"expected {p} adaptive weights, got {w.shape}")
        return w.copy(), np.zeros(p), False
    raise InvalidPenalty(f"coordinate descent does not handle kind {penalty.kind!r}")


def penalty_total(penalty: PenaltySpec, beta: np.ndarray) -> float:
    kind = penalty.kind
    if kind == "adaptive_lasso":
        w = np.asarray(penalty.weights)
        nz = beta != 0.0
        return float(penalty.lam * np.sum(w[nz] * np.abs(beta[nz])))
    if kind == "scad":
        return float(np.sum(scad_value(beta, penalty.lam, penalty.scad_param)))
    return float(np.sum(penalty_value(penalty, beta)))


def objective(data: Dataset, beta: np.ndarray, penalty: PenaltySpec) -> float:
    """Exact penalized objective (1/(2n)) ||y - X beta||^2 + p_lambda(beta)."""
    r = data.y - data.x @ beta
    return float(r @ r / (2 * data.n) + penalty_total(penalty, beta))


def lambda_max(data: Dataset, penalty_kind: str = "lasso", *, weights=None,
               alpha: Optional[float] = None) -> float:
    """Smallest lambda at which the null model solves the problem."""
    c = np.abs(data.x.T @ data.y) / data.n
    if penalty_kind == "adaptive_lasso" and weights is not None:
        w = np.asarray(weights, dtype=float)
        ok = w > 0
        c = np.where(ok & np.isfinite(w), c / np.where(ok, w, 1.0), 0.0)
    out = float(np.max(c)) if c.size else 0.0
    if penalty_kind == "enet" and alpha:
        out /= alpha
    return out


def lambda_path(data: Dataset, penalty_kind: str = "lasso", n_lambda: int = 100,
                eps_ratio: Optional[float] = None, *, weights=None,
                alpha: Optional[float] = None) -> np.ndarray:
    """Descending geometric grid from lambda_max to eps_ratio * lambda_max."""
    _require_standardized(data)
    if eps_ratio is None:
        eps_ratio = 1e-2 if data.p > data.n else 1e-4
    top = lambda_max(data, penalty_kind, weights=weights, alpha=alpha)
    if n_lambda == 1:
        return np.array([top])
    expo = np.arange(n_lambda) / (n_lambda - 1)
    return top * eps_ratio ** expo


# ---------------------------------------------------------------------------
# single fits

def cd_fit(data: Dataset, penalty: PenaltySpec, warm_start: Optional[CoefVector] = None,
           controls: Controls = Controls()) -> SolveResult:
    """Cyclic coordinate descent for lasso, ridge, enet, SCAD and weighted lasso."""
    _require_standardized(data)
    if penalty.kind not in _SOLVER_KINDS:
        raise InvalidPenalty(f"cd_fit does not solve kind {penalty.kind!r}")
    G, c = gram_parts(data)
    p = data.p
    w1, w2, scad = _penalty_vectors(penalty, p)
    l1 = penalty.lam * w1
    l2 = penalty.lam * w2
    a = penalty.scad_param
    beta = np.zeros(p) if warm_start is None else np.array(warm_start.beta, dtype=float)
    if controls.debug:
        sweeps, converged = _debug_descent(data, G, c, beta, l1, l2, scad, a, penalty, controls)
    else:
        sweeps, converged = _cd_kernel(G, c, beta, l1, l2, scad, a, controls.tol,
                                       controls.max_sweeps)
    if not converged:
        warnings.warn(f"coordinate descent stopped after {sweeps} sweeps", MaxIterExceeded)
    coef = CoefVector.from_beta(beta, data)
    return SolveResult(coef, float(penalty.lam), objective(data, beta, penalty), int(sweeps),
                       bool(converged))


def _debug_descent(data, G, c, beta, l1, l2, scad, a, penalty, controls):
    # one full sweep per kernel call so the exact objective can be checked in between
    last = objective(data, beta, penalty)
    convex = penalty.kind != "scad"
    for sweep in range(1, controls.max_sweeps + 1):
        _, done = _cd_kernel(G, c, beta, l1, l2, scad, a, controls.tol, 1)
        now = objective(data, beta, penalty)
        if convex:
            assert now <= last + 1e-12 * max(1.0, abs(last)), (
                f"objective increased on sweep {sweep}: {last!r} -> {now!r}")
        last = now
        if done:
            return sweep, True
    return controls.max_sweeps, False


def cd_path(data: Dataset, penalty: PenaltySpec, lambdas: Sequence[float],
            controls: Controls = Controls(), early_stop: bool = True) -> np.ndarray:
    """Warm-started solutions along `lambdas`; rows are coefficient vectors.

    ``penalty.lam`` is ignored, every other field is used.  With `early_stop`
    the path halts once the explained deviance reaches 0.999 or improves by
    less than 1e-5 (relative) between grid points; later rows repeat the last
    solution.
    """
    _require_standardized(data)
    G, c = gram_parts(data)
    w1, w2, scad = _penalty_vectors(penalty, data.p)
    lams = np.ascontiguousarray(lambdas, dtype=float)
    tss = float(data.y @ data.y / data.n)
    dev_max, dev_step = (PATH_DEV_MAX, PATH_DEV_STEP) if early_stop else (np.inf, -np.inf)
    out, _, conv, _ = _path_kernel(G, c, tss, lams, w1, w2, scad, penalty.scad_param,
                                   controls.tol, controls.max_sweeps, dev_max, dev_step)
    if not np.all(conv):
        warnings.warn("coordinate descent hit its sweep cap along the path", MaxIterExceeded)
    return out


# ---------------------------------------------------------------------------
# path handles consumed by cross-validation

@dataclass
class PenalizedPath:
    """CV handle for a penalty family on a lambda grid built from the full data."""

    kind: str = "lasso"
    n_lambda: int = 100
    eps_ratio: Optional[float] = None
    alpha: Optional[float] = None
    scad_a: Optional[float] = None
    weights: Optional[np.ndarray] = None
    controls: Controls = Controls()

    def spec(self, lam: float = 0.0) -> PenaltySpec:
        extra = {}
        if self.kind == "enet":
            extra["alpha"] = self.alpha
        if self.kind == "scad":
            extra["scad_a"] = self.scad_a or DEFAULT_SCAD_A
        if self.kind == "adaptive_lasso":
            extra["weights"] = self.weights
        return PenaltySpec(self.kind, lam, **extra)

    def grid(self, data: Dataset) -> np.ndarray:
        return lambda_path(data, self.kind, self.n_lambda, self.eps_ratio,
                           weights=self.weights, alpha=self.alpha)

    def fit_path(self, data: Dataset, grid) -> np.ndarray:
        return cd_path(data, self.spec(), np.asarray(grid, dtype=float), self.controls)


def _default_selector(rng):
    from .selection import kfold_cv

    def select(data, handle):
        return kfold_cv(data, handle, k=10, rule="min", rng=rng)
    return select


def cv_penalized_fit(data: Dataset, handle: PenalizedPath, selector=None, rng=0) -> SolveResult:
    selector = selector or _default_selector(rng)
    cv = selector(data, handle)
    grid = np.asarray(cv.lambda_grid)
    idx = cv.chosen_index
    # warm-started path up to the chosen lambda mirrors the CV fits
    path = handle.fit_path(data, grid[: idx + 1])
    spec = handle.spec(float(grid[idx]))
    warm = CoefVector.from_beta(path[idx], data)
    res = cd_fit(data, spec, warm_start=warm, controls=handle.controls)
    res.flags["cv"] = cv
    return res


def lasso_cv_fit(data: Dataset, selector=None, rng=0, **path_kw) -> SolveResult:
    return cv_penalized_fit(data, PenalizedPath("lasso", **path_kw), selector, rng)


def scad_cv_fit(data: Dataset, a: float = DEFAULT_SCAD_A, selector=None, rng=0,
                **path_kw) -> SolveResult:
    return cv_penalized_fit(data, PenalizedPath("scad", scad_a=a, **path_kw), selector, rng)


# ---------------------------------------------------------------------------
# adaptive lasso

def adaptive_weights(pilot: np.ndarray, gamma: float = 1.0) -> np.ndarray:
    pilot = np.abs(np.asarray(pilot, dtype=float))
    with np.errstate(divide="ignore"):
        return np.where(pilot > 0, 1.0 / np.where(pilot > 0, pilot, 1.0) ** gamma, np.inf)


@dataclass
class AdaptivePath(PenalizedPath):
    """Weighted-lasso CV handle whose pilot is re-estimated on every training fold.

    Weights from a full-data pilot would let held-out responses leak into the
    penalty, so each fold computes its own pilot: OLS, or the lasso at the
    fixed `pilot_lambda` when the pilot kind is "lasso".
    """

    kind: str = "adaptive_lasso"
    gamma: float = 1.0
    pilot_kind: str = "ols"
    pilot_lambda: Optional[float] = None

    def pilot(self, data: Dataset) -> Optional[np.ndarray]:
        if self.pilot_kind == "ols":
            try:
                return np.array(ols_refit(data, range(data.p)).beta)
            except (RankDeficient, SupportTooLarge):
                return None
        grid = lambda_path(data, "lasso", self.n_lambda, self.eps_ratio)
        grid = np.append(grid[grid > self.pilot_lambda], self.pilot_lambda)
        return cd_path(data, PenaltySpec("lasso", 0.0), grid, self.controls)[-1]

    def fit_path(self, data: Dataset, grid) -> np.ndarray:
        grid = np.asarray(grid, dtype=float)
        pilot = self.pilot(data)
        if pilot is None:
            return np.full((grid.size, data.p), np.nan)
        w = adaptive_weights(pilot, self.gamma)
        return cd_path(data, PenaltySpec("adaptive_lasso", 0.0, weights=w), grid, self.controls)


def pilot_estimate(data: Dataset, selector=None, rng=0):
    """OLS when n > 1.2 p, otherwise the CV lasso; returns (coefficients, kind, lambda)."""
    if data.n > 1.2 * data.p:
        try:
            return np.array(ols_refit(data, range(data.p)).beta), "ols", None
        except (RankDeficient, SupportTooLarge):
            pass
    res = lasso_cv_fit(data, selector, rng)
    handle = AdaptivePath(pilot_kind="lasso", pilot_lambda=res.lam)
    return handle.pilot(data), "lasso", res.lam


def adaptive_lasso_fit(data: Dataset, gamma: float = 1.0, lambda_selector=None, rng=0,
                       pilot=None) -> SolveResult:
    """Two-stage weighted lasso with weights 1/|pilot|^gamma.

    Without an explicit `pilot`, the pilot is chosen by `pilot_estimate` and
    recomputed inside each CV training fold.  An explicit pilot is held fixed.
    """
    _require_standardized(data)
    if not gamma > 0:
        raise InvalidPenalty("gamma must be positive")
    if pilot is None:
        base = rng if isinstance(rng, RngStream) else RngStream(int(rng), "adaptive")
        pilot, kind, plam = pilot_estimate(data, None, base.child("pilot"))
        rng = base.child("weights")
    else:
        kind, plam = "fixed", None
    pilot = np.asarray(pilot, dtype=float)
    if not np.any(pilot != 0):
        coef = CoefVector.from_beta(np.zeros(data.p), data)
        r = data.y
        return SolveResult(coef, np.inf, float(r @ r / (2 * data.n)), 0, True,
                           flags={"all_pilot_zero": True})
    weights = adaptive_weights(pilot, gamma)
    if kind == "fixed":
        handle = PenalizedPath("adaptive_lasso", weights=weights)
    else:
        handle = AdaptivePath(weights=weights, gamma=gamma, pilot_kind=kind, pilot_lambda=plam)
    res = cv_penalized_fit(data, handle, lambda_selector, rng)
    res.flags["pilot"] = pilot
    res.flags["pilot_kind"] = kind
    return res


# ---------------------------------------------------------------------------
# relaxed lasso

def relaxed_coefficients(data: Dataset, lasso_beta: np.ndarray, lam: float, phi: float,
                         controls: Controls = Controls()) -> Optional[np.ndarray]:
    """Re-solve on the lasso support with penalty phi * lam (phi = 0 is OLS).

    Returns None when the unpenalized refit is not identifiable.
    """
    support = np.flatnonzero(lasso_beta)
    out = np.zeros(data.p)
    if support.size == 0:
        return out
    if phi == 1.0:
        return np.array(lasso_beta, dtype=float)
    if phi == 0.0:
        try:
            return np.array(ols_refit(data, support).beta)
        except (RankDeficient, SupportTooLarge):
            return None
    G, c = gram_parts(data)
    Gs = np.ascontiguousarray(G[np.ix_(support, support)])
    cs = np.ascontiguousarray(c[support])
    beta = np.array(lasso_beta[support], dtype=float)
    k = support.size
    l1 = np.full(k, phi * lam)
    _cd_kernel(Gs, cs, beta, l1, np.zeros(k), False, DEFAULT_SCAD_A, controls.tol,
               controls.max_sweeps)
    out[support] = beta
    return out


@dataclass
class RelaxedPath:
    """CV handle over the (lambda, phi) product grid, lambda-major."""

    phi_grid: tuple = DEFAULT_PHI_GRID
    n_lambda: int = 100
    eps_ratio: Optional[float] = None
    controls: Controls = Controls()

    def grid(self, data: Dataset):
        lams = lambda_path(data, "lasso", self.n_lambda, self.eps_ratio)
        phis = sorted(self.phi_grid, reverse=True)
        return [(float(l), float(f)) for l in lams for f in phis]

    def fit_path(self, data: Dataset, grid) -> np.ndarray:
        lams = []
        for lam, _ in grid:
            if not lams or lams[-1] != lam:
                lams.append(lam)
        path = cd_path(data, PenaltySpec("lasso", 0.0), lams, self.controls)
        row = {lam: i for i, lam in enumerate(lams)}
        out = np.empty((len(grid), data.p))
        for i, (lam, phi) in enumerate(grid):
            b = relaxed_coefficients(data, path[row[lam]], lam, phi, self.controls)
            out[i] = np.nan if b is None else b
        return out


def relaxed_lasso_fit(data: Dataset, phi_grid: Sequence[float] = DEFAULT_PHI_GRID,
                      lambda_selector=None, rng=0, controls: Controls = Controls()) -> SolveResult:
    _require_standardized(data)
    if any(not 0 <= f <= 1 for f in phi_grid):
        raise InvalidPenalty("phi values must lie in [0, 1]")
    handle = RelaxedPath(tuple(phi_grid), controls=controls)
    selector = lambda_selector or _default_selector(rng)
    cv = selector(data, handle)
    lam, phi = cv.lambda_grid[cv.chosen_index], cv.phi_grid[cv.chosen_index]
    lasso = cv_lasso_at(data, cv.lambda_grid, cv.chosen_index, controls)
    beta = relaxed_coefficients(data, lasso, lam, phi, controls)
    spec = PenaltySpec("relaxed_lasso", lam, phi=phi)
    obj = objective(data, beta, PenaltySpec("lasso", phi * lam))
    coef = CoefVector.from_beta(beta, data)
    return SolveResult(coef, float(lam), obj, 0, True, phi=float(phi),
                       flags={"cv": cv, "spec": spec})


def cv_lasso_at(data, grid, index, controls=Controls()) -> np.ndarray:
    lams = []
    for lam in grid[: index + 1]:
        lam = lam[0] if isinstance(lam, tuple) else lam
        if not lams or lams[-1] != lam:
            lams.append(lam)
    return cd_path(data, PenaltySpec("lasso", 0.0), lams, controls)[-1]


# ---------------------------------------------------------------------------
# square-root / scaled lasso

def default_lambda0(variant: str, n: int, p: int) -> float:
    if variant == "sqrt":
        return 1.1 * norm.ppf(1 - 0.05 / (2 * p)) / np.sqrt(n)
    if variant == "scaled":
        return np.sqrt(2 * np.log(p) / n)
    raise ValueError(f"unknown variant {variant!r}")


def sqrt_scaled_lasso_fit(data: Dataset, variant: str = "sqrt", lambda0: Optional[float] = None,
                          controls: Controls = Controls(), sigma_tol: float = SIGMA_TOL,
                          max_outer: int = SIGMA_MAX_OUTER) -> SolveResult:
    """Joint estimate of (beta, sigma) by alternating lasso and noise-scale updates."""
    _require_standardized(data)
    if lambda0 is None:
        lambda0 = default_lambda0(variant, data.n, data.p)
    if not lambda0 > 0:
        raise ValueError("lambda0 must be positive")
    G, c = gram_parts(data)
    p, n = data.p, data.n
    ones, zeros = np.ones(p), np.zeros(p)
    beta = np.zeros(p)
    sigma = float(np.linalg.norm(data.y) / np.sqrt(n))
    if sigma < SIGMA_FLOOR:
        raise DegenerateSigma("response has zero variance")
    total = 0
    converged = False
    for outer in range(1, max_outer + 1):
        lam = lambda0 * sigma
        it, ok = _cd_kernel(G, c, beta, lam * ones, zeros, False, DEFAULT_SCAD_A,
                            controls.tol, controls.max_sweeps)
        total += it
        r = data.y - data.x @ beta
        new = float(np.linalg.norm(r) / np.sqrt(n))
        if new < SIGMA_FLOOR:
            raise DegenerateSigma("noise scale collapsed to zero (perfect interpolation)")
        change = abs(new - sigma)
        sigma = new
        # relative, so the stopping rule is equivariant to rescaling y
        if change < sigma_tol * sigma:
            converged = ok
            break
    # final solve at the fixed-point lambda so the KKT system holds exactly for sigma
    lam = lambda0 * sigma
    it, ok = _cd_kernel(G, c, beta, lam * ones, zeros, False, DEFAULT_SCAD_A,
                        controls.tol, controls.max_sweeps)
    total += it
    coef = CoefVector.from_beta(beta, data)
    kind = "sqrt_lasso" if variant == "sqrt" else "scaled_lasso"
    obj = objective(data, beta, PenaltySpec("lasso", lam))
    return SolveResult(coef, float(lam), obj, total, bool(converged and ok),
                       sigma_hat=sigma, flags={"lambda0": float(lambda0), "kind": kind,
                                               "outer": outer})
