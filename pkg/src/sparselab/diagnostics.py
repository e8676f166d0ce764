"""Consistency-condition checks and false-discovery diagnostics along a path."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import EmptySupport, NotPositiveDefinite, SingularGram
from .linalg import CoefVector, Dataset, cho_solve, cholesky, sym_eigen
from .scenarios import CovarianceSpec, ScenarioSpec, build_covariance

LEVELS = (0.90, 0.95)


def _support_and_signs(beta) -> tuple:
    b = np.asarray(beta.beta if isinstance(beta, CoefVector) else beta, dtype=float)
    support = np.flatnonzero(b)
    if support.size == 0:
        raise EmptySupport("diagnostic needs a nonempty support")
    return b, support, np.sign(b[support])


def _gram(source) -> np.ndarray:
    if isinstance(source, Dataset):
        return source.x.T @ source.x / source.n
    if isinstance(source, CovarianceSpec):
        return build_covariance(source)
    if isinstance(source, ScenarioSpec):
        return build_covariance(source.covariance)
    return np.asarray(source, dtype=float)


def irrepresentable_check(gram_source: Union[Dataset, CovarianceSpec, np.ndarray], beta) -> float:
    """max over j outside S of |sign(beta_S)^T C_SS^{-1} C_Sj|.

    C is (1/n) X^T X for a Dataset and Sigma for a covariance description.
    Returns 0 when every covariate is in S.
    """
    b, support, signs = _support_and_signs(beta)
    c = _gram(gram_source)
    if c.shape != (b.size, b.size):
        raise ValueError("gram source and beta disagree on p")
    rest = np.setdiff1d(np.arange(b.size), support)
    if rest.size == 0:
        return 0.0
    try:
        low = cholesky(c[np.ix_(support, support)]).lower
    except NotPositiveDefinite as exc:
        raise SingularGram(f"C_SS is singular: {exc}") from exc
    w = cho_solve(low, signs)
    return float(np.max(np.abs(w @ c[np.ix_(support, rest)])))


def beta_min_margin(beta, s: int, p: int, n: int) -> float:
    """min |beta_j| over the support divided by sqrt(s log p / n)."""
    b, support, _ = _support_and_signs(beta)
    return float(np.min(np.abs(b[support])) / np.sqrt(s * np.log(p) / n))


def consistency_sample_bound(s: int, p: int, n: int) -> bool:
    """n > s log p."""
    if s < 1 or p < 2:
        raise ValueError("need s >= 1 and p >= 2")
    return bool(n > s * np.log(p))


def effective_covariates(sigma_s, level: float) -> int:
    """Number of leading eigenvalues needed to reach `level` of the trace."""
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    vals = np.clip(sym_eigen(sigma_s).eigenvalues, 0.0, None)
    cum = np.cumsum(vals)
    # relative slack so exact-arithmetic ties (e.g. 9 of 10 equal eigenvalues) count as reached
    target = level * cum[-1] * (1 - 1e-12)
    return int(np.searchsorted(cum, target) + 1)


@dataclass(frozen=True)
class DiagnosticsReport:
    irrepresentable_score: float
    irrepresentable_holds: bool
    beta_min_margin: float
    consistency_bound_ok: bool
    effective_covariates_90: int
    effective_covariates_95: int

    def to_dict(self) -> dict:
        return asdict(self)


def diagnose_scenario(spec: ScenarioSpec) -> DiagnosticsReport:
    """Population diagnostics of a simulation design."""
    sigma = build_covariance(spec.covariance)
    idx = list(spec.beta_positions)
    score = irrepresentable_check(sigma, spec.beta)
    sub = sigma[np.ix_(idx, idx)]
    return DiagnosticsReport(
        irrepresentable_score=score,
        irrepresentable_holds=score < 1,
        beta_min_margin=beta_min_margin(spec.beta, spec.s, spec.p, spec.n),
        consistency_bound_ok=consistency_sample_bound(spec.s, spec.p, spec.n),
        effective_covariates_90=effective_covariates(sub, LEVELS[0]),
        effective_covariates_95=effective_covariates(sub, LEVELS[1]),
    )


@dataclass(frozen=True)
class PathRecord:
    lam: float
    false_discoveries: int
    true_discoveries: int
    fdp: float
    tpp: float


@dataclass(frozen=True)
class PathDiagnostics:
    records: tuple

    @property
    def fdp(self) -> np.ndarray:
        return np.array([r.fdp for r in self.records])

    @property
    def tpp(self) -> np.ndarray:
        return np.array([r.tpp for r in self.records])


def fdp_tpp_path(path_fits: Sequence, true_support: Iterable[int], lambdas=None) -> PathDiagnostics:
    """FDP = F/max(|S_hat|, 1) and TPP = T/max(s, 1) at every path point.

    `path_fits` holds SolveResults, CoefVectors, coefficient rows or index sets.
    """
    truth = set(int(j) for j in true_support)
    s = max(len(truth), 1)
    records = []
    for i, fit in enumerate(path_fits):
        if hasattr(fit, "support"):
            sel = set(fit.support)
        elif isinstance(fit, np.ndarray) and fit.dtype.kind == "f":
            sel = set(np.flatnonzero(fit).tolist())
        else:
            sel = set(int(j) for j in fit)
        t = len(sel & truth)
        f = len(sel) - t
        lam = getattr(fit, "lam", None)
        if lambdas is not None:
            lam = lambdas[i]
        records.append(PathRecord(float("nan") if lam is None else float(lam), f, t,
                                  f / max(len(sel), 1), t / s))
    return PathDiagnostics(tuple(records))
