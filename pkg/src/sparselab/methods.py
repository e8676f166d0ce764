"""Registry of the selection methods compared by the benchmark.

Every entry is ``fit(data, rng) -> SolveResult`` on a standardized dataset,
where `rng` is an RngStream used for fold assignment or permutations.
"""
from __future__ import annotations

from typing import Callable, Dict

import numpy as np

from .cd import SolveResult, adaptive_lasso_fit, lasso_cv_fit, relaxed_lasso_fit, \
    scad_cv_fit, sqrt_scaled_lasso_fit
from .dantzig import dantzig_cv_fit
from .dcor import DEFAULT_ALPHA, dcvs_select
from .errors import ConfigError
from .linalg import CoefVector, Dataset, ols_refit
from .scenarios import RngStream


def _stream(rng, purpose: str) -> RngStream:
    base = rng if isinstance(rng, RngStream) else RngStream(int(rng), "method")
    return base.child(purpose)


def _seed(rng) -> RngStream:
    return _stream(rng, "folds")


def fit_lasso(data: Dataset, rng=0) -> SolveResult:
    return lasso_cv_fit(data, rng=_seed(rng))


def fit_adaptive(data: Dataset, rng=0) -> SolveResult:
    return adaptive_lasso_fit(data, rng=_seed(rng))


def fit_scad(data: Dataset, rng=0) -> SolveResult:
    return scad_cv_fit(data, rng=_seed(rng))


def fit_dantzig(data: Dataset, rng=0) -> SolveResult:
    return dantzig_cv_fit(data, rng=_seed(rng))


def fit_relaxed(data: Dataset, rng=0) -> SolveResult:
    return relaxed_lasso_fit(data, rng=_seed(rng))


def fit_sqrt(data: Dataset, rng=0) -> SolveResult:
    return sqrt_scaled_lasso_fit(data, "sqrt")


def fit_scaled(data: Dataset, rng=0) -> SolveResult:
    return sqrt_scaled_lasso_fit(data, "scaled")


def fit_dcvs(data: Dataset, rng=0, alpha: float = DEFAULT_ALPHA) -> SolveResult:
    state = dcvs_select(data, alpha=alpha, rng=_stream(rng, "permutations"))
    if state.selected:
        coef = ols_refit(data, state.selected)
    else:
        coef = CoefVector.from_beta(np.zeros(data.p), data)
    r = data.y - data.x @ coef.beta
    return SolveResult(coef, float("nan"), float(r @ r / (2 * data.n)), len(state.history), True,
                       flags={"order": list(state.selected), "history": state.history,
                              "stop": state.stop_reason})


METHODS: Dict[str, Callable] = {
    "lasso": fit_lasso,
    "adapl": fit_adaptive,
    "scad": fit_scad,
    "dant": fit_dantzig,
    "relaxl": fit_relaxed,
    "sqrtl": fit_sqrt,
    "scall": fit_scaled,
    "dcvs": fit_dcvs,
}


def get_method(name: str) -> Callable:
    try:
        return METHODS[name]
    except KeyError:
        raise ConfigError(f"unknown method {name!r}; valid methods: {', '.join(METHODS)}") from None
