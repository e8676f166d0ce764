"""Tuning-parameter selection, the screen-then-refit pipeline and stability selection."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import RankDeficient, SupportTooLarge, TooFewSamples
from .linalg import CoefVector, Dataset, ols_refit, standardize
from .scenarios import RngStream, as_generator

RULES = ("min", "one_se")


@dataclass(frozen=True)
class CvResult:
    lambda_grid: tuple
    cv_error_mean: np.ndarray
    cv_error_se: np.ndarray
    chosen_index: int
    rule: str = "min"
    phi_grid: Optional[tuple] = None

    @property
    def chosen_lambda(self) -> float:
        return float(self.lambda_grid[self.chosen_index])

    @property
    def chosen_phi(self) -> Optional[float]:
        return None if self.phi_grid is None else float(self.phi_grid[self.chosen_index])


def fold_ids(n: int, k: int, rng) -> np.ndarray:
    """Fold label per sample: a seeded permutation cut into k contiguous blocks."""
    perm = as_generator(rng).permutation(n)
    labels = np.empty(n, dtype=int)
    for f, block in enumerate(np.array_split(perm, k)):
        labels[block] = f
    return labels


def choose_index(mean: np.ndarray, se: np.ndarray, rule: str) -> int:
    """Index on a descending grid; ties resolve toward the larger lambda."""
    if rule not in RULES:
        raise ValueError(f"unknown CV rule {rule!r}")
    best = int(np.argmin(mean))
    if rule == "min":
        return best
    bound = mean[best] + se[best]
    return int(np.flatnonzero(mean <= bound)[0])


def _split_grid(grid):
    if len(grid) and isinstance(grid[0], tuple):
        return tuple(g[0] for g in grid), tuple(g[1] for g in grid)
    return tuple(float(g) for g in grid), None


def kfold_cv(data: Dataset, method, k: int = 10, rule: str = "min", rng=0,
             grid=None) -> CvResult:
    """K-fold cross-validated prediction error on the method's tuning grid.

    `method` supplies ``grid(data)`` and ``fit_path(data, grid)``; the latter
    returns one coefficient row per grid point in the units of the (standardized)
    training data, NaN rows marking infeasible grid points.  Each training fold
    is standardized afresh; predictions are compared in original units.
    """
    if k < 2:
        raise TooFewSamples("k must be at least 2")
    if data.n < 2 * k:
        raise TooFewSamples(f"n = {data.n} is too small for {k} folds")
    if rule not in RULES:
        raise ValueError(f"unknown CV rule {rule!r}")
    if grid is None:
        grid = method.grid(data)
    labels = fold_ids(data.n, k, rng)
    errors = np.empty((k, len(grid)))
    sizes = np.empty(k)
    for f in range(k):
        test = labels == f
        train = standardize(data.subset(np.flatnonzero(~test)))
        held = data.subset(np.flatnonzero(test))
        coefs = method.fit_path(train, grid)
        xt = train.transform_x(held.x)
        pred = xt @ coefs.T + train.y_mean
        resid = held.y[:, None] - pred
        err = np.mean(resid ** 2, axis=0)
        errors[f] = np.where(np.isnan(err), np.inf, err)
        sizes[f] = held.n
    w = sizes / sizes.sum()
    mean = w @ errors
    with np.errstate(invalid="ignore"):
        var = w @ (errors - mean) ** 2 / (k - 1)
    se = np.sqrt(np.where(np.isfinite(var), var, np.inf))
    idx = choose_index(mean, se, rule)
    lams, phis = _split_grid(grid)
    return CvResult(lams, mean, se, idx, rule, phis)


@dataclass
class RefitResult:
    coef: CoefVector
    fit: object
    refit: bool
    reason: str = ""

    @property
    def support(self) -> tuple:
        return self.fit.support


def screen_then_refit(data: Dataset, method, rng=0) -> RefitResult:
    """Run a selector, then refit least squares on its support.

    When the support cannot be refit (too large or collinear) the method's own
    shrunken coefficients are kept and the result is flagged.
    """
    fit = method(data, rng) if callable(method) else method.fit(data, rng)
    support = fit.coef.support
    try:
        coef = ols_refit(data, support)
    except (SupportTooLarge, RankDeficient) as exc:
        return RefitResult(fit.coef, fit, False, f"{type(exc).__name__}: {exc}")
    return RefitResult(coef, fit, True)


@dataclass(frozen=True)
class StabilityProfile:
    selection_frequency: np.ndarray
    n_subsamples: int
    threshold_grid: tuple = ()
    counts: Optional[np.ndarray] = None

    def selected(self, q: float) -> np.ndarray:
        return np.flatnonzero(self.selection_frequency > q)


def stability_selection(data: Dataset, method, n_subsamples: int, threshold: float,
                        rng=0, threshold_grid: Sequence[float] = ()):
    """Selection frequencies over half-size subsamples, thresholded at `threshold`.

    `method(sub, stream)` must return an object with a ``support`` (indices).
    Each subsample gets its own pre-derived stream, so the reduction does not
    depend on processing order.
    """
    if n_subsamples < 2:
        raise ValueError("need at least 2 subsamples")
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    base = rng if isinstance(rng, RngStream) else RngStream(int(rng), "stability")
    half = data.n // 2
    counts = np.zeros(data.p, dtype=np.int64)
    raw = data.to_original()
    for b in range(n_subsamples):
        stream = base.child("subsample", b)
        rows = np.sort(stream.generator().choice(data.n, size=half, replace=False))
        sub = standardize(raw.subset(rows))
        fit = method(sub, base.child("fit", b))
        counts[list(fit.support)] += 1
    freq = counts / n_subsamples
    profile = StabilityProfile(freq, n_subsamples, tuple(threshold_grid), counts)
    chosen = profile.selected(threshold)
    coef = ols_refit(data, chosen)
    return profile, coef
