"""Dense kernels and the canonical data containers.

Coefficients are kept in the units of the dataset they were fitted on
(standardized units for standardized data); the intercept is always in the
original response units so predictions on raw covariates are direct.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
from numba import njit

from .errors import (
    AlreadyStandardized,
    ConstantColumn,
    NonFinite,
    NoConvergence,
    NotPositiveDefinite,
    NotSymmetric,
    RankDeficient,
    SupportTooLarge,
)

MEAN_TOL = 1e-10
SD_TOL = 1e-8
CHOLESKY_PIVOT_TOL = 1e-12
OLS_PIVOT_TOL = 1e-10
JACOBI_TOL = 1e-11
JACOBI_MAX_SWEEPS = 100


def _frozen(a) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Dataset:
    """Design matrix (rows are samples) and response."""

    x: np.ndarray
    y: np.ndarray
    standardized: bool = False
    column_means: Optional[np.ndarray] = None
    column_scales: Optional[np.ndarray] = None
    y_mean: float = 0.0
    names: Optional[tuple] = None

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.x, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        n, p = x.shape
        if n < 2 or p < 1:
            raise ValueError(f"need n >= 2 and p >= 1, got n={n}, p={p}")
        if y.shape[0] != n:
            raise ValueError(f"response has length {y.shape[0]}, expected {n}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise NonFinite("dataset contains NaN or Inf entries")
        means = np.zeros(p) if self.column_means is None else self.column_means
        scales = np.ones(p) if self.column_scales is None else self.column_scales
        object.__setattr__(self, "x", _frozen(x))
        object.__setattr__(self, "y", _frozen(y))
        object.__setattr__(self, "column_means", _frozen(means))
        object.__setattr__(self, "column_scales", _frozen(scales))
        object.__setattr__(self, "y_mean", float(self.y_mean))
        if self.names is not None:
            object.__setattr__(self, "names", tuple(self.names))
        if self.standardized:
            if np.any(np.abs(x.mean(axis=0)) >= MEAN_TOL):
                raise ValueError("standardized dataset has a column with nonzero mean")
            if np.any(np.abs(x.std(axis=0, ddof=1) - 1.0) >= SD_TOL):
                raise ValueError("standardized dataset has a column with sd != 1")
            if abs(y.mean()) >= MEAN_TOL * max(1.0, np.abs(y).max()):
                raise ValueError("standardized dataset has a non-centered response")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def subset(self, rows) -> "Dataset":
        """Raw dataset made of the given rows, mapped back to original units."""
        rows = np.asarray(rows)
        x = self.x[rows] * self.column_scales + self.column_means
        y = self.y[rows] + self.y_mean
        return Dataset(x, y, names=self.names)

    def to_original(self) -> "Dataset":
        if not self.standardized:
            return self
        return self.subset(np.arange(self.n))

    def raw_x(self) -> np.ndarray:
        return self.x * self.column_scales + self.column_means

    def raw_y(self) -> np.ndarray:
        return self.y + self.y_mean

    def transform_x(self, x_raw) -> np.ndarray:
        """Map raw covariate rows into this dataset's units."""
        return (np.asarray(x_raw, dtype=float) - self.column_means) / self.column_scales


@dataclass(frozen=True)
class CoefVector:
    beta: np.ndarray
    intercept: float
    support: tuple = field(default=())

    def __post_init__(self):
        beta = _frozen(np.asarray(self.beta, dtype=float).ravel())
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "intercept", float(self.intercept))
        object.__setattr__(self, "support", tuple(int(j) for j in np.flatnonzero(beta != 0.0)))

    @classmethod
    def from_beta(cls, beta, data: Dataset) -> "CoefVector":
        """Attach the original-units intercept implied by `data`."""
        beta = np.asarray(beta, dtype=float)
        if data.standardized:
            intercept = data.y_mean - float(np.dot(beta / data.column_scales, data.column_means))
        else:
            intercept = float(data.y.mean() - data.x.mean(axis=0) @ beta)
        return cls(beta, intercept)

    def original_beta(self, data: Dataset) -> np.ndarray:
        return self.beta / data.column_scales

    def predict(self, data: Dataset, x_raw=None) -> np.ndarray:
        """Predictions in original response units for raw covariate rows."""
        x_raw = data.raw_x() if x_raw is None else np.asarray(x_raw, dtype=float)
        return x_raw @ self.original_beta(data) + self.intercept


@dataclass(frozen=True)
class SymmetricFactorization:
    kind: str
    factors: tuple

    def reconstruct(self) -> np.ndarray:
        if self.kind == "cholesky":
            (low,) = self.factors
            return low @ low.T
        values, vectors = self.factors
        return (vectors * values) @ vectors.T

    @property
    def lower(self) -> np.ndarray:
        return self.factors[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.factors[0]

    @property
    def eigenvectors(self) -> np.ndarray:
        return self.factors[1]


def standardize(raw: Dataset) -> Dataset:
    """Center and scale columns to unit sample sd (n-1), center the response."""
    if raw.standardized:
        raise AlreadyStandardized("dataset is already standardized")
    x, y = raw.x, raw.y
    means = x.mean(axis=0)
    xc = x - means
    scales = xc.std(axis=0, ddof=1)
    for j, (sd, col) in enumerate(zip(scales, xc.T)):
        if sd == 0.0 or np.all(col == 0.0):
            raise ConstantColumn(j)
    xs = xc / scales
    # second centering pass removes the O(eps * |mean|) residue from the first
    xs -= xs.mean(axis=0)
    xs /= xs.std(axis=0, ddof=1)
    y_mean = float(y.mean())
    yc = y - y_mean
    yc -= yc.mean()
    return Dataset(xs, yc, standardized=True, column_means=means,
                   column_scales=scales, y_mean=y_mean, names=raw.names)


def _check_symmetric(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFinite("matrix contains NaN or Inf entries")
    if np.max(np.abs(a - a.T)) > 1e-12 * max(1.0, np.max(np.abs(a))):
        raise NotSymmetric("matrix is not symmetric within 1e-12")
    return a


def cholesky(a, pivot_tol: float = CHOLESKY_PIVOT_TOL) -> SymmetricFactorization:
    a = _check_symmetric(a)
    p = a.shape[0]
    scale = np.max(np.diag(a))
    low = np.zeros_like(a)
    for k in range(p):
        row = low[k, :k]
        d = a[k, k] - row @ row
        if not d > pivot_tol * scale:
            raise NotPositiveDefinite(k)
        low[k, k] = np.sqrt(d)
        if k + 1 < p:
            low[k + 1:, k] = (a[k + 1:, k] - low[k + 1:, :k] @ row) / low[k, k]
    return SymmetricFactorization("cholesky", (low,))


def cho_solve(low: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve (L L^T) x = b by two triangular sweeps."""
    p = low.shape[0]
    z = np.array(b, dtype=float)
    for i in range(p):
        z[i] = (z[i] - low[i, :i] @ z[:i]) / low[i, i]
    for i in range(p - 1, -1, -1):
        z[i] = (z[i] - low[i + 1:, i] @ z[i + 1:]) / low[i, i]
    return z


@njit(cache=True)
def _jacobi_sweeps(a, v, tol, max_sweeps):
    p = a.shape[0]
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(p):
            for j in range(i + 1, p):
                off += 2.0 * a[i, j] * a[i, j]
        if np.sqrt(off) < tol:
            return sweep, True
        for i in range(p - 1):
            for j in range(i + 1, p):
                aij = a[i, j]
                if aij == 0.0:
                    continue
                theta = (a[j, j] - a[i, i]) / (2.0 * aij)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for k in range(p):
                    aki = a[k, i]
                    akj = a[k, j]
                    a[k, i] = c * aki - s * akj
                    a[k, j] = s * aki + c * akj
                for k in range(p):
                    aik = a[i, k]
                    ajk = a[j, k]
                    a[i, k] = c * aik - s * ajk
                    a[j, k] = s * aik + c * ajk
                for k in range(p):
                    vki = v[k, i]
                    vkj = v[k, j]
                    v[k, i] = c * vki - s * vkj
                    v[k, j] = s * vki + c * vkj
    off = 0.0
    for i in range(p):
        for j in range(i + 1, p):
            off += 2.0 * a[i, j] * a[i, j]
    return max_sweeps, np.sqrt(off) < tol


def sym_eigen(a, max_sweeps: int = JACOBI_MAX_SWEEPS) -> SymmetricFactorization:
    """Cyclic Jacobi eigendecomposition, eigenvalues in descending order."""
    a = _check_symmetric(a)
    work = 0.5 * (a + a.T)
    vectors = np.eye(a.shape[0])
    norm = np.linalg.norm(a)
    _, ok = _jacobi_sweeps(work, vectors, JACOBI_TOL * max(norm, np.finfo(float).tiny),
                           max_sweeps)
    if not ok:
        raise NoConvergence(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    values = np.diag(work).copy()
    order = np.argsort(-values, kind="stable")
    return SymmetricFactorization("eigen", (values[order], vectors[:, order]))


def _centered(data: Dataset):
    if data.standardized:
        return data.x, data.y
    return data.x - data.x.mean(axis=0), data.y - data.y.mean()


def ols_refit(data: Dataset, support: Iterable[int]) -> CoefVector:
    """Least squares (with intercept) restricted to the columns in `support`."""
    idx = np.array(sorted(set(int(j) for j in support)), dtype=int)
    beta = np.zeros(data.p)
    if idx.size == 0:
        return CoefVector.from_beta(beta, data)
    if idx.size >= data.n:
        raise SupportTooLarge(f"support size {idx.size} >= n = {data.n}")
    xc, yc = _centered(data)
    xs = xc[:, idx]
    gram = xs.T @ xs / data.n
    rhs = xs.T @ yc / data.n
    try:
        low = cholesky(0.5 * (gram + gram.T), pivot_tol=OLS_PIVOT_TOL).lower
    except NotPositiveDefinite as exc:
        raise RankDeficient(f"selected columns are collinear (pivot {exc.pivot})") from None
    coef = cho_solve(low, rhs)
    # one refinement step keeps residuals orthogonal to ~1e-12 on moderate conditioning
    coef += cho_solve(low, xs.T @ (yc - xs @ coef) / data.n)
    beta[idx] = coef
    return CoefVector.from_beta(beta, data)


def read_csv(path, response: str) -> Dataset:
    """Load a raw Dataset from a CSV file with a header row."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if response not in header:
            raise ValueError(f"{path}: response column {response!r} not in header")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            values = []
            for col, cell in zip(header, row):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ValueError(
                        f"{path}:{lineno}: column {col!r}: cannot parse {cell!r}") from None
            rows.append(values)
    table = np.array(rows, dtype=float)
    r = header.index(response)
    names = tuple(h for i, h in enumerate(header) if i != r)
    x = np.delete(table, r, axis=1)
    return Dataset(x, table[:, r], names=names)


def write_csv(path, x: np.ndarray, y: np.ndarray, names: Sequence[str], response: str = "y"):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(names) + [response])
        for row, yi in zip(x, y):
            w.writerow([repr(float(v)) for v in row] + [repr(float(yi))])
