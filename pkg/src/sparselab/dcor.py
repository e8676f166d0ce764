"""Distance correlation and forward selection driven by it (DC.VS)."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConstantInput, NotStandardized
from .linalg import Dataset, ols_refit
from .scenarios import RngStream

DEFAULT_ALPHA = 0.05
DEFAULT_PERMUTATIONS = 199
_CHUNK = 25


def double_centered(u) -> np.ndarray:
    """|u_i - u_k| with row, column and grand means removed."""
    u = np.asarray(u, dtype=float)
    d = np.abs(u[:, None] - u[None, :])
    row = d.mean(axis=1)
    return d - row[:, None] - row[None, :] + row.mean()


def dcov2(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.mean(a * b))


def dcor(u, v) -> float:
    """Sample distance correlation (V-statistic form), a value in [0, 1]."""
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    if u.size != v.size:
        raise ValueError("inputs must have equal length")
    if u.size < 4:
        raise ValueError("distance correlation needs n >= 4")
    if np.ptp(u) == 0 or np.ptp(v) == 0:
        raise ConstantInput("distance correlation of a constant vector is undefined")
    a = double_centered(u)
    b = double_centered(v)
    vxy = max(dcov2(a, b), 0.0)
    denom = np.sqrt(dcov2(a, a) * dcov2(b, b))
    return float(min(np.sqrt(vxy / denom), 1.0))


@dataclass
class DcorState:
    selected: list = field(default_factory=list)
    residual: np.ndarray = None
    history: list = field(default_factory=list)
    stop_reason: str = ""

    @property
    def support(self) -> tuple:
        return tuple(sorted(self.selected))


class _Scanner:
    """Distance matrices of every column, computed once per dataset."""

    def __init__(self, x: np.ndarray):
        n, p = x.shape
        self.n = n
        self.flat = np.empty((p, n * n))
        self.var = np.empty(p)
        for j in range(p):
            a = double_centered(x[:, j])
            self.flat[j] = a.ravel()
            self.var[j] = dcov2(a, a)
        self.flat32 = self.flat.astype(np.float32)

    def scores(self, b: np.ndarray, cand: np.ndarray) -> np.ndarray:
        vb = dcov2(b, b)
        num = np.maximum(self.flat[cand] @ b.ravel() / b.size, 0.0)
        return np.sqrt(num / np.sqrt(self.var[cand] * vb))

    def null_exceedances(self, b, cand, observed, n_perm, gen, stop_at):
        """Count permutations whose max dcor over candidates reaches `observed`."""
        n = self.n
        vb = dcov2(b, b)
        scale = np.sqrt(self.var[cand] * vb).astype(np.float32)
        sub = self.flat32[cand]
        b32 = b.astype(np.float32)
        count = 0
        done = 0
        while done < n_perm:
            size = min(_CHUNK, n_perm - done)
            batch = np.empty((size, n * n), dtype=np.float32)
            for i in range(size):
                perm = gen.permutation(n)
                batch[i] = b32[perm][:, perm].ravel()
            num = np.maximum(batch @ sub.T / np.float32(n * n), 0)
            best = np.sqrt(num / scale).max(axis=1)
            count += int(np.sum(best >= observed))
            done += size
            if count >= stop_at:
                break
        return count, done


def dcvs_select(data: Dataset, alpha: float = DEFAULT_ALPHA, max_steps: int | None = None,
                n_perm: int = DEFAULT_PERMUTATIONS, rng=0) -> DcorState:
    """Greedy forward selection by distance correlation with the current residual.

    A proposal (the unselected column with the largest dcor, lowest index on
    ties) enters only if the permutation p-value of the maximal dcor over all
    unselected columns is below `alpha`.
    """
    if not data.standardized:
        raise NotStandardized("dcvs_select requires a standardized dataset")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    n, p = data.n, data.p
    limit = min(p, n - 1) if max_steps is None else min(max_steps, p, n - 1)
    base = rng if isinstance(rng, RngStream) else RngStream(int(rng), "dcvs")
    scan = _Scanner(data.x)
    state = DcorState(residual=data.y.copy())
    # smallest exceedance count that already makes p >= alpha
    give_up = max(int(np.ceil(alpha * (n_perm + 1) - 1 - 1e-12)), 0)
    step = 0
    while True:
        if len(state.selected) >= limit:
            state.stop_reason = "max_steps"
            break
        r = state.residual
        if np.ptp(r) <= 1e-12 * max(1.0, np.abs(data.y).max()):
            state.stop_reason = "zero_residual"
            break
        cand = np.array([j for j in range(p) if j not in state.selected], dtype=int)
        b = double_centered(r)
        scores = scan.scores(b, cand)
        best = int(np.argmax(scores))
        j, value = int(cand[best]), float(scores[best])
        gen = base.child("permutation", step).generator()
        count, used = scan.null_exceedances(b, cand, np.float32(value), n_perm, gen,
                                            max(give_up, 1))
        # an early exit leaves a lower bound on the p-value, which already rejects
        pval = (1 + count) / (used + 1)
        accepted = count < give_up
        state.history.append((j, value, pval))
        if not accepted:
            state.stop_reason = "test"
            break
        state.selected.append(j)
        coef = ols_refit(data, state.selected)
        state.residual = data.y - data.x @ coef.beta
        step += 1
    return state
