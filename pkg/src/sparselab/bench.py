"""Seeded Monte Carlo runner, selection metrics and report emission."""
from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from .errors import UnsupportedFamily
from .linalg import CoefVector, Dataset, standardize
from .methods import get_method
from .scenarios import RngStream, ScenarioSpec, generate_replication, make_scenario
from .selection import screen_then_refit

METRICS = ("tp", "fp", "support_size", "mse", "pct_dev", "fdp", "tpp")
CSV_COLUMNS = ("scenario", "method", "n", "s", "rho", "m", "mean_tp", "se_tp", "mean_fp",
               "se_fp", "mean_support", "mean_mse", "se_mse", "mean_dev", "se_dev", "failures")
TOEPLITZ_RADIUS = {0.5: 4, 0.9: 9}


@dataclass(frozen=True)
class SelectionMetrics:
    tp: int
    fp: int
    support_size: int
    mse: float
    pct_dev: float
    fdp: float
    tpp: float
    flagged: bool = False


def evaluate_fit(fit: CoefVector, data: Dataset, truth, flagged: bool = False) -> SelectionMetrics:
    """In-sample metrics in original response units.

    A fit is flagged when the caller says so (refit fallback) or when the
    support is large enough to interpolate the data.
    """
    y = data.raw_y()
    resid = y - fit.predict(data)
    rss = float(resid @ resid)
    tss = float(np.sum((y - y.mean()) ** 2))
    sel = set(fit.support)
    truth = set(int(j) for j in truth)
    tp = len(sel & truth)
    fp = len(sel) - tp
    size = len(sel)
    flagged = flagged or size >= data.n - 1
    pct_dev = 1.0 - rss / tss if tss > 0 else 0.0
    return SelectionMetrics(tp, fp, size, rss / data.n, pct_dev, fp / max(size, 1),
                            tp / max(len(truth), 1), flagged)


def dataset_hash(data: Dataset) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(data.x).tobytes())
    h.update(np.ascontiguousarray(data.y).tobytes())
    return h.hexdigest()[:16]


# ---------------------------------------------------------------------------
# representative coverage

def representative_coverage(selected, spec: ScenarioSpec, radius: Optional[int] = None) -> np.ndarray:
    """Per true covariate (in position order): did it or a close proxy enter?

    Block designs count any selected column of the same block.  Toeplitz
    designs count a selected column within `radius` whose nearest true
    position is this one (equidistant columns go to the lower position).
    """
    cov = spec.covariance
    truth = np.array(spec.beta_positions)
    sel = np.array(sorted(set(int(k) for k in selected)), dtype=int)
    if cov.family == "identity":
        raise UnsupportedFamily("representative coverage needs a correlated design")
    if sel.size == 0:
        return np.zeros(truth.size, dtype=bool)
    if cov.family == "block":
        period = cov.block_period
        return np.isin(truth % period, sel % period)
    if radius is None:
        radius = toeplitz_radius(cov.rho)
    dist = np.abs(sel[:, None] - truth[None, :])
    owner = np.argmin(dist, axis=1)
    covered = np.zeros(truth.size, dtype=bool)
    for k, j in enumerate(owner):
        if dist[k, j] <= radius:
            covered[j] = True
    return covered


def toeplitz_radius(rho: float) -> int:
    return TOEPLITZ_RADIUS[0.5] if rho <= 0.5 else TOEPLITZ_RADIUS[0.9]


# ---------------------------------------------------------------------------
# Monte Carlo

@dataclass
class MonteCarloReport:
    scenario: dict
    method: str
    m: int
    means: dict
    ses: dict
    selection_frequency: np.ndarray
    representative_coverage: Optional[np.ndarray]
    failures: int = 0
    flagged: int = 0
    failure_messages: list = field(default_factory=list)
    dataset_hashes: list = field(default_factory=list)
    full_recovery: float = float("nan")

    def row(self) -> dict:
        sc = self.scenario
        return {
            "scenario": sc["name"], "method": self.method, "n": sc["n"], "s": sc["s"],
            "rho": sc["rho"], "m": self.m,
            "mean_tp": self.means["tp"], "se_tp": self.ses["tp"],
            "mean_fp": self.means["fp"], "se_fp": self.ses["fp"],
            "mean_support": self.means["support_size"],
            "mean_mse": self.means["mse"], "se_mse": self.ses["mse"],
            "mean_dev": self.means["pct_dev"], "se_dev": self.ses["pct_dev"],
            "failures": self.failures,
        }

    def to_dict(self) -> dict:
        cov = self.representative_coverage
        return {
            "scenario": self.scenario, "method": self.method, "m": self.m,
            "means": self.means, "ses": self.ses,
            "selection_frequency": [float(v) for v in self.selection_frequency],
            "representative_coverage": None if cov is None else [float(v) for v in cov],
            "failures": self.failures, "flagged": self.flagged,
            "failure_messages": list(self.failure_messages),
            "dataset_hashes": list(self.dataset_hashes),
            "full_recovery": self.full_recovery,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MonteCarloReport":
        cov = d["representative_coverage"]
        return cls(d["scenario"], d["method"], d["m"], d["means"], d["ses"],
                   np.array(d["selection_frequency"], dtype=float),
                   None if cov is None else np.array(cov, dtype=float),
                   d["failures"], d["flagged"], list(d["failure_messages"]),
                   list(d["dataset_hashes"]), d.get("full_recovery", float("nan")))


def scenario_summary(spec: ScenarioSpec) -> dict:
    return {"name": spec.name, "n": spec.n, "s": spec.s, "rho": float(spec.rho), "p": spec.p,
            "sigma2": float(spec.sigma2), "target_deviance": float(spec.target_deviance),
            "beta_positions": [j + 1 for j in spec.beta_positions]}


def cell_label(spec: ScenarioSpec) -> str:
    return f"{spec.name}/n={spec.n}/s={spec.s}/rho={spec.rho!r}/p={spec.p}"


def _replicate(args):
    """One replication: every method sees the same standardized dataset."""
    spec, methods, master_seed, r = args
    label = cell_label(spec)
    with threadpool_limits(limits=1):
        raw, _, _ = generate_replication(spec, RngStream(master_seed, f"data/{label}", r))
        data = standardize(raw)
        digest = dataset_hash(data)
        out = {}
        for name in methods:
            stream = RngStream(master_seed, f"fit/{label}/{name}", r)
            try:
                res = screen_then_refit(data, get_method(name), rng=stream)
                metrics = evaluate_fit(res.coef, data, spec.beta_positions, not res.refit)
                out[name] = (metrics, tuple(res.coef.support), None)
            except Exception as exc:  # recorded, never aborts the sweep
                out[name] = (None, (), f"replication {r}: {type(exc).__name__}: {exc}")
    return digest, out


def _mean_se(values: np.ndarray):
    k = values.size
    if k == 0:
        return float("nan"), float("nan")
    mean = float(np.mean(values))
    se = float(np.std(values, ddof=1) / np.sqrt(k)) if k > 1 else 0.0
    return mean, se


def run_monte_carlo(spec: ScenarioSpec, methods: Sequence[str], m: int, master_seed: int = 0,
                    threads: int = 1, progress: Optional[Callable] = None) -> list:
    """Paired Monte Carlo over `m` replications; one report per method.

    Results do not depend on `threads`: every replication draws from its own
    labelled stream and the reduction runs in replication order.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    for name in methods:
        get_method(name)
    jobs = [(spec, tuple(methods), int(master_seed), r) for r in range(m)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_replicate, jobs))
    else:
        results = []
        for job in jobs:
            results.append(_replicate(job))
            if progress:
                progress(job[-1])
    hashes = [h for h, _ in results]
    summary = scenario_summary(spec)
    correlated = spec.covariance.family != "identity"
    reports = []
    for name in methods:
        rows, supports, errors, flagged = [], [], [], 0
        for _, out in results:
            metrics, support, err = out[name]
            if err is not None:
                errors.append(err)
                continue
            rows.append(metrics)
            supports.append(support)
            flagged += metrics.flagged
        table = {k: np.array([getattr(r, k) for r in rows], dtype=float) for k in METRICS}
        means, ses = {}, {}
        for k in METRICS:
            means[k], ses[k] = _mean_se(table[k])
        freq = np.zeros(spec.p)
        cover = np.zeros(spec.s) if correlated else None
        for support in supports:
            freq[list(support)] += 1
            if correlated:
                cover += representative_coverage(support, spec)
        if supports:
            freq /= len(supports)
            if correlated:
                cover /= len(supports)
        # share of successful replications whose support contains every true covariate
        full = float(np.mean(table["tp"] == spec.s)) if rows else float("nan")
        reports.append(MonteCarloReport(summary, name, m, means, ses, freq, cover, len(errors),
                                        flagged, errors, hashes, full))
    return reports


# ---------------------------------------------------------------------------
# emission

def _atomic_write(path: Path, text: str):
    path = Path(path)
    tmp = path.with_name(path.name + ".partial")
    try:
        tmp.write_text(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def report_csv(reports) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for rep in reports:
        row = rep.row()
        lines.append(",".join(_fmt(row[c]) for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def report_json(reports) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=1, sort_keys=True) + "\n"


def load_reports(path) -> list:
    return [MonteCarloReport.from_dict(d) for d in json.loads(Path(path).read_text())]


def emit_report(reports, fmt: str, out) -> Path:
    """Write reports as csv or json to `out` (via a .partial file)."""
    if fmt == "csv":
        text = report_csv(reports)
    elif fmt == "json":
        text = report_json(reports)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    _atomic_write(Path(out), text)
    return Path(out)


def emit_plot_tables(reports, out_dir) -> list:
    """One TSV per (scenario, rho, s, method): n against mean tp and mean fp."""
    groups = {}
    for rep in reports:
        sc = rep.scenario
        key = (sc["name"], sc["rho"], sc["s"], rep.method)
        groups.setdefault(key, []).append(rep)
    paths = []
    for (name, rho, s, method), reps in sorted(groups.items()):
        reps = sorted(reps, key=lambda r: r.scenario["n"])
        lines = ["n\tmean_tp\tmean_fp"]
        for r in reps:
            lines.append(f"{r.scenario['n']}\t{_fmt(r.means['tp'])}\t{_fmt(r.means['fp'])}")
        path = Path(out_dir) / f"stack_{name}_rho{rho:g}_s{s}_{method}.tsv"
        _atomic_write(path, "\n".join(lines) + "\n")
        paths.append(path)
    return paths


def run_grid(scenario: str, n_grid, s: Optional[int], rho: Optional[float], methods, m: int,
             master_seed: int = 0, threads: int = 1, p: int = 100) -> list:
    reports = []
    for n in n_grid:
        spec = make_scenario(scenario, n, s, rho, p=p)
        reports.extend(run_monte_carlo(spec, methods, m, master_seed, threads))
    return reports
