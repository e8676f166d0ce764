"""Acceptance gate: one printed PASS/FAIL line per criterion.

Stochastic criteria use m = 100 replications with fixed seeds and compare
means against reference values at three standard errors of the mean.
"""
import itertools
import json

import numpy as np
import pytest

from conftest import orthonormal_data, random_data
from sparselab.bench import run_monte_carlo
from sparselab.cd import cd_fit, gram_parts, lambda_max, sqrt_scaled_lasso_fit
from sparselab.cli import main
from sparselab.dantzig import dantzig_fit
from sparselab.diagnostics import effective_covariates, irrepresentable_check
from sparselab.linalg import Dataset
from sparselab.penalties import PenaltySpec, soft_threshold
from sparselab.scenarios import RngStream, make_scenario, sample_gaussian

SEED = 1
M = 100

pytestmark = pytest.mark.acceptance


def report(capsys, k, checks):
    """Print one line for criterion k and fail the test if any check failed."""
    ok = all(passed for passed, _ in checks)
    detail = "; ".join(f"{'ok' if passed else 'MISS'} {text}" for passed, text in checks)
    with capsys.disabled():
        print(f"\ncriterion {k}: {'PASS' if ok else 'FAIL'} | {detail}")
    assert ok, detail


def within(rep, metric, target, k=3.0):
    mean, se = rep.means[metric], rep.ses[metric]
    return abs(mean - target) <= k * se, f"{rep.method} {metric} {mean:.4g} (se {se:.3g}) vs {target}"


_CACHE = {}


def cell(name, n, methods, **kwargs):
    key = (name, n, tuple(methods), tuple(sorted(kwargs.items())))
    if key not in _CACHE:
        spec = make_scenario(name, n, **kwargs)
        _CACHE[key] = {r.method: r for r in run_monte_carlo(spec, methods, M, SEED)}
    return _CACHE[key]


def test_criterion_1_calibration(capsys):
    cases = [(make_scenario("S1", 100, 10), 1.736), (make_scenario("S1", 100, 15), 2.604),
             (make_scenario("S1", 100, 20), 3.472), (make_scenario("S3a", 100, rho=0.5), 1.139),
             (make_scenario("S3b", 100, rho=0.5), 0.278),
             (make_scenario("S3b", 100, rho=0.9), 0.53)]
    checks = [(abs(spec.sigma2 - ref) <= 1e-3, f"{spec.name} s={spec.s} rho={spec.rho}: "
               f"{spec.sigma2:.5f} vs {ref}") for spec, ref in cases]
    report(capsys, 1, checks)


def test_criterion_2_effective_covariates(capsys):
    checks = []
    for rho, level, ref in ((0.9, 0.95, 10), (0.5, 0.90, 12), (0.5, 0.95, 14)):
        sub = make_scenario("S2", 100, 15, rho).sigma_matrix()[:15, :15]
        got = effective_covariates(sub, level)
        checks.append((got == ref, f"rho={rho} level={level}: {got} vs {ref}"))
    report(capsys, 2, checks)


def test_criterion_3_lasso_table(capsys):
    refs = {50: (0.18, 0.989), 100: (0.701, 0.959), 200: (1.164, 0.932)}
    checks = []
    for n, (mse, dev) in refs.items():
        rep = cell("S1", n, ["lasso"], s=10)["lasso"]
        ok, text = within(rep, "mse", mse)
        checks.append((ok, f"n={n} {text}"))
        ok, text = within(rep, "pct_dev", dev)
        checks.append((ok, f"n={n} {text}"))
    report(capsys, 3, checks)


def test_criterion_4_recovery_patterns(capsys):
    checks = []
    for n in (100, 200):
        rep = cell("S1", n, ["lasso"], s=10)["lasso"]
        checks.append((rep.full_recovery >= 0.95, f"S1 n={n} full recovery {rep.full_recovery:.2f}"))
        checks.append((rep.means["fp"] > rep.means["tp"],
                       f"S1 n={n} fp {rep.means['fp']:.2f} > tp {rep.means['tp']:.2f}"))
    for rho in (0.5, 0.9):
        spec = make_scenario("S2", 100, 15, rho)
        eff = effective_covariates(spec.sigma_matrix()[:15, :15], 0.95)
        rep = cell("S2", 100, ["lasso"], s=15, rho=rho)["lasso"]
        size = rep.means["support_size"]
        checks.append((size > eff, f"S2 rho={rho} n=100 support {size:.2f} > effective {eff}"))
    report(capsys, 4, checks)


def test_criterion_5_comparators_s1(capsys):
    reps = cell("S1", 400, ["adapl", "dant", "dcvs"], s=15)
    checks = [within(reps["adapl"], "tp", 15), within(reps["adapl"], "fp", 0),
              within(reps["dant"], "tp", 14.6), within(reps["dant"], "fp", 0),
              within(reps["dcvs"], "tp", 15)]
    fp = reps["dcvs"].means["fp"]
    checks.append((0 <= fp <= 4, f"dcvs fp {fp:.3g} in [0, 4]"))
    for rep in reps.values():
        checks.append((rep.failures == 0, f"{rep.method} failures {rep.failures}"))
    report(capsys, 5, checks)


def test_criterion_6_dependence_s2(capsys):
    reps = cell("S2", 400, ["adapl", "scad", "sqrtl", "dant"], s=15, rho=0.9)
    checks = []
    for name in ("adapl", "scad"):
        size, fp = reps[name].means["support_size"], reps[name].means["fp"]
        checks.append((abs(size - 10) <= 1.5, f"{name} support {size:.2f} in 10 +- 1.5"))
        checks.append((fp < 0.5, f"{name} fp {fp:.2f} < 0.5"))
    size = reps["sqrtl"].means["support_size"]
    checks.append((size >= 90, f"sqrtl support {size:.2f} >= 90"))
    size = reps["dant"].means["support_size"]
    checks.append((size > 55, f"dant support {size:.2f} > 55"))
    report(capsys, 6, checks)


def _kkt(data, beta, lam):
    g = data.x.T @ (data.y - data.x @ beta) / data.n
    act = beta != 0
    worst = np.max(np.abs(g[act] - lam * np.sign(beta[act]))) if act.any() else 0.0
    return max(worst, np.max(np.abs(g[~act])) - lam if (~act).any() else 0.0)


def _enumerate(G, c, lam):
    best, best_obj = None, np.inf
    for signs in itertools.product((-1, 0, 1), repeat=len(c)):
        s = np.array(signs, dtype=float)
        act = s != 0
        beta = np.zeros(len(c))
        if act.any():
            sub = np.linalg.solve(G[np.ix_(act, act)], c[act] - lam * s[act])
            if np.any(np.sign(sub) != s[act]):
                continue
            beta[act] = sub
        if np.any(np.abs((c - G @ beta)[~act]) > lam + 1e-12):
            continue
        obj = 0.5 * beta @ G @ beta - c @ beta + lam * np.abs(beta).sum()
        if obj < best_obj:
            best, best_obj = beta, obj
    return best


def test_criterion_7_solver_correctness(capsys):
    rng = np.random.default_rng(7)
    worst = 0.0
    for i in range(200):
        n, p = int(rng.integers(10, 101)), int(rng.integers(2, 151))
        data = random_data(n, p, seed=1000 + i, s=min(5, p))
        lam = rng.uniform(0.02, 0.9) * lambda_max(data)
        worst = max(worst, _kkt(data, cd_fit(data, PenaltySpec("lasso", lam)).coef.beta, lam))
    checks = [(worst < 1e-6, f"(a) max KKT violation {worst:.2e} over 200 instances")]

    data = orthonormal_data(80, 6, seed=3)
    G, c = gram_parts(data)
    v = G[0, 0]
    err = 0.0
    for lam in (0.05, 0.3, 0.8):
        expected = np.array([soft_threshold(z, lam / v) for z in c / v])
        err = max(err, np.max(np.abs(cd_fit(data, PenaltySpec("lasso", lam)).coef.beta - expected)))
    checks.append((err < 1e-8, f"(b) orthonormal soft-threshold error {err:.2e}"))

    err = 0.0
    for seed in range(12):
        data = random_data(25, 4, seed=seed, s=2, rho=0.6)
        G, c = gram_parts(data)
        for frac in (0.1, 0.4, 0.8):
            lam = frac * lambda_max(data)
            b = cd_fit(data, PenaltySpec("lasso", lam)).coef.beta
            err = max(err, np.max(np.abs(b - _enumerate(G, c, lam))))
    checks.append((err < 1e-6, f"(c) p=4 enumeration error {err:.2e}"))

    gap, err = 0.0, 0.0
    data = random_data(60, 25, seed=4, s=4, rho=0.5)
    for frac in (0.1, 0.4, 0.7):
        gap = max(gap, dantzig_fit(data, frac * lambda_max(data)).flags["gap"])
    ortho = orthonormal_data(60, 8, seed=5)
    for frac in (0.1, 0.5):
        lam = frac * lambda_max(ortho)
        d = dantzig_fit(ortho, lam).coef.beta
        err = max(err, np.max(np.abs(d - cd_fit(ortho, PenaltySpec("lasso", lam)).coef.beta)))
    checks.append((gap < 1e-6 and err < 1e-6,
                   f"(d) Dantzig duality gap {gap:.2e}, orthonormal lasso gap {err:.2e}"))

    err = 0.0
    data = random_data(80, 20, seed=12, s=3)
    scaled = Dataset(data.x, 3.0 * data.y, True, data.column_means, data.column_scales,
                     3.0 * data.y_mean)
    for variant in ("sqrt", "scaled"):
        a = sqrt_scaled_lasso_fit(data, variant)
        b = sqrt_scaled_lasso_fit(scaled, variant)
        err = max(err, np.max(np.abs(b.coef.beta - 3 * a.coef.beta)),
                  abs(b.sigma_hat - 3 * a.sigma_hat))
    checks.append((err < 1e-8, f"(e) sqrt/scaled equivariance error {err:.2e}"))
    report(capsys, 7, checks)


def test_criterion_8_diagnostics(capsys):
    s1 = make_scenario("S1", 100, 10)
    score_id = irrepresentable_check(s1, s1.beta)
    s3a = make_scenario("S3a", 10000, rho=0.5)
    pop = irrepresentable_check(s3a, s3a.beta)
    x = sample_gaussian(s3a.sigma_matrix(), 10000, RngStream(SEED, "acceptance"))
    emp = irrepresentable_check(Dataset(x, np.zeros(10000)), s3a.beta)
    checks = [(score_id == 0.0, f"identity score {score_id}"),
              (pop < 1, f"Toeplitz 0.5 score {pop:.4f} < 1"),
              (abs(emp - pop) < 0.05, f"empirical {emp:.4f} vs population {pop:.4f}")]
    report(capsys, 8, checks)


def test_criterion_9_determinism(capsys, tmp_path, monkeypatch):
    args = ["bench", "--scenario", "S2", "--rho", "0.5", "--s", "15", "--n", "40,60",
            "--methods", "lasso,adapl,scad,dant,relaxl,sqrtl,scall,dcvs", "--m", "2",
            "--seed", "42"]
    outputs = {}
    for threads in ("1", "2", "1"):
        monkeypatch.setenv("SPARSELAB_THREADS", threads)
        out = tmp_path / f"run{len(outputs)}"
        main(args + ["--out", str(out)])
        outputs[out] = {p.name: p.read_bytes() for p in sorted(out.iterdir())
                        if p.name != "run-manifest.json"}
    runs = list(outputs.values())
    same = all(r == runs[0] for r in runs[1:])
    methods = {r["method"] for r in json.loads(runs[0]["summary.json"])}
    checks = [(same, f"{len(runs)} runs (threads 1, 2, 1), {len(runs[0])} files each"),
              (len(methods) == 8, f"{len(methods)} methods reported")]
    report(capsys, 9, checks)
