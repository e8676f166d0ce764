import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from sparselab.errors import (AlreadyStandardized, ConstantColumn, NonFinite, NotPositiveDefinite,
                              NotSymmetric, RankDeficient, SupportTooLarge)
from sparselab.linalg import (CoefVector, Dataset, cho_solve, cholesky, ols_refit, read_csv,
                              standardize, sym_eigen, write_csv)


def _spd(rng, k, cond=10.0):
    q, _ = np.linalg.qr(rng.standard_normal((k, k)))
    vals = np.geomspace(1.0, cond, k)
    return (q * vals) @ q.T


def test_standardize_moments():
    rng = np.random.default_rng(0)
    raw = Dataset(rng.normal(5, 3, (40, 6)), rng.normal(2, 1, 40))
    d = standardize(raw)
    assert np.all(np.abs(d.x.mean(axis=0)) < 1e-10)
    np.testing.assert_allclose(d.x.std(axis=0, ddof=1), 1.0, atol=1e-12)
    assert abs(d.y.mean()) < 1e-12
    np.testing.assert_allclose(d.raw_x(), raw.x, atol=1e-12)
    np.testing.assert_allclose(d.raw_y(), raw.y, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (12, 3), elements=st.floats(-1e3, 1e3)),
       st.floats(-100, 100), st.floats(0.01, 100))
def test_standardize_affine_invariant(x, shift, scale):
    if np.any(x.std(axis=0) < 1e-3):
        return
    y = np.arange(12.0)
    a = standardize(Dataset(x, y)).x
    b = standardize(Dataset(x * scale + shift, y)).x
    np.testing.assert_allclose(a, b, atol=1e-8)


def test_standardize_errors():
    x = np.column_stack([np.arange(5.0), np.ones(5)])
    with pytest.raises(ConstantColumn) as err:
        standardize(Dataset(x, np.arange(5.0)))
    assert err.value.column == 1
    d = standardize(Dataset(np.random.default_rng(1).standard_normal((6, 2)), np.arange(6.0)))
    with pytest.raises(AlreadyStandardized):
        standardize(d)
    with pytest.raises(NonFinite):
        Dataset(np.array([[1.0], [np.nan]]), np.zeros(2))


def test_subset_returns_original_units():
    rng = np.random.default_rng(2)
    raw = Dataset(rng.normal(3, 2, (10, 2)), rng.normal(size=10))
    d = standardize(raw)
    sub = d.subset([1, 4, 7])
    np.testing.assert_allclose(sub.x, raw.x[[1, 4, 7]], atol=1e-12)
    np.testing.assert_allclose(sub.y, raw.y[[1, 4, 7]], atol=1e-12)
    assert not sub.standardized


@pytest.mark.parametrize("k", [1, 2, 5, 30])
def test_cholesky_matches_numpy(k):
    a = _spd(np.random.default_rng(k), k)
    f = cholesky(a)
    np.testing.assert_allclose(f.lower, np.linalg.cholesky(a), atol=1e-10)
    np.testing.assert_allclose(f.reconstruct(), a, atol=1e-10)
    b = np.arange(k, dtype=float)
    np.testing.assert_allclose(cho_solve(f.lower, b), np.linalg.solve(a, b), atol=1e-9)


def test_cholesky_rejects_indefinite_and_asymmetric():
    with pytest.raises(NotPositiveDefinite) as err:
        cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert err.value.pivot == 1
    with pytest.raises(NotSymmetric):
        cholesky(np.array([[1.0, 0.5], [0.0, 1.0]]))


@pytest.mark.parametrize("k", [2, 7, 40])
def test_sym_eigen_matches_eigh(k):
    a = _spd(np.random.default_rng(10 + k), k, cond=1e3)
    f = sym_eigen(a)
    np.testing.assert_allclose(f.eigenvalues, np.linalg.eigvalsh(a)[::-1], rtol=1e-9)
    v = f.eigenvectors
    np.testing.assert_allclose(v.T @ v, np.eye(k), atol=1e-9)
    np.testing.assert_allclose(f.reconstruct(), a, atol=1e-9)


def test_sym_eigen_repeated_eigenvalues():
    f = sym_eigen(np.eye(6) * 2.5)
    np.testing.assert_allclose(f.eigenvalues, 2.5)


def test_ols_refit_matches_lstsq():
    rng = np.random.default_rng(3)
    raw = Dataset(rng.normal(1, 2, (50, 7)), rng.normal(size=50))
    d = standardize(raw)
    support = [0, 2, 5]
    coef = ols_refit(d, support)
    design = np.column_stack([np.ones(50), raw.x[:, support]])
    sol = np.linalg.lstsq(design, raw.y, rcond=None)[0]
    np.testing.assert_allclose(coef.original_beta(d)[support], sol[1:], atol=1e-10)
    assert coef.intercept == pytest.approx(sol[0], abs=1e-10)
    np.testing.assert_allclose(coef.predict(d), design @ sol, atol=1e-10)
    assert coef.support == tuple(support)


def test_ols_refit_errors():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((6, 8))
    d = standardize(Dataset(x, rng.standard_normal(6)))
    with pytest.raises(SupportTooLarge):
        ols_refit(d, range(6))
    xc = np.column_stack([x[:, 0], x[:, 0] * 2 + 1, x[:, 1]])
    with pytest.raises(RankDeficient):
        ols_refit(standardize(Dataset(xc, rng.standard_normal(6))), [0, 1])


def test_empty_refit_is_intercept_only():
    d = standardize(Dataset(np.random.default_rng(5).standard_normal((9, 2)), np.arange(9.0)))
    coef = ols_refit(d, [])
    assert coef.support == ()
    np.testing.assert_allclose(coef.predict(d), 4.0)


def test_coefvector_support_is_exact_nonzeros():
    c = CoefVector(np.array([0.0, 1e-300, -0.0, 2.0]), 0.0)
    assert c.support == (1, 3)


def test_csv_round_trip_and_error_location(tmp_path):
    rng = np.random.default_rng(6)
    x, y = rng.standard_normal((5, 3)), rng.standard_normal(5)
    path = tmp_path / "d.csv"
    write_csv(path, x, y, ["a", "b", "c"])
    d = read_csv(path, "y")
    np.testing.assert_array_equal(d.x, x)
    np.testing.assert_array_equal(d.y, y)
    assert d.names == ("a", "b", "c")
    text = path.read_text().splitlines()
    text[3] = text[3].replace(text[3].split(",")[1], "oops", 1)
    path.write_text("\n".join(text) + "\n")
    with pytest.raises(ValueError, match=r"d\.csv:4: column 'b'"):
        read_csv(path, "y")
