import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sparselab.errors import InvalidA, InvalidPenalty, UnsupportedKind
from sparselab.penalties import (CURVE_COLUMNS, PenaltySpec, penalty_curves, penalty_value,
                                 scad_threshold, scad_value, soft_threshold)


@pytest.mark.parametrize("spec,beta,expected", [
    (PenaltySpec("lasso", 1.0), -2.0, 2.0),
    (PenaltySpec("ridge", 1.0), -2.0, 4.0),
    (PenaltySpec("bridge", 1.0, bridge_q=0.5), 4.0, 2.0),
    (PenaltySpec("enet", 1.0, alpha=0.7), 2.0, 0.7 * 2 + 0.3 * 4),
])
def test_penalty_values(spec, beta, expected):
    assert penalty_value(spec, beta) == pytest.approx(expected)


def test_scad_value_pieces():
    lam, a = 1.0, 3.7
    assert scad_value(0.5, lam, a) == pytest.approx(0.5)
    # continuity at both knots
    assert scad_value(lam, lam, a) == pytest.approx(lam)
    assert scad_value(a * lam, lam, a) == pytest.approx(lam ** 2 * (a + 1) / 2)
    assert scad_value(10.0, lam, a) == pytest.approx(lam ** 2 * (a + 1) / 2)


def test_solver_only_kinds_rejected():
    with pytest.raises(UnsupportedKind):
        penalty_value(PenaltySpec("sqrt_lasso", 1.0), 1.0)


def test_spec_validation():
    with pytest.raises(InvalidPenalty):
        PenaltySpec("lasso", -1.0)
    with pytest.raises(InvalidPenalty):
        PenaltySpec("lasso", 1.0, alpha=0.5)
    with pytest.raises(InvalidPenalty):
        PenaltySpec("enet", 1.0)
    with pytest.raises(InvalidA):
        PenaltySpec("scad", 1.0, scad_a=2.0)
    assert PenaltySpec("scad", 1.0).scad_a == 3.7


def test_soft_threshold():
    assert soft_threshold(3.0, 1.0) == 2.0
    assert soft_threshold(-3.0, 1.0) == -2.0
    assert soft_threshold(0.5, 1.0) == 0.0


@settings(max_examples=200, deadline=None)
@given(st.floats(-6, 6), st.floats(0.05, 2.0), st.floats(2.1, 6.0))
def test_scad_threshold_is_grid_minimizer(z, lam, a):
    grid = np.linspace(-8, 8, 160001)
    obj = 0.5 * (grid - z) ** 2 + scad_value(grid, lam, a)
    best = obj.min()
    b = scad_threshold(z, lam, a)
    value = 0.5 * (b - z) ** 2 + scad_value(b, lam, a)
    assert value <= best + 1e-8


def test_penalty_curves_grid():
    beta, cols = penalty_curves()
    assert beta.size == 601
    assert beta[0] == -3.0 and beta[-1] == 3.0 and beta[300] == 0.0
    assert list(cols) == [name for name, _ in CURVE_COLUMNS]
    assert cols["lasso"][0] == pytest.approx(3.0)
    assert cols["l0.5"][-1] == pytest.approx(np.sqrt(3.0))
