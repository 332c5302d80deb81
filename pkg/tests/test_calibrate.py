import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from protinfer.calibrate import (CalibrationModel, _e_step, em_fit, fit_sigmoid,
                                 negative_log_likelihood, nll_gradient, normalized_score,
                                 sigmoid_probability)
from protinfer.errors import Degenerate, ZeroMaximum

import oracles


def model(A, B):
    return CalibrationModel(A=A, B=B, iterations=0, converged=True, final_nll=0.0)


def test_sigmoid_midpoint():
    assert sigmoid_probability([2.0], model(-1.0, 2.0))[0] == 0.5


def test_sigmoid_saturates_without_overflow():
    p = sigmoid_probability([20.0, 1e6], model(-1.0, 0.0))
    assert p[0] == pytest.approx(1 - 2.06e-9, rel=0, abs=1e-11)
    assert p[1] == 1.0
    assert sigmoid_probability([-1e6], model(-1.0, 0.0))[0] == 0.0


def test_zero_slope():
    p = sigmoid_probability([0.0, 5.0, 100.0], model(0.0, 1.5))
    assert np.all(p == 1 / (1 + math.exp(1.5)))


@pytest.mark.parametrize("r", [0, 1])
def test_nll_at_midpoint(r):
    assert negative_log_likelihood([3.0], [r], -1.0, 3.0) == pytest.approx(math.log(2))


def test_nll_vanishes_for_confident_correct_labels():
    assert negative_log_likelihood([0.0, 10.0], [0, 1], -50.0, 250.0) < 1e-100


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=1, max_size=20), st.data())
def test_nll_matches_direct_sum(C, data):
    R = data.draw(st.lists(st.integers(0, 1), min_size=len(C), max_size=len(C)))
    A = data.draw(st.floats(-5, 5))
    B = data.draw(st.floats(-20, 20))
    assert negative_log_likelihood(C, R, A, B) == pytest.approx(
        oracles.nll_direct(C, R, A, B), rel=1e-10, abs=1e-12)


def test_gradient_matches_central_differences():
    rng = np.random.default_rng(11)
    for _ in range(100):
        n = int(rng.integers(1, 40))
        C = rng.normal(2.0, 2.0, n)
        R = rng.integers(0, 2, n)
        x = rng.normal(0.0, 1.0, 2)
        g = nll_gradient(C, R, *x)
        fd = oracles.central_difference(lambda v: negative_log_likelihood(C, R, *v), x)
        assert np.abs(g - fd).max() <= 1e-6 * max(np.abs(g).max(), 1e-3)


def test_m_step_does_not_increase_nll():
    rng = np.random.default_rng(12)
    for _ in range(50):
        C = rng.gamma(2.0, 1.0, 20)
        R = rng.integers(0, 2, 20)
        A0, B0 = -0.3, 0.5
        A, B, nll = fit_sigmoid(C, R, A0, B0)
        assert nll <= negative_log_likelihood(C, R, A0, B0) + 1e-12
        assert nll == pytest.approx(negative_log_likelihood(C, R, A, B))


def test_e_step_minimizes_nll_over_labels():
    rng = np.random.default_rng(13)
    for _ in range(50):
        C = rng.normal(0, 3, 8)
        A, B = rng.normal(size=2)
        R = _e_step(C, A, B)
        best = negative_log_likelihood(C, R, A, B)
        for other in range(256):
            alt = np.array([(other >> i) & 1 for i in range(8)])
            assert best <= negative_log_likelihood(C, alt, A, B) + 1e-12


def test_em_two_clusters():
    C = np.array([0, 0, 0, 10, 10, 10], dtype=float)
    fitted, R = em_fit(C)
    assert R.tolist() == [0, 0, 0, 1, 1, 1]
    assert fitted.A < 0
    nll = negative_log_likelihood(C, R, fitted.A, fitted.B)
    assert nll <= oracles.em_grid_oracle(C) + 1e-4


@pytest.mark.parametrize("C", [[3.0, 3.0, 3.0], [0.0], []])
def test_em_degenerate(C):
    with pytest.raises(Degenerate):
        em_fit(C)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 100_000), min_size=2, max_size=30),
       st.floats(0.01, 100), st.floats(-50, 50))
def test_em_ranking_is_affine_invariant(C, alpha, beta):
    # abundances on a 1e-3 grid, so distinct values stay distinct after the map
    C = np.array(C) / 1000.0
    if np.ptp(C) == 0:
        return
    m1, _ = em_fit(C)
    m2, _ = em_fit(alpha * C + beta)
    order1 = np.argsort(-m1.log_odds(C), kind="stable")
    order2 = np.argsort(-m2.log_odds(alpha * C + beta), kind="stable")
    assert np.array_equal(order1, order2)
    assert np.array_equal(order1, np.argsort(-C, kind="stable"))


def test_em_indicators_follow_e_step():
    rng = np.random.default_rng(14)
    for _ in range(30):
        C = np.r_[rng.gamma(1, 1, 10), rng.gamma(5, 2, 10)]
        fitted, R = em_fit(C)
        if fitted.converged:
            assert np.array_equal(R, _e_step(C, fitted.A, fitted.B))


def test_em_first_split_uses_median():
    # the range midpoint (50) would mark only the outlier present; the median is 2.5
    C = np.array([0, 1, 2, 3, 4, 100], dtype=float)
    _, R = em_fit(C)
    assert R.tolist() == [0, 0, 0, 1, 1, 1]


def test_em_median_at_minimum_falls_back_to_midpoint():
    C = np.array([0, 0, 0, 0, 1, 5], dtype=float)
    _, R = em_fit(C)
    assert 0 < R.sum() < len(C)


def test_normalized_score():
    assert normalized_score([2, 4, 8]).tolist() == [0.25, 0.5, 1.0]
    assert normalized_score([3.5]).tolist() == [1.0]
    with pytest.raises(ZeroMaximum):
        normalized_score([0, 0])
