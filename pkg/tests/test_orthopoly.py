from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdduq.distributions import Exponential, Gaussian, Lognormal, TruncatedGaussian, Uniform, Weibull
from pdduq.orthopoly import (
    MeasureError,
    build_recurrence,
    eval_orthonormal,
    gauss_rule,
    marginal_gauss_rule,
    stieltjes,
    triple_product,
    triple_product_oracle,
)

SIX_KINDS = [
    Gaussian(1.5, 0.4),
    Exponential(2.0),
    Lognormal(3.0, 0.3),
    TruncatedGaussian(0.0, 0.2, 2.0),
    Weibull(1.0, 0.5),
    Uniform(-1.0, 3.0),
]


def test_hermite_recurrence():
    t = build_recurrence(Gaussian(0, 1), 3)
    assert np.allclose(t.alpha, 0.0, atol=1e-14)
    assert np.allclose(t.beta, [1, 1, 2, 3], atol=1e-14)


def test_legendre_and_laguerre_recurrence():
    u = build_recurrence(Uniform(-1, 1), 1)
    assert u.alpha_x[0] == pytest.approx(0.0, abs=1e-14)
    assert u.beta_x[1] == pytest.approx(1 / 3)
    assert build_recurrence(Exponential(1.0), 1).alpha_x[0] == pytest.approx(1.0)


def test_stieltjes_rejects_degenerate_measure():
    with pytest.raises(MeasureError):
        stieltjes(np.array([0.0, 1.0]), np.array([0.5, 0.5]), 4)


def test_eval_orthonormal_examples():
    t = build_recurrence(Gaussian(0, 1), 4)
    assert eval_orthonormal(t, 1, 2.0) == pytest.approx(2.0)
    assert eval_orthonormal(t, 2, 1.0) == pytest.approx(0.0, abs=1e-15)
    assert eval_orthonormal(t, 0, 17.0) == 1.0
    with pytest.raises(ValueError):
        eval_orthonormal(t, 5, 0.0)


def test_gauss_rule_examples():
    r = marginal_gauss_rule(Gaussian(0, 1), 2)
    assert np.allclose(r.nodes, [-1, 1]) and np.allclose(r.weights, [0.5, 0.5])
    r3 = marginal_gauss_rule(Gaussian(0, 1), 3)
    assert np.sum(r3.weights * r3.nodes**4) == pytest.approx(3.0, rel=1e-14)
    r1 = marginal_gauss_rule(Uniform(-1, 1), 1)
    assert np.allclose(r1.nodes, [0.0]) and np.allclose(r1.weights, [1.0])


def test_gauss_rule_size_checked():
    t = build_recurrence(Gaussian(0, 1), 2)
    with pytest.raises(ValueError):
        gauss_rule(t, 4)


@pytest.mark.parametrize("m", SIX_KINDS, ids=lambda m: m.kind)
@pytest.mark.parametrize("n", range(1, 10))
def test_gauss_rule_exactness(m, n):
    r = marginal_gauss_rule(m, n)
    assert r.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(r.nodes) > 0) and np.all(r.weights > 0)
    for k in range(2 * n):
        assert np.sum(r.weights * r.nodes**k) == pytest.approx(m.raw_moment(k), rel=1e-10)


@pytest.mark.parametrize("m", SIX_KINDS, ids=lambda m: m.kind)
@pytest.mark.parametrize("deg", [1, 4, 8])
def test_orthonormality(m, deg):
    t = build_recurrence(m, deg)
    r = gauss_rule(t, deg + 1)
    P = t.evaluate(r.nodes, deg)
    G = (P * r.weights[:, None]).T @ P
    assert np.allclose(G, np.eye(deg + 1), atol=1e-8)
    assert np.all(t.beta > 0)


def test_triple_product_examples():
    h = build_recurrence(Gaussian(0, 1), 8)
    assert triple_product(h, 1, 1, 2) == pytest.approx(math.sqrt(2), rel=1e-12)
    assert triple_product(h, 1, 2, 4) == 0.0
    leg = build_recurrence(Uniform(-1, 1), 8)
    assert triple_product(leg, 1, 1, 2) == pytest.approx(2 / math.sqrt(5), rel=1e-10)


@pytest.mark.parametrize("m", [Gaussian(0, 1), Exponential(1.0), Uniform(-1, 1)], ids=lambda m: m.kind)
def test_closed_forms_match_oracle(m):
    t = build_recurrence(m, 16)
    for j in itertools.combinations_with_replacement(range(9), 3):
        assert triple_product(t, *j) == pytest.approx(triple_product_oracle(t, *j), abs=1e-9, rel=1e-9)


@given(j=st.tuples(*[st.integers(0, 5)] * 3), k=st.sampled_from(range(len(SIX_KINDS))))
@settings(max_examples=60, deadline=None)
def test_triple_product_symmetric(j, k):
    t = build_recurrence(SIX_KINDS[k], 10)
    ref = triple_product(t, *j)
    for p in itertools.permutations(j):
        assert triple_product(t, *p) == ref


def test_affine_invariance_of_gaussian_basis():
    # psi_j under N(mu, sigma) is psi_j of the standardized variable
    a = build_recurrence(Gaussian(0, 1), 4)
    b = build_recurrence(Gaussian(5.0, 3.0), 4)
    x = np.linspace(-2, 2, 9)
    assert np.allclose(a.evaluate(x, 4), b.evaluate(5.0 + 3.0 * x, 4), atol=1e-12)
