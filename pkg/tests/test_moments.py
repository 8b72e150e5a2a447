from __future__ import annotations

import math

import numpy as np
import pytest

from pdduq.distributions import DesignBinding, Exponential, Gaussian, Lognormal, Role, TruncatedGaussian, Weibull
from pdduq.models import PerformanceModel
from pdduq.moments import (
    MomentError,
    build_score_expansion,
    higher_moment,
    higher_moment_sensitivity,
    mean_sensitivity,
    moment_analysis,
    second_moment_sensitivity,
)
from pdduq.orthopoly import marginal_gauss_rule
from pdduq.pdd import PddSurrogate, compute_coefficients


def _identity_surrogate(marginal, m=1):
    return compute_coefficients(PerformanceModel(1, lambda X: X[:, 0]), [marginal], 1, m)


def _sens(sur, binding, m_prime):
    sc = [build_score_expansion(binding, sur.inputs, m_prime)]
    return float(mean_sensitivity(sur, sc)[0]), float(second_moment_sensitivity(sur, sc)[0])


class TestScoreExpansion:
    def test_gaussian_mean(self):
        sc = build_score_expansion(DesignBinding(((0, Role.MEAN),)), [Gaussian(1.0, 2.0)], 3)
        assert sc.s_empty[0] == pytest.approx(0.0, abs=1e-12)
        assert np.allclose(sc.D[0], [0.5, 0.0, 0.0], atol=1e-12)

    def test_gaussian_stdev(self):
        sc = build_score_expansion(DesignBinding(((0, Role.STDEV),)), [Gaussian(1.0, 2.0)], 3)
        assert np.allclose(sc.D[0], [0.0, math.sqrt(2) / 2, 0.0], atol=1e-12)

    def test_exponential_rate(self):
        sc = build_score_expansion(DesignBinding(((0, Role.RATE),)), [Exponential(1.0)], 2)
        assert sc.s_empty[0] == pytest.approx(0.0, abs=1e-12)
        assert sc.D[0][0] == pytest.approx(-1.0, abs=1e-10)

    @pytest.mark.parametrize(
        "marginal,role",
        [
            (Lognormal(2.0, 0.5), Role.MEAN),
            (Lognormal(2.0, 0.5), Role.STDEV),
            (Weibull(1.0, 2.0), Role.SCALE),
            (Weibull(1.0, 2.0), Role.SHAPE),
        ],
    )
    def test_parseval_bound(self, marginal, role):
        sc = build_score_expansion(DesignBinding(((0, role),)), [marginal], 6)
        assert sc.s_empty[0] == pytest.approx(0.0, abs=1e-8)
        r = marginal_gauss_rule(marginal, 40)
        e_s2 = np.sum(r.weights * marginal.log_density_derivative(role, r.nodes) ** 2)
        assert sc.s_empty[0] ** 2 + np.sum(np.square(sc.D[0])) <= e_s2 + 1e-8

    def test_truncated_gaussian_nonzero_constant_allowed(self):
        # support moves with the mean, so the printed kernel need not be zero-mean
        sc = build_score_expansion(DesignBinding(((0, Role.MEAN),)), [TruncatedGaussian(0.0, 1.0, 1.5)], 3)
        assert np.isfinite(sc.s_empty[0])


class TestSensitivityExamples:
    def test_mean_examples(self):
        assert _sens(_identity_surrogate(Gaussian(0.0, 1.0)), DesignBinding(((0, Role.MEAN),)), 1)[0] == pytest.approx(1.0)
        assert _sens(_identity_surrogate(Exponential(1.0)), DesignBinding(((0, Role.RATE),)), 1)[0] == pytest.approx(-1.0)

    def test_constant_is_insensitive(self):
        sur = compute_coefficients(PerformanceModel(1, lambda X: np.full(len(X), 5.0)), [Gaussian(0, 1)], 1, 2)
        assert _sens(sur, DesignBinding(((0, Role.STDEV),)), 2) == pytest.approx((0.0, 0.0), abs=1e-12)

    def test_second_moment_examples(self):
        assert _sens(_identity_surrogate(Gaussian(1.0, 1.0)), DesignBinding(((0, Role.MEAN),)), 1)[1] == pytest.approx(2.0)
        assert _sens(_identity_surrogate(Gaussian(0.0, 2.0)), DesignBinding(((0, Role.STDEV),)), 2)[1] == pytest.approx(4.0)

    def test_basis_mismatch(self):
        sur = _identity_surrogate(Gaussian(0.0, 1.0))
        sc = build_score_expansion(DesignBinding(((0, Role.MEAN),)), [Gaussian(0.0, 2.0)], 1)
        with pytest.raises(MomentError):
            mean_sensitivity(sur, [sc])


class TestHigherMoments:
    def test_examples(self):
        sur = _identity_surrogate(Gaussian(0.0, 1.0))
        assert higher_moment(sur, 4, "I") == pytest.approx(3.0, rel=1e-12)
        assert higher_moment(sur, 3, "II", S_bar=1, m_bar=4) == pytest.approx(0.0, abs=1e-12)
        const = PddSurrogate((Gaussian(),), 1, 1, 1.5, np.array([0.0]))
        assert higher_moment(const, 5, "I") == pytest.approx(1.5**5)

    def test_third_moment_sensitivity_at_zero(self):
        # E[X^3] = mu^3 + 3 mu sigma^2, derivative 3 at mu = 0
        sur = _identity_surrogate(Gaussian(0.0, 1.0))
        b = [DesignBinding(((0, Role.MEAN),))]
        assert higher_moment_sensitivity(sur, 3, b, "I")[0] == pytest.approx(3.0, rel=1e-10)
        assert higher_moment_sensitivity(sur, 3, b, "II", S_bar=1, m_bar=3)[0] == pytest.approx(3.0, rel=1e-10)

    def test_option_ii_matches_option_i(self):
        inputs = [Gaussian(0.2, 0.7), Exponential(1.5), Lognormal(1.0, 0.2)]
        f = PerformanceModel(3, lambda X: X[:, 0] * X[:, 1] + X[:, 2] ** 2 - X[:, 1])
        sur = compute_coefficients(f, inputs, 2, 2)
        b = [DesignBinding(((0, Role.MEAN),)), DesignBinding(((2, Role.STDEV),))]
        one = moment_analysis(sur, b, 4, "I")
        two = moment_analysis(sur, b, 4, "II", S_bar=3, m_bar=8)
        assert np.allclose(one.moments, two.moments, rtol=1e-9)
        assert one.methods == ["analytic", "analytic", "optionI", "optionI"]
        assert one.moments[1] >= one.moments[0] ** 2


POLY_CASES = [
    ([Gaussian(0.4, 1.3), Gaussian(-1.0, 0.5), Gaussian(2.0, 0.8)], [Role.MEAN, Role.STDEV]),
    ([Exponential(1.5), Exponential(0.7), Exponential(2.0)], [Role.RATE]),
    ([Lognormal(2.0, 0.3), Lognormal(1.0, 0.2), Lognormal(3.0, 0.6)], [Role.MEAN, Role.STDEV]),
    ([Weibull(1.2, 2.5), Weibull(2.0, 1.5), Weibull(0.8, 3.0)], [Role.SCALE, Role.SHAPE]),
]


def _poly(X):
    return 1.0 + X[:, 0] ** 2 * X[:, 1] - 2.0 * X[:, 2] + X[:, 1] * X[:, 2] ** 2 + 0.5 * X[:, 0] ** 3


@pytest.mark.parametrize("inputs,roles", POLY_CASES, ids=["gaussian", "exponential", "lognormal", "weibull"])
def test_gradient_against_rebuilt_surrogate(inputs, roles):
    model = PerformanceModel(3, _poly)
    sur = compute_coefficients(model, inputs, 2, 3)
    binds = [DesignBinding(((i, r),)) for i in range(3) for r in roles]
    rep = moment_analysis(sur, binds, Q=2)
    for k, b in enumerate(binds):
        i, role = b.targets[0]
        d = inputs[i].param(role)
        h = 1e-4 * abs(d)
        plus = compute_coefficients(model, b.perturbed(inputs, h), 2, 3)
        minus = compute_coefficients(model, b.perturbed(inputs, -h), 2, 3)
        fd = np.array([plus.mean() - minus.mean(), plus.second_moment() - minus.second_moment()]) / (2 * h)
        scale = np.maximum(np.abs(fd), 1e-3 * np.abs(rep.moments[:2]))
        assert np.all(np.abs(rep.sensitivities[:2, k] - fd) <= 1e-6 * scale), (b, rep.sensitivities[:2, k], fd)


def test_report_csv_layout():
    sur = _identity_surrogate(Gaussian(0.0, 1.0))
    rep = moment_analysis(sur, [DesignBinding(((0, Role.MEAN),), "mu")], Q=3)
    lines = rep.to_csv().split("\r\n")
    assert lines[0] == "order,design_index,value,method"
    assert len(lines) == 1 + 3 * 2 + 1
