from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from pdduq.distributions import DesignBinding, Exponential, Gaussian, Role
from pdduq.models import PerformanceModel
from pdduq.moments import moment_analysis
from pdduq.pdd import PddSurrogate, compute_coefficients
from pdduq.reliability import (
    CgfModel,
    DegenerateVarianceError,
    EventSpec,
    SaddlepointError,
    crude_mcs_fd,
    crude_mcs_sf,
    cumulant_sensitivities,
    cumulants_from_moments,
    cumulants_from_raw,
    mcs_cdf,
    mcs_failure_probability,
    mcs_sensitivity,
    saddlepoint_bracket,
    solve_saddlepoint,
    spa_analysis,
    spa_cdf,
    spa_cdf_kappa_gradient,
    spa_failure_probability,
    spa_pdf,
    spa_state,
)

PHI_M3 = 1.349898031630e-3


def _std_normal_surrogate(mu=0.0):
    return compute_coefficients(PerformanceModel(1, lambda X: X[:, 0]), [Gaussian(mu, 1.0)], 1, 1)


class TestCumulants:
    def test_examples(self):
        assert np.allclose(cumulants_from_raw([0, 1, 0, 3]), [0, 1, 0, 0], atol=1e-14)
        assert np.allclose(cumulants_from_raw([1, 2, 6, 24]), [1, 1, 2, 6])
        with pytest.raises(DegenerateVarianceError, match="degenerate response variance"):
            cumulants_from_moments([1.0, 1.0])

    def test_sensitivity_recursion_matches_finite_difference(self):
        rng = np.random.default_rng(4)
        m0 = np.array([0.3, 1.2, 0.9, 4.1])
        dm = rng.normal(size=(4, 3))
        h = 1e-6
        fd = np.stack([(cumulants_from_raw(m0 + h * dm[:, k]) - cumulants_from_raw(m0 - h * dm[:, k])) / (2 * h) for k in range(3)], 1)
        assert np.allclose(cumulant_sensitivities(m0, dm), fd, atol=1e-8)

    def test_cgf_identities(self):
        c = CgfModel(np.array([0.7, 2.0, 0.5, -0.3]))
        assert c.K(0.0) == 0.0 and c.K1(0.0) == 0.7 and c.K2(0.0) == 2.0

    def test_order_above_four_rejected(self):
        with pytest.raises(ValueError):
            CgfModel(np.array([0.0, 1.0, 0.0, 0.0, 0.1]))


class TestBracket:
    def test_case_examples(self):
        b = saddlepoint_bracket(CgfModel(np.array([0.0, 1.0, 1.0, 0.4])))
        assert b.case == 1
        assert b.t_l == pytest.approx((-1 + math.sqrt(0.2)) / 0.4, rel=1e-12)
        assert b.t_l == pytest.approx(-1.3820, abs=1e-4) and math.isinf(b.t_u)
        b6 = saddlepoint_bracket(CgfModel(np.array([0.0, 1.0, 0.0, 0.0])))
        assert b6.case == 6 and math.isinf(b6.t_l) and math.isinf(b6.t_u)
        b7 = saddlepoint_bracket(CgfModel(np.array([0.0, 1.0, -2.0, 0.0])))
        assert b7.case == 7 and b7.t_u == pytest.approx(0.5)

    def test_case3_excluded_point_is_double_root(self):
        # Delta = 0: K''(t) = k4/2 (t + k3/k4)^2 vanishes at -k3/k4
        c = CgfModel(np.array([0.0, 1.0, 2.0, 2.0]))
        b = saddlepoint_bracket(c)
        assert b.case == 3 and b.excluded_point == pytest.approx(-1.0)
        assert c.K2(b.excluded_point) == pytest.approx(0.0, abs=1e-15)
        assert not b.contains(b.excluded_point)

    @given(
        k2=st.floats(0.05, 10.0),
        k3=st.floats(-5.0, 5.0),
        k4=st.floats(-5.0, 5.0),
    )
    @settings(max_examples=300, deadline=None)
    def test_bracket_soundness(self, k2, k3, k4):
        c = CgfModel(np.array([0.0, k2, k3, k4]))
        b = saddlepoint_bracket(c)
        assert b.t_l < 0.0 < b.t_u
        lo = max(b.t_l, -1e3)
        hi = min(b.t_u, 1e3)
        t = np.linspace(lo, hi, 2003)[1:-1]
        t = t[np.abs(t - (b.excluded_point or np.inf)) > 1e-6]
        assert np.all(c.K2(t) > -1e-9 * k2)
        # K'' vanishes at each finite end
        for e in (b.t_l, b.t_u):
            if math.isfinite(e):
                size = k2 + abs(k3 * e) + abs(k4 * e * e / 2)
                assert abs(c.K2(e)) <= 1e-9 * size

    def test_all_eight_cases_reachable(self):
        cases = {
            1: [0, 1, 2, 1],
            2: [0, 1, -2, 1],
            3: [0, 1, 2, 2],
            4: [0, 1, 0.5, 1],
            5: [0, 1, 1, 0],
            6: [0, 1, 0, 0],
            7: [0, 1, -1, 0],
            8: [0, 1, 0.3, -1],
        }
        for case, k in cases.items():
            assert saddlepoint_bracket(CgfModel(np.array(k, dtype=float))).case == case


class TestSaddlepoint:
    def test_examples(self):
        g = CgfModel(np.array([0.0, 1.0, 0.0, 0.0]))
        assert solve_saddlepoint(g, 1.0) == pytest.approx(1.0, rel=1e-14)
        assert solve_saddlepoint(g, 0.0) == 0.0
        e = CgfModel(np.array([1.0, 1.0, 2.0, 6.0]))
        assert solve_saddlepoint(e, float(e.K1(0.1))) == pytest.approx(0.1, rel=1e-12)

    def test_infeasible_carries_interval(self):
        c = CgfModel(np.array([0.0, 1.0, -2.0, 0.0]))
        lo, hi = -math.inf, float(c.K1(0.5))
        with pytest.raises(SaddlepointError, match="saddlepoint infeasible") as err:
            solve_saddlepoint(c, hi + 1.0)
        assert err.value.interval == pytest.approx((lo, hi))

    @given(t=st.floats(-0.9, 3.0), k=st.sampled_from([[1.0, 1.0, 2.0, 6.0], [0.0, 2.0, 0.7, 0.2], [-1.0, 0.5, -0.4, 0.1]]))
    @settings(max_examples=100, deadline=None)
    def test_residual(self, t, k):
        c = CgfModel(np.array(k))
        b = saddlepoint_bracket(c)
        if not b.t_l < t < b.t_u:
            return
        xi = float(c.K1(t))
        ts = solve_saddlepoint(c, xi)
        assert abs(c.K1(ts) - xi) <= 1e-12 * (1 + abs(xi))


class TestSpa:
    def test_gaussian_examples(self):
        g = CgfModel(np.array([0.0, 1.0, 0.0, 0.0]))
        assert spa_cdf(g, 0.0) == pytest.approx(0.5, abs=1e-15)
        assert spa_cdf(g, -3.0) == pytest.approx(PHI_M3, rel=1e-10)
        assert spa_pdf(g, 0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-14)
        assert spa_failure_probability(CgfModel(np.array([3.0, 1.0, 0.0, 0.0]))) == pytest.approx(PHI_M3, rel=1e-10)

    @given(k1=st.floats(-5, 5), k2=st.floats(0.1, 10), z=st.floats(-6, 6))
    @settings(max_examples=200, deadline=None)
    def test_gaussian_identity(self, k1, k2, z):
        c = CgfModel(np.array([k1, k2, 0.0, 0.0]))
        xi = k1 + z * math.sqrt(k2)
        st_ = spa_state(c, xi)
        if st_.limit_branch:
            return
        assert abs(st_.cdf - special.ndtr(z)) <= 1e-12

    def test_limit_branch_continuity(self):
        # skewed exponential-like cumulants: CDF is continuous across the window
        c = CgfModel(np.array([1.0, 1.0, 2.0, 6.0]))
        centre = spa_state(c, 1.0)
        assert centre.limit_branch
        assert centre.cdf == pytest.approx(0.5 + 2.0 / (6 * math.sqrt(2 * math.pi)), rel=1e-14)
        for h in (1e-3, 1e-4, 1e-6):
            assert spa_cdf(c, 1.0 + h) == pytest.approx(centre.cdf, abs=5 * h)
            assert spa_cdf(c, 1.0 - h) == pytest.approx(centre.cdf, abs=5 * h)

    def test_exponential_tail_accuracy(self):
        # four-cumulant SPA of Exp(1) recovers its upper tail well
        c = CgfModel(np.array([1.0, 1.0, 2.0, 6.0]))
        assert 1 - spa_cdf(c, 4.0) == pytest.approx(math.exp(-4.0), rel=0.05)

    @pytest.mark.parametrize("method", ["chain", "stable", "auto"])
    @pytest.mark.parametrize("kappa,xi", [([0.0, 1.0, 0.4, 0.3], -1.5), ([2.0, 1.5, -0.3, 0.1], 0.0), ([1.0, 1.0, 2.0, 6.0], 2.5)])
    def test_kappa_gradient_against_finite_difference(self, method, kappa, xi):
        k = np.array(kappa)
        g = spa_cdf_kappa_gradient(CgfModel(k), xi, method)
        for r in range(4):
            h = 1e-6 * max(1.0, abs(k[r]))
            kp, km = k.copy(), k.copy()
            kp[r] += h
            km[r] -= h
            fd = (spa_cdf(CgfModel(kp), xi) - spa_cdf(CgfModel(km), xi)) / (2 * h)
            assert g[r] == pytest.approx(fd, rel=1e-6, abs=1e-9)

    @pytest.mark.parametrize("mu,expected", [(0.0, -0.3989423), (3.0, -4.431848e-3)])
    def test_sensitivity_examples(self, mu, expected):
        sur = _std_normal_surrogate(mu)
        rep = moment_analysis(sur, [DesignBinding(((0, Role.MEAN),), "mu")], Q=4)
        out = spa_analysis(rep.moments, rep.sensitivities, 0.0, ["mu"])
        assert out.sensitivities[0] == pytest.approx(expected, rel=1e-6)
        assert out.diagnostics["limit_branch"] is (mu == 0.0)

    def test_report_serialization(self):
        sur = _std_normal_surrogate(3.0)
        rep = moment_analysis(sur, [DesignBinding(((0, Role.MEAN),), "mu")], Q=4)
        out = spa_analysis(rep.moments, rep.sensitivities, 0.0, ["mu"])
        lines = out.to_csv().split("\r\n")
        assert lines[0] == "quantity,design_index,name,value,std_error"
        d = out.to_dict()
        assert d["p_f"] == pytest.approx(PHI_M3, rel=1e-9)
        assert d["diagnostics"]["bracket"][0] < d["diagnostics"]["saddlepoint"] < d["diagnostics"]["bracket"][1]


class TestMcs:
    def test_component_symmetry(self):
        rep = mcs_failure_probability(EventSpec("component"), _std_normal_surrogate(), 10**6, 1)
        assert abs(rep.p_f - 0.5) <= 3 * 0.0005
        assert rep.diagnostics["std_error"] == pytest.approx(math.sqrt(0.25 / 10**6), rel=1e-3)

    def test_series_and_parallel(self):
        inputs = (Gaussian(),)
        a = PddSurrogate(inputs, 1, 1, 0.0, np.array([1.0]))
        b = PddSurrogate(inputs, 1, 1, 0.0, np.array([-1.0]))
        assert mcs_failure_probability(EventSpec("series"), [a, b], 10**5, 3).p_f == 1.0
        assert mcs_failure_probability(EventSpec("parallel"), [a, b], 10**5, 3).p_f == 0.0
        with pytest.raises(ValueError):
            EventSpec("component").indicator(np.zeros((3, 2)))

    def test_score_function_sensitivity(self):
        s = mcs_sensitivity(EventSpec(), _std_normal_surrogate(), [DesignBinding(((0, Role.MEAN),))], 10**6, 5)
        assert s[0] == pytest.approx(-0.39894, abs=4e-3)
        safe = PddSurrogate((Gaussian(),), 1, 1, 1.0, np.array([0.0]))
        assert mcs_sensitivity(EventSpec(), safe, [DesignBinding(((0, Role.MEAN),))], 10**4, 5)[0] == 0.0

    def test_cdf_edges(self):
        sur = _std_normal_surrogate()
        rep = mcs_cdf(sur, [0.0, 50.0], [DesignBinding(((0, Role.STDEV),))], 10**5, 9)
        assert rep.cdf[1] == 1.0 and abs(rep.cdf[0] - 0.5) < 0.005
        assert abs(rep.sensitivities[1, 0]) < 0.02

    @pytest.mark.parametrize("threads", [2, 4])
    def test_thread_count_invariance(self, threads):
        sur = _std_normal_surrogate(0.7)
        b = [DesignBinding(((0, Role.MEAN),)), DesignBinding(((0, Role.STDEV),))]
        one = mcs_failure_probability(EventSpec(), sur, 100_003, 11, b, threads=1)
        many = mcs_failure_probability(EventSpec(), sur, 100_003, 11, b, threads=threads)
        assert one.to_csv() == many.to_csv()

    def test_surrogate_and_original_agree_for_exact_reproduction(self):
        inputs = [Exponential(1.0)] * 2
        model = PerformanceModel(2, lambda X: 2.0 - X[:, 0] * X[:, 1])
        sur = compute_coefficients(model, inputs, 2, 1)
        b = [DesignBinding(((0, Role.RATE),))]
        a = mcs_failure_probability(EventSpec(), sur, 50_000, 2, b)
        c = crude_mcs_sf(model, inputs, EventSpec(), 50_000, 2, b)
        assert a.p_f == c.p_f and np.allclose(a.sensitivities, c.sensitivities, atol=1e-12)

    def test_crude_fd_is_close_to_sf(self):
        model = PerformanceModel(1, lambda X: X[:, 0])
        inputs = [Gaussian(1.0, 1.0)]
        b = [DesignBinding(((0, Role.MEAN),))]
        fd = crude_mcs_fd(model, inputs, EventSpec(), 10**6, 3, b, rel_step=0.05)
        # exact dP/dmu = -phi(1) = -0.24197; forward step of 0.05 adds a small bias
        assert fd.sensitivities[0] == pytest.approx(-0.24197, rel=0.05)
        assert fd.diagnostics["model_evaluations"] == 2 * 10**6
