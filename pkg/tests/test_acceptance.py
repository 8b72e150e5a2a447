"""Acceptance suite: one verdict per criterion, printed in the terminal summary.

Tolerances are the published acceptance thresholds and are pinned here on
purpose; a criterion that cannot be met is reported as FAIL, not loosened.
"""

from __future__ import annotations

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from pdduq.cli import example1_errors, reproduce
from pdduq.distributions import DesignBinding, Exponential, Gaussian, Lognormal, Role, TruncatedGaussian, Uniform, Weibull
from pdduq.models import PerformanceModel, cubic4, gauss_sum
from pdduq.moments import moment_analysis
from pdduq.orthopoly import build_recurrence, gauss_rule, marginal_gauss_rule
from pdduq.pdd import compute_coefficients
from pdduq.reliability import CgfModel, spa_analysis, spa_state

# published bivariate Option I values and closed-form targets, Example 3 with N = 10
EX3_N10_EXACT = (1.350e-3, 1.401e-2, 1.330e-2)
EX3_N10_REL = 0.02
EX3_N10_EVALS = 761
EX3_N100_PF = (1.25e-3, 1.45e-3)
EX3_N100_DMU = 4.432e-2
EX3_N100_REL = 0.05
EX3_N100_EVALS = 79_601
GAUSS_IDENTITY_TOL = 1e-12
QUAD_EXACT_TOL = 1e-10
GRAM_TOL = 1e-8
EX2_POINT_TOL = 1e-8
EX2_CDF_TOL = 1e-12
GRAD_TOL = 1e-6
SPA_FD_TOL = 1e-3
EX4_REL = 0.05
EX5_Z = 3.0
EX5_SOLVES = 3445

SIX_KINDS = [
    Gaussian(1.5, 0.4),
    Exponential(2.0),
    Lognormal(3.0, 0.3),
    TruncatedGaussian(0.0, 0.2, 2.0),
    Weibull(1.0, 0.5),
    Uniform(-1.0, 3.0),
]

# benchmark outputs produced with one thread; criterion 10 reruns them with two
FIRST_RUNS: dict[str, Path] = {}


@pytest.fixture(scope="module")
def outdir(tmp_path_factory):
    return tmp_path_factory.mktemp("acceptance")


def _reproduce(example_id: str, root: Path, threads: int, **kw) -> dict:
    out = root / f"{example_id}-t{threads}"
    res = reproduce(example_id, str(out), threads=threads, quiet=True, **kw)
    if threads == 1:
        FIRST_RUNS[example_id] = out
    return res


def _rows(res: dict) -> dict:
    return {r[0]: r for r in res["rows"]}


def test_criterion_01_example3_n10(outdir, record):
    t0 = time.perf_counter()
    res = _reproduce("example3-n10", outdir, 1)
    elapsed = time.perf_counter() - t0
    s = res["summary"]
    vals = [s["p_f"]] + s["p_f_sensitivities"]
    rel = [abs(v / e - 1) for v, e in zip(vals, EX3_N10_EXACT)]
    ok = max(rel) <= EX3_N10_REL and s["function_evaluations"] <= EX3_N10_EVALS and elapsed < 60
    record(1, ok, f"max rel err {max(rel):.2e}, {s['function_evaluations']} evaluations, {elapsed:.1f} s")


@pytest.mark.slow
def test_criterion_02_example3_n100(outdir, record):
    res = _reproduce("example3-n100", outdir, 1)
    s = res["summary"]
    pf, dmu = s["p_f"], s["p_f_sensitivities"][0]
    rel = abs(dmu / EX3_N100_DMU - 1)
    ok = EX3_N100_PF[0] <= pf <= EX3_N100_PF[1] and rel <= EX3_N100_REL and s["function_evaluations"] <= EX3_N100_EVALS
    record(2, ok, f"P_F {pf:.4e}, dP_F/dmu rel err {rel:.2e}, {s['function_evaluations']} evaluations")


def test_criterion_03_spa_gaussian_identity(record):
    from scipy.special import ndtr

    rng = np.random.default_rng(3)
    worst, checked = 0.0, 0
    for _ in range(10):
        k1, k2 = rng.uniform(-5, 5), rng.uniform(0.1, 10)
        cgf = CgfModel(np.array([k1, k2, 0.0, 0.0]))
        for xi in k1 + math.sqrt(k2) * rng.uniform(-6, 6, 100):
            st = spa_state(cgf, xi)
            if st.limit_branch:
                continue
            worst = max(worst, abs(st.cdf - ndtr((xi - k1) / math.sqrt(k2))))
            checked += 1
    record(3, worst <= GAUSS_IDENTITY_TOL and checked >= 900, f"max |error| {worst:.1e} over {checked} points")


def test_criterion_04_quadrature_and_orthonormality(record):
    worst_q, worst_g = 0.0, 0.0
    for m in SIX_KINDS:
        for n in range(1, 10):
            r = marginal_gauss_rule(m, n)
            for k in range(2 * n):
                # scaled by E|X|^k so that vanishing odd moments stay well posed
                scale = max(abs(m.raw_moment(k)), np.sum(r.weights * np.abs(r.nodes) ** k)) or 1.0
                worst_q = max(worst_q, abs(np.sum(r.weights * r.nodes**k) - m.raw_moment(k)) / scale)
            t = build_recurrence(m, n)
            g = gauss_rule(t, n + 1)
            P = t.evaluate(g.nodes, n)
            worst_g = max(worst_g, np.abs((P * g.weights[:, None]).T @ P - np.eye(n + 1)).max())
    ok = worst_q <= QUAD_EXACT_TOL and worst_g <= GRAM_TOL
    record(4, ok, f"max rel quadrature error {worst_q:.1e}, max Gram deviation {worst_g:.1e}")


def test_criterion_05_example2_equivalence(outdir, record):
    inputs = [Exponential(1.0)] * 4
    sur = compute_coefficients(cubic4(), inputs, 3, 3, 3, 4)
    X = np.column_stack([m.sample(np.random.default_rng(5 + i), 10_000) for i, m in enumerate(inputs)])
    y = cubic4().func(X)
    point = np.max(np.abs(sur.evaluate(X) - y) / np.maximum(np.abs(y), 1.0))
    res = _reproduce("example2-exp", outdir, 1)
    cdf = max(r[1] for r in res["rows"])
    ok = point <= EX2_POINT_TOL and cdf <= EX2_CDF_TOL
    record(5, ok, f"max surrogate error {point:.1e}, max CDF/sensitivity difference {cdf:.1e}")


def _poly(X):
    return 1.0 + X[:, 0] ** 2 * X[:, 1] - 2.0 * X[:, 2] + X[:, 1] * X[:, 2] ** 2 + 0.5 * X[:, 0] ** 3


GRAD_CASES = [
    ([Gaussian(0.4, 1.3), Gaussian(-1.0, 0.5), Gaussian(2.0, 0.8)], [Role.MEAN, Role.STDEV]),
    ([Exponential(1.5), Exponential(0.7), Exponential(2.0)], [Role.RATE]),
    ([Lognormal(2.0, 0.3), Lognormal(1.0, 0.2), Lognormal(3.0, 0.6)], [Role.MEAN, Role.STDEV]),
    ([Weibull(1.2, 2.5), Weibull(2.0, 1.5), Weibull(0.8, 3.0)], [Role.SCALE, Role.SHAPE]),
]


def _example3_spa(mu: float, sigma: float):
    binds = [DesignBinding.shared(Role.MEAN, range(10), "mu"), DesignBinding.shared(Role.STDEV, range(10), "sigma")]
    sur = compute_coefficients(gauss_sum(10), [Gaussian(mu, sigma)] * 10, 2, 3)
    rep = moment_analysis(sur, binds, Q=4, option="I")
    return spa_analysis(rep.moments, rep.sensitivities)


def test_criterion_06_gradient_checks(record):
    model = PerformanceModel(3, _poly)
    worst = 0.0
    for inputs, roles in GRAD_CASES:
        sur = compute_coefficients(model, inputs, 2, 3)
        binds = [DesignBinding(((i, r),)) for i in range(3) for r in roles]
        rep = moment_analysis(sur, binds, Q=2)
        for k, b in enumerate(binds):
            i, role = b.targets[0]
            h = 1e-4 * abs(inputs[i].param(role))
            plus = compute_coefficients(model, b.perturbed(inputs, h), 2, 3)
            minus = compute_coefficients(model, b.perturbed(inputs, -h), 2, 3)
            fd = np.array([plus.mean() - minus.mean(), plus.second_moment() - minus.second_moment()]) / (2 * h)
            scale = np.maximum(np.abs(fd), 1e-3 * np.abs(rep.moments[:2]))
            worst = max(worst, float(np.max(np.abs(rep.sensitivities[:2, k] - fd) / scale)))
    base = _example3_spa(0.0, 1.0)
    h = 1e-3
    fd = [
        (_example3_spa(h, 1.0).p_f - _example3_spa(-h, 1.0).p_f) / (2 * h),
        (_example3_spa(0.0, 1.0 + h).p_f - _example3_spa(0.0, 1.0 - h).p_f) / (2 * h),
    ]
    spa = max(abs(a / b - 1) for a, b in zip(base.sensitivities, fd))
    ok = worst <= GRAD_TOL and spa <= SPA_FD_TOL
    record(6, ok, f"moment sensitivities max rel err {worst:.1e}, SPA CDF sensitivity rel err {spa:.1e}")


def test_criterion_07_example1_convergence(outdir, record):
    rows = example1_errors((1, 2), (2, 4, 6, 8))
    _reproduce("example1", outdir, 1, m=8)
    err = {(S, m, q): r for S, m, q, _, _, r in rows}
    ok, parts = True, []
    for q in ("dm2/dmu", "dm2/dsigma"):
        seq = [err[(2, m, q)] for m in (2, 4, 6, 8)]
        mono = all(b <= a for a, b in zip(seq, seq[1:]))
        better = seq[-1] < err[(1, 8, q)]
        ok &= mono and better
        parts.append(f"{q}: " + " ".join(f"{e:.1e}" for e in seq) + f" vs univariate {err[(1, 8, q)]:.1e}")
    record(7, ok, "; ".join(parts))


@pytest.mark.slow
def test_criterion_08_example4(outdir, record):
    res = _reproduce("example4", outdir, 1)
    r = _rows(res)
    pdd, ref = r["P_F (c=0.1)"][1], r["P_F (c=0.1)"][2]
    degraded = r["P_F (c=0.7)"]
    rel = abs(pdd / ref - 1) if ref > 0 else math.inf
    detail = (
        f"c=0.1: PDD-SPA {pdd:.3e} vs crude MCS/SF {ref:.3e} (rel {rel:.2e}); "
        f"c=0.7 reported: {degraded[1]:.3e} vs {degraded[2]:.3e}"
    )
    record(8, rel <= EX4_REL, detail)


def test_criterion_09_example5(outdir, record):
    res = _reproduce("example5", outdir, 1)
    s = res["summary"]
    base = json.loads((FIRST_RUNS["example5"] / "baseline.json").read_text())
    d = base["diagnostics"]
    zp = abs(s["p_f"] - base["p_f"]) / d["std_error"]
    zs = np.abs(np.array(s["p_f_sensitivities"]) - base["sensitivities"]) / np.array(d["sensitivity_std_error"])
    ok = zp <= EX5_Z and np.all(zs <= EX5_Z) and s["function_evaluations"] <= EX5_SOLVES
    record(9, ok, f"|z| P_F {zp:.2f}, max |z| sensitivities {zs.max():.2f}, {s['function_evaluations']} truss solves")


@pytest.mark.slow
def test_criterion_10_determinism(outdir, record):
    assert FIRST_RUNS, "run criteria 1-9 first (same session)"
    kw = {"example1": {"m": 8}}
    diffs, n_files = [], 0
    for eid, first in sorted(FIRST_RUNS.items()):
        _reproduce(eid, outdir, 2, **kw.get(eid, {}))
        second = outdir / f"{eid}-t2"
        a = sorted(p.relative_to(first) for p in first.rglob("*.csv"))
        b = sorted(p.relative_to(second) for p in second.rglob("*.csv"))
        if a != b:
            diffs.append(f"{eid}: file sets differ")
            continue
        for rel in a:
            n_files += 1
            if (first / rel).read_bytes() != (second / rel).read_bytes():
                diffs.append(f"{eid}/{rel}")
    detail = f"{n_files} CSV files over {len(FIRST_RUNS)} benchmarks, threads 1 vs 2"
    record(10, not diffs and n_files > 0, detail + (f"; differing: {', '.join(diffs)}" if diffs else ", bitwise identical"))
