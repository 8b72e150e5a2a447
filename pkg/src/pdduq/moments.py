"""Moments of a PDD surrogate and their score-function design sensitivities.

First and second moments and their sensitivities are closed-form in the
expansion coefficients.  Higher moments use one of two options:

* Option I integrates ``y^r`` (and ``y^r s``) exactly.  Products of PDD
  terms have zero mean unless every variable they touch appears at least
  twice, so ``E[y^r]`` only involves functions of at most ``floor(r S / 2)``
  variables.  An inclusion-exclusion sum over restricted surrogates on such
  subsets, each integrated on a tensor Gauss grid, gives the integral
  exactly.
* Option II re-expands ``y^r`` as an S̄-variate, m̄-th order PDD and reads off
  its constant term (and univariate coefficients for sensitivities).
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .distributions import DesignBinding, Exponential, Gaussian, Marginal, Role, TruncatedGaussian, SCORE_OPTIONS
from .orthopoly import build_recurrence, dense_rule, marginal_gauss_rule, triple_product_tensor
from .pdd import PddSurrogate, compute_coefficients, reduction_weight

OPTION_I_POINT_LIMIT = 60_000_000


class MomentError(ValueError):
    pass


# --------------------------------------------------------------------------
# score expansions
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ScoreExpansion:
    """Fourier-polynomial expansion of one design variable's score.

    ``s_empty[i]`` is the constant and ``D[i][j-1]`` the coefficient of
    ``psi_{i j}`` for every variable ``i`` targeted by the binding.
    ``poly_degree[i]`` is the degree of the score kernel when it is itself a
    polynomial, else ``None``.
    """

    binding: DesignBinding
    m_prime: int
    s_empty: dict
    D: dict
    marginals: dict
    poly_degree: dict = field(default_factory=dict)

    @property
    def variables(self) -> tuple[int, ...]:
        return tuple(sorted(self.D))

    def check_inputs(self, inputs: Sequence[Marginal]) -> None:
        for i, mg in self.marginals.items():
            if inputs[i] != mg:
                raise MomentError(f"score expansion for variable {i} was built on a different marginal")


def _analytic_score(marginal: Marginal, role: Role, m_prime: int):
    """(s0, D, poly_degree) when the projection is exact in closed form."""
    D = np.zeros(m_prime)
    if isinstance(marginal, Gaussian):
        if role is Role.MEAN:
            if m_prime >= 1:
                D[0] = 1.0 / marginal.sigma
            return 0.0, D, 1
        if m_prime >= 2:
            D[1] = math.sqrt(2.0) / marginal.sigma
        return 0.0, D, 2
    if isinstance(marginal, Exponential):
        if m_prime >= 1:
            D[0] = -1.0 / marginal.rate
        return 0.0, D, 1
    return None


def _score_degree(marginal: Marginal, role: Role):
    if isinstance(marginal, TruncatedGaussian) and SCORE_OPTIONS["truncated_gaussian"] == "table2":
        return 1 if role is Role.MEAN else 2
    return None


def project_kernel(marginal: Marginal, kernel, degree: int) -> tuple[float, np.ndarray]:
    """Project ``kernel(x)`` on ``psi_0..psi_degree`` of ``marginal``."""
    z, w = dense_rule(marginal, max(degree, 8))
    loc, scale = marginal.standardization
    x = loc + scale * z
    table = build_recurrence(marginal, max(degree, 1))
    P = table.evaluate(x, degree)
    s = kernel(x)
    proj = (w * s) @ P
    return float(proj[0]), proj[1:].copy()


def build_score_expansion(binding: DesignBinding, inputs: Sequence[Marginal], m_prime: int) -> ScoreExpansion:
    """Expansion coefficients of the score of ``binding`` up to degree ``m_prime``."""
    binding.validate(inputs)
    s_empty, D, marg, poly = {}, {}, {}, {}
    for i in binding.variables:
        mg = inputs[i]
        s0, Di, deg = 0.0, np.zeros(m_prime), 0
        for role in binding.roles_for(i):
            exact = _analytic_score(mg, role, m_prime)
            if exact is not None:
                a, b, d = exact
            else:
                a, b = project_kernel(mg, lambda x, r=role: mg._score(r, x), m_prime)
                d = _score_degree(mg, role)
            s0 += a
            Di = Di + b
            deg = None if (deg is None or d is None) else max(deg, d)
        s_empty[i], D[i], marg[i], poly[i] = s0, Di, mg, deg
    return ScoreExpansion(binding, m_prime, s_empty, D, marg, poly)


def default_m_prime(binding: DesignBinding, inputs: Sequence[Marginal], m: int) -> int:
    """2 for Gaussian targets (the score is quadratic), else ``2 m``."""
    if all(isinstance(inputs[i], Gaussian) for i in binding.variables):
        return 2
    return max(2, 2 * m)


# --------------------------------------------------------------------------
# first and second moments
# --------------------------------------------------------------------------


def mean_sensitivity(surrogate: PddSurrogate, scores: Sequence[ScoreExpansion]) -> np.ndarray:
    """Design sensitivities of the surrogate mean, one per score expansion."""
    U = surrogate.univariate()
    out = np.zeros(len(scores))
    for k, sc in enumerate(scores):
        sc.check_inputs(surrogate.inputs)
        total = 0.0
        for i in sc.variables:
            mm = min(surrogate.m, sc.m_prime)
            total += surrogate.y_empty * sc.s_empty[i] + float(np.dot(U[i, :mm], sc.D[i][:mm]))
        out[k] = total
    return out


def _kernel_matrix(surrogate: PddSurrogate, i: int, s0: float, D: np.ndarray) -> np.ndarray:
    """``M[a, b] = E[psi_a psi_b s]`` for the expanded score of variable ``i``."""
    m, mp = surrogate.m, len(D)
    table = build_recurrence(surrogate.inputs[i], 2 * m + mp + 2)
    T = triple_product_tensor(table, m, mp)
    Dh = np.concatenate(([s0], D))
    return T @ Dh


def second_moment_sensitivity(surrogate: PddSurrogate, scores: Sequence[ScoreExpansion]) -> np.ndarray:
    """Design sensitivities of the surrogate second moment.

    ``E[y^2 s_i]`` pairs every two terms whose restrictions to the variables
    other than ``i`` coincide; each pair contributes
    ``C1 C2 E[psi_a psi_b s_i]`` where ``a``, ``b`` are the degrees of ``i``
    in the two terms (0 when absent).  This includes the cross terms between
    a univariate and a bivariate coefficient.
    """
    S, m, N = surrogate.S, surrogate.m, surrogate.N
    total_sq = surrogate.second_moment()
    out = np.zeros(len(scores))
    for k, sc in enumerate(scores):
        sc.check_inputs(surrogate.inputs)
        acc = 0.0
        for i in sc.variables:
            M = _kernel_matrix(surrogate, i, sc.s_empty[i], sc.D[i])
            # bases of size S contribute only through M[0, 0]; handle the rest explicitly
            covered = 0.0
            for size in range(0, S):
                for w in itertools.combinations([v for v in range(N) if v != i], size):
                    if size == 0:
                        c0 = np.array([surrogate.y_empty])
                    else:
                        c0 = surrogate.block(w).reshape(-1)
                    wi = tuple(sorted(w + (i,)))
                    blk = surrogate.block(wi)
                    blk = np.moveaxis(blk, wi.index(i), -1).reshape(-1, m)
                    C = np.concatenate((c0[:, None], blk), axis=1)
                    acc += float(np.sum((C @ M) * C))
                    covered += float(np.dot(c0, c0) + np.sum(blk * blk))
            # remaining terms are those on size-S subsets without i
            acc += M[0, 0] * (total_sq - covered)
        out[k] = acc
    return out


# --------------------------------------------------------------------------
# higher moments, option I
# --------------------------------------------------------------------------


def _grid_basis(surrogate: PddSurrogate, U: Sequence[int], counts: Sequence[int]):
    """Basis values and tensor weights on the Gauss grid over ``U``."""
    k = len(U)
    rules = [marginal_gauss_rule(surrogate.inputs[i], n) for i, n in zip(U, counts)]
    vals = [surrogate.tables[i].evaluate(r.nodes, surrogate.m) for i, r in zip(U, rules)]
    size = int(np.prod(counts)) if k else 1
    Pu = np.empty((size, k, surrogate.m + 1))
    W = np.ones(size)
    if k:
        idx = np.indices(tuple(counts)).reshape(k, -1)
        for p in range(k):
            Pu[:, p, :] = vals[p][idx[p]]
            W = W * rules[p].weights[idx[p]]
    return Pu, W, rules, (idx if k else None)


def evaluate_restricted(surrogate: PddSurrogate, U: Sequence[int], Pu: np.ndarray) -> np.ndarray:
    """Surrogate keeping only terms supported inside ``U``; ``Pu`` holds basis values of ``U``."""
    B, k = Pu.shape[0], len(U)
    m = surrogate.m
    y = np.full(B, float(surrogate.y_empty))
    for size in range(1, min(k, surrogate.S) + 1):
        for pos in itertools.combinations(range(k), size):
            u = tuple(U[p] for p in pos)
            T = surrogate.block(u).reshape(m, -1)
            acc = Pu[:, pos[0], 1:] @ T
            for p in pos[1:]:
                acc = acc.reshape(B, m, -1)
                acc = np.einsum("bjr,bj->br", acc, Pu[:, p, 1:])
            y += acc.reshape(B)
    return y


def _option1_dimension(r: int, S: int, N: int, with_score: bool) -> int:
    return min((r * S + (1 if with_score else 0)) // 2, N)


def _option1_cost(surrogate: PddSurrogate, orders: Sequence[int], n_sens_vars: int, n_score_nodes: int) -> int:
    N, S, m = surrogate.N, surrogate.S, surrogate.m
    r = max(orders)
    n = math.ceil((r * m + 1) / 2)
    D = _option1_dimension(r, S, N, False)
    cost = sum(math.comb(N, k) * n**k for k in range(D + 1))
    if n_sens_vars:
        D2 = _option1_dimension(r, S, N, True)
        cost += n_sens_vars * sum(math.comb(N - 1, k) * n**k * n_score_nodes for k in range(D2))
    return cost


def option1_moments(surrogate: PddSurrogate, orders: Sequence[int]) -> dict[int, float]:
    """Exact ``E[y^r]`` of the surrogate for each requested order."""
    orders = sorted(set(int(r) for r in orders))
    if not orders:
        return {}
    N, S, m = surrogate.N, surrogate.S, surrogate.m
    rmax = orders[-1]
    if _option1_cost(surrogate, orders, 0, 0) > OPTION_I_POINT_LIMIT:
        raise MomentError("Option I integration grid too large for this surrogate; use Option II")
    n = math.ceil((rmax * m + 1) / 2)
    D = _option1_dimension(rmax, S, N, False)
    out = {r: 0.0 for r in orders}
    for size in range(D + 1):
        wgt = reduction_weight(N, D, size)
        if wgt == 0:
            continue
        part = {r: 0.0 for r in orders}
        for U in itertools.combinations(range(N), size):
            Pu, W, _, _ = _grid_basis(surrogate, U, [n] * size)
            y = evaluate_restricted(surrogate, U, Pu)
            for r in orders:
                part[r] += float(np.dot(W, y**r))
        for r in orders:
            out[r] += wgt * part[r]
    return out


def _score_node_count(sc_list, i, r, m) -> int:
    degs = [sc.poly_degree.get(i) for sc in sc_list if i in sc.D]
    if all(d is not None for d in degs):
        d = max(degs)
    else:
        d = r * m
    return math.ceil((r * m + d + 1) / 2)


def option1_sensitivities(
    surrogate: PddSurrogate, orders: Sequence[int], bindings: Sequence[DesignBinding], moments: dict[int, float]
) -> np.ndarray:
    """Exact ``dE[y^r]/dd_k`` for each order (rows) and binding (columns)."""
    orders = sorted(set(int(r) for r in orders))
    N, S, m = surrogate.N, surrogate.S, surrogate.m
    out = np.zeros((len(orders), len(bindings)))
    if not orders or not bindings:
        return out
    rmax = orders[-1]
    n = math.ceil((rmax * m + 1) / 2)
    full = [build_score_expansion(b, surrogate.inputs, rmax * m) for b in bindings]
    for sc in full:
        sc.check_inputs(surrogate.inputs)
    targeted = sorted({i for sc in full for i in sc.variables})
    n_i = {i: _score_node_count(full, i, rmax, m) for i in targeted}
    if _option1_cost(surrogate, orders, len(targeted), max(n_i.values())) > OPTION_I_POINT_LIMIT:
        raise MomentError("Option I integration grid too large for this surrogate; use Option II")
    Dp = _option1_dimension(rmax, S, N, True)
    for k, sc in enumerate(full):
        for a, r in enumerate(orders):
            out[a, k] += sum(sc.s_empty[i] for i in sc.variables) * moments[r]
    for i in targeted:
        users = [k for k, sc in enumerate(full) if i in sc.D]
        others = [v for v in range(N) if v != i]
        ni = n_i[i]
        rule_i = marginal_gauss_rule(surrogate.inputs[i], ni)
        Psi_i = build_recurrence(surrogate.inputs[i], rmax * m).evaluate(rule_i.nodes, rmax * m)
        proj = {k: Psi_i[:, 1:] @ full[k].D[i] for k in users}
        for size in range(Dp):
            wgt = reduction_weight(N - 1, Dp - 1, size)
            if wgt == 0:
                continue
            for rest in itertools.combinations(others, size):
                U = tuple(sorted(rest + (i,)))
                p = U.index(i)
                counts = [ni if v == i else n for v in U]
                Pu, W, _, idx = _grid_basis(surrogate, U, counts)
                y = evaluate_restricted(surrogate, U, Pu)
                for k in users:
                    sw = W * proj[k][idx[p]]
                    for a, r in enumerate(orders):
                        out[a, k] += wgt * float(np.dot(sw, y**r))
    return out


# --------------------------------------------------------------------------
# higher moments, option II
# --------------------------------------------------------------------------


def option2_expansions(surrogate: PddSurrogate, orders: Sequence[int], S_bar: int, m_bar: int, univariate_only=False):
    """PDD re-expansions of ``y^r`` (one surrogate per order)."""
    orders = list(orders)
    if not 1 <= S_bar <= surrogate.N:
        raise MomentError("Option II needs 1 <= S_bar <= N")

    def powers(X):
        y = surrogate.evaluate(X)
        return np.stack([y**r for r in orders], axis=1)

    S_fit = 1 if univariate_only else S_bar
    fits = compute_coefficients(powers, surrogate.inputs, S_fit, m_bar, R=S_bar, n=m_bar + 1)
    return dict(zip(orders, fits))


def option2_moments(surrogate: PddSurrogate, orders, S_bar: int, m_bar: int) -> dict[int, float]:
    fits = option2_expansions(surrogate, orders, S_bar, m_bar, univariate_only=True)
    return {r: f.y_empty for r, f in fits.items()}


def option2_sensitivities(fits: dict, bindings: Sequence[DesignBinding], inputs) -> np.ndarray:
    orders = sorted(fits)
    out = np.zeros((len(orders), len(bindings)))
    for a, r in enumerate(orders):
        z = fits[r]
        scores = [build_score_expansion(b, inputs, z.m) for b in bindings]
        out[a] = mean_sensitivity(z, scores)
    return out


def higher_moment(surrogate: PddSurrogate, r: int, option: str = "I", S_bar: int | None = None, m_bar: int | None = None):
    """``E[y^r]`` of the surrogate for ``r >= 1``."""
    if r == 1:
        return surrogate.mean()
    if r == 2:
        return surrogate.second_moment()
    if str(option).upper() == "I":
        return option1_moments(surrogate, [r])[r]
    S_bar = surrogate.S if S_bar is None else S_bar
    m_bar = r * surrogate.m if m_bar is None else m_bar
    return option2_moments(surrogate, [r], S_bar, m_bar)[r]


def higher_moment_sensitivity(
    surrogate: PddSurrogate,
    r: int,
    bindings: Sequence[DesignBinding],
    option: str = "I",
    S_bar: int | None = None,
    m_bar: int | None = None,
) -> np.ndarray:
    """``dE[y^r]/dd_k`` for every binding."""
    if str(option).upper() == "I":
        mom = option1_moments(surrogate, [r])
        return option1_sensitivities(surrogate, [r], bindings, mom)[0]
    S_bar = surrogate.S if S_bar is None else S_bar
    m_bar = r * surrogate.m if m_bar is None else m_bar
    fits = option2_expansions(surrogate, [r], S_bar, m_bar, univariate_only=True)
    return option2_sensitivities(fits, bindings, surrogate.inputs)[0]


# --------------------------------------------------------------------------
# report
# --------------------------------------------------------------------------


@dataclass
class MomentReport:
    """Raw moments ``m^(1..Q)`` and sensitivities ``dm^(r)/dd_k``."""

    moments: np.ndarray
    sensitivities: np.ndarray
    methods: list
    design_names: list = field(default_factory=list)

    @property
    def Q(self) -> int:
        return len(self.moments)

    def to_dict(self) -> dict:
        return {
            "moments": [float(v) for v in self.moments],
            "sensitivities": [[float(v) for v in row] for row in self.sensitivities],
            "methods": list(self.methods),
            "design_names": list(self.design_names),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\r\n")
        wr.writerow(["order", "design_index", "value", "method"])
        for r in range(self.Q):
            wr.writerow([r + 1, "", _fmt(self.moments[r]), self.methods[r]])
            for k in range(self.sensitivities.shape[1]):
                wr.writerow([r + 1, k, _fmt(self.sensitivities[r, k]), self.methods[r]])
        return buf.getvalue()


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def moment_analysis(
    surrogate: PddSurrogate,
    bindings: Sequence[DesignBinding] = (),
    Q: int = 4,
    option: str = "I",
    S_bar: int | None = None,
    m_bar: int | None = None,
    m_prime: int | Sequence[int] | None = None,
) -> MomentReport:
    """Moments of order ``1..Q`` and their sensitivities in one call.

    Orders 1 and 2 are analytic.  Orders above two use ``option``
    (``"I"``, ``"II"``, or ``"auto"`` which picks I when its grid fits).
    ``m_prime`` sets the score-expansion order for the analytic
    sensitivities (per binding or shared); by default it is chosen by
    :func:`default_m_prime`.
    """
    bindings = list(bindings)
    K = len(bindings)
    if isinstance(m_prime, (list, tuple)):
        mps = list(m_prime)
    else:
        mps = [m_prime if m_prime is not None else default_m_prime(b, surrogate.inputs, surrogate.m) for b in bindings]
    scores = [build_score_expansion(b, surrogate.inputs, mp) for b, mp in zip(bindings, mps)]
    moms = np.zeros(Q)
    sens = np.zeros((Q, K))
    methods = []
    moms[0] = surrogate.mean()
    sens[0] = mean_sensitivity(surrogate, scores)
    methods.append("analytic")
    if Q >= 2:
        moms[1] = surrogate.second_moment()
        sens[1] = second_moment_sensitivity(surrogate, scores)
        methods.append("analytic")
    high = list(range(3, Q + 1))
    if high:
        opt = str(option).upper()
        if opt == "AUTO":
            opt = "I" if _option1_cost(surrogate, high, 0, 0) <= OPTION_I_POINT_LIMIT else "II"
        if opt == "I":
            hm = option1_moments(surrogate, high)
            hs = option1_sensitivities(surrogate, high, bindings, hm)
            tag = "optionI"
        elif opt == "II":
            sb = surrogate.S if S_bar is None else S_bar
            mb = max(high) * surrogate.m if m_bar is None else m_bar
            fits = option2_expansions(surrogate, high, sb, mb, univariate_only=True)
            hm = {r: f.y_empty for r, f in fits.items()}
            hs = option2_sensitivities(fits, bindings, surrogate.inputs)
            tag = "optionII"
        else:
            raise MomentError(f"unknown option {option!r}")
        for a, r in enumerate(high):
            moms[r - 1] = hm[r]
            sens[r - 1] = hs[a]
            methods.append(tag)
    return MomentReport(moms, sens, methods, [b.name for b in bindings])
