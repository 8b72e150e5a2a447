"""Failure probability, CDF and their design sensitivities.

Two routes share one surrogate:

* saddlepoint approximation (SPA) of a fourth-order truncated cumulant
  generating function built from surrogate moments, with chain-rule
  sensitivities through the cumulants; and
* Monte Carlo sampling of the surrogate (never the original model) with
  score-function sensitivity estimators, for component and system events.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .distributions import DesignBinding, Marginal

SQRT_2PI = math.sqrt(2.0 * math.pi)
MCS_BLOCK = 1 << 15


class SaddlepointError(ValueError):
    """The threshold lies outside the range reachable by the saddlepoint."""

    def __init__(self, message: str, interval: tuple[float, float] | None = None):
        super().__init__(message if interval is None else f"{message}; attainable interval {interval}")
        self.interval = interval


class DegenerateVarianceError(ValueError):
    pass


def _phi(x):
    return np.exp(-0.5 * np.square(x)) / SQRT_2PI


# --------------------------------------------------------------------------
# cumulants and the truncated CGF
# --------------------------------------------------------------------------


def cumulants_from_raw(moments: Sequence[float]) -> np.ndarray:
    """Cumulants from raw moments by the standard recursion (no checks)."""
    m = np.asarray(moments, dtype=float)
    Q = len(m)
    k = np.zeros(Q)
    mm = np.concatenate(([1.0], m))
    for r in range(1, Q + 1):
        k[r - 1] = mm[r] - sum(math.comb(r - 1, p - 1) * k[p - 1] * mm[r - p] for p in range(1, r))
    return k


def cumulant_sensitivities(moments: Sequence[float], dmoments: np.ndarray) -> np.ndarray:
    """Derivatives of the cumulants given moment derivatives ``dmoments[r-1, k]``.

    Differentiates the moment recursion term by term, using the derivative
    of ``kappa_p`` inside the sum.
    """
    m = np.asarray(moments, dtype=float)
    dm = np.atleast_2d(np.asarray(dmoments, dtype=float))
    if dm.shape[0] != len(m):
        dm = dm.T
    Q = len(m)
    k = cumulants_from_raw(m)
    mm = np.concatenate(([1.0], m))
    dmm = np.vstack((np.zeros((1, dm.shape[1])), dm))
    dk = np.zeros_like(dm)
    for r in range(1, Q + 1):
        acc = dmm[r].copy()
        for p in range(1, r):
            c = math.comb(r - 1, p - 1)
            acc -= c * (dk[p - 1] * mm[r - p] + k[p - 1] * dmm[r - p])
        dk[r - 1] = acc
    return dk


@dataclass(frozen=True, eq=False)
class CgfModel:
    """Truncated cumulant generating function ``K(t) = sum_r kappa_r t^r / r!``."""

    kappa: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.kappa, dtype=float)
        if len(k) < 2:
            raise ValueError("need at least two cumulants")
        if len(k) > 4:
            raise ValueError("cumulant orders above four are not supported (no saddlepoint bracket)")
        if not k[1] > 0:
            raise DegenerateVarianceError("degenerate response variance")
        object.__setattr__(self, "kappa", k)

    @property
    def Q(self) -> int:
        return len(self.kappa)

    @property
    def k4(self) -> np.ndarray:
        """Cumulants padded with zeros to order four."""
        return np.concatenate((self.kappa, np.zeros(4 - self.Q)))

    def K(self, t):
        k1, k2, k3, k4 = self.k4
        return t * (k1 + t * (k2 / 2 + t * (k3 / 6 + t * k4 / 24)))

    def K1(self, t):
        k1, k2, k3, k4 = self.k4
        return k1 + t * (k2 + t * (k3 / 2 + t * k4 / 6))

    def K2(self, t):
        k1, k2, k3, k4 = self.k4
        return k2 + t * (k3 + t * k4 / 2)

    def K3(self, t):
        k1, k2, k3, k4 = self.k4
        return k3 + t * k4

    @property
    def limit_window(self) -> float:
        return 1e-5 * max(1.0, 1.0 / math.sqrt(self.kappa[1]))


def cumulants_from_moments(moments: Sequence[float]) -> CgfModel:
    """CGF model from raw moments ``m^(1..Q)``, ``2 <= Q <= 4``."""
    if len(moments) < 2:
        raise ValueError("need Q >= 2 moments")
    return CgfModel(cumulants_from_raw(moments))


# --------------------------------------------------------------------------
# saddlepoint bracket and solve
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SaddlepointBracket:
    t_l: float
    t_u: float
    case: int
    excluded_point: float | None = None

    def contains(self, t: float) -> bool:
        if self.excluded_point is not None and t == self.excluded_point:
            return False
        return self.t_l < t < self.t_u


def saddlepoint_bracket(cgf: CgfModel) -> SaddlepointBracket:
    """Interval around zero on which ``K''(t) > 0`` (eight cumulant cases).

    Finite endpoints are the roots of ``K''`` written in the cancellation-free
    form ``-2 kappa2 / (kappa3 +- sqrt(Delta))``.
    """
    _, k2, k3, k4 = cgf.k4
    inf = math.inf
    delta = k3 * k3 - 2.0 * k2 * k4
    if k4 > 0:
        if delta > 0:
            sq = math.sqrt(delta)
            if k3 > 0:
                return SaddlepointBracket(-2 * k2 / (k3 + sq), inf, 1)
            return SaddlepointBracket(-inf, -2 * k2 / (k3 - sq), 2)
        if delta == 0:
            # double root of K''; K' stays monotone but K'' vanishes there
            return SaddlepointBracket(-inf, inf, 3, -k3 / k4)
        return SaddlepointBracket(-inf, inf, 4)
    if k4 == 0:
        if k3 > 0:
            return SaddlepointBracket(-k2 / k3, inf, 5)
        if k3 == 0:
            return SaddlepointBracket(-inf, inf, 6)
        return SaddlepointBracket(-inf, -k2 / k3, 7)
    # k4 < 0: Delta > k3^2, so the two roots straddle zero
    q = -0.5 * (k3 + math.copysign(math.sqrt(delta), k3))
    # a vanishing k4 sends the outer root to +-inf, the correct limit
    with np.errstate(over="ignore"):
        r1, r2 = 2.0 * q / k4, k2 / q
    return SaddlepointBracket(min(r1, r2), max(r1, r2), 8)


def attainable_interval(cgf: CgfModel, bracket: SaddlepointBracket | None = None) -> tuple[float, float]:
    b = saddlepoint_bracket(cgf) if bracket is None else bracket
    lo = -math.inf if math.isinf(b.t_l) else float(cgf.K1(b.t_l))
    hi = math.inf if math.isinf(b.t_u) else float(cgf.K1(b.t_u))
    return lo, hi


def solve_saddlepoint(cgf: CgfModel, xi: float, bracket: SaddlepointBracket | None = None) -> float:
    """Unique root of ``K'(t) = xi`` inside the bracket.

    Safeguarded Newton iteration with bisection fallback; infinite bracket
    ends are replaced by expanding search.
    """
    b = saddlepoint_bracket(cgf) if bracket is None else bracket
    lo_val, hi_val = attainable_interval(cgf, b)
    if not lo_val < xi < hi_val:
        raise SaddlepointError("saddlepoint infeasible", (lo_val, hi_val))
    scale = 1.0 / math.sqrt(cgf.kappa[1])
    f = lambda t: float(cgf.K1(t)) - xi
    if f(0.0) == 0.0:
        return 0.0
    lo, hi = b.t_l, b.t_u
    # finite search bracket
    if math.isinf(lo) or math.isinf(hi):
        step = scale
        a = 0.0 if not math.isfinite(lo) else max(lo, min(0.0, hi))
        if f(a) > 0:
            hi = a if math.isinf(hi) else min(hi, a)
            x = a - step
            while f(x) > 0:
                step *= 2
                x = a - step
            lo = max(lo, x) if math.isfinite(lo) else x
        else:
            lo = a if math.isinf(lo) else max(lo, a)
            x = a + step
            while f(x) < 0:
                step *= 2
                x = a + step
            hi = min(hi, x) if math.isfinite(hi) else x
    t = 0.0 if lo < 0.0 < hi else 0.5 * (lo + hi)
    for _ in range(400):
        ft = f(t)
        if ft == 0.0:
            break
        if ft > 0:
            hi = t
        else:
            lo = t
        d = float(cgf.K2(t))
        t_new = t - ft / d if d > 0 else None
        if t_new is None or not lo < t_new < hi:
            t_new = 0.5 * (lo + hi)
        if abs(t_new - t) <= 2 * np.finfo(float).eps * max(abs(t), scale * 1e-300):
            t = t_new
            break
        if hi - lo <= 2 * np.finfo(float).eps * max(abs(lo), abs(hi)):
            t = t_new
            break
        t = t_new
    if b.excluded_point is not None and t == b.excluded_point:
        raise SaddlepointError("saddlepoint infeasible: at excluded point", (lo_val, hi_val))
    return t


# --------------------------------------------------------------------------
# SPA density, CDF and CDF sensitivity
# --------------------------------------------------------------------------


def _ab(cgf: CgfModel, t: float) -> tuple[float, float]:
    _, k2, k3, k4 = cgf.k4
    A = k2 + t * (2.0 * k3 / 3.0 + t * k4 / 4.0)
    B = float(cgf.K2(t))
    return A, B


def spa_pdf(cgf: CgfModel, xi: float) -> float:
    """Daniels saddlepoint density."""
    t = solve_saddlepoint(cgf, xi)
    return float(math.exp(float(cgf.K(t)) - t * xi) / math.sqrt(2 * math.pi * float(cgf.K2(t))))


@dataclass(frozen=True)
class SpaState:
    t: float
    w: float
    v: float
    cdf: float
    limit_branch: bool


def spa_state(cgf: CgfModel, xi: float) -> SpaState:
    """Lugannani-Rice CDF in a form that is regular at ``t = 0``.

    With ``A = 2 (t K' - K) / t^2`` and ``B = K''`` one has ``w = t sqrt(A)``,
    ``v = t sqrt(B)`` and ``1/w - 1/v = (kappa3/3 + kappa4 t/4) /
    (sqrt(A) sqrt(B) (sqrt(A) + sqrt(B)))``, which tends to the classical
    limit ``1/2 + kappa3 / (6 sqrt(2 pi) kappa2^1.5)`` at the mean.
    """
    t = solve_saddlepoint(cgf, xi)
    _, k2, k3, k4 = cgf.k4
    A, B = _ab(cgf, t)
    a, b = math.sqrt(A), math.sqrt(B)
    w, v = t * a, t * b
    corr = (k3 / 3.0 + k4 * t / 4.0) / (a * b * (a + b))
    F = float(special.ndtr(w)) + float(_phi(w)) * corr
    return SpaState(t, w, v, F, abs(t) < cgf.limit_window)


def spa_cdf(cgf: CgfModel, xi: float) -> float:
    return spa_state(cgf, xi).cdf


def spa_failure_probability(cgf: CgfModel) -> float:
    return spa_cdf(cgf, 0.0)


def _dt_dkappa(cgf: CgfModel, t: float) -> np.ndarray:
    B = float(cgf.K2(t))
    return np.array([-(t ** (r - 1)) / math.factorial(r - 1) / B for r in range(1, 5)])


def spa_cdf_kappa_gradient(cgf: CgfModel, xi: float, method: str = "auto") -> np.ndarray:
    """``dF/dkappa_r`` for ``r = 1..4`` at fixed ``xi``.

    ``method="chain"`` follows the printed chain rule through ``w`` and ``v``;
    ``method="stable"`` differentiates the regularized form, valid at
    ``t = 0`` too; ``"auto"`` uses the chain rule outside the limit window.
    """
    st = spa_state(cgf, xi)
    t = st.t
    if method == "auto":
        method = "stable" if st.limit_branch else "chain"
    dt = _dt_dkappa(cgf, t)
    _, k2, k3, k4 = cgf.k4
    B = float(cgf.K2(t))
    K3 = float(cgf.K3(t))
    g = np.zeros(4)
    if method == "chain":
        w, v = st.w, st.v
        pw = float(_phi(w))
        Fw = pw * (w / v - 1.0 / (w * w))
        Fv = pw / (v * v)
        for r in range(1, 5):
            dK = t**r / math.factorial(r)
            dw = -dK / w
            dK2 = t ** (r - 2) / math.factorial(r - 2) if r >= 2 else 0.0
            dv = math.sqrt(B) * dt[r - 1] + t / (2 * math.sqrt(B)) * (dK2 + K3 * dt[r - 1])
            g[r - 1] = Fw * dw + Fv * dv
        return g
    if method != "stable":
        raise ValueError(f"unknown method {method!r}")
    A, _ = _ab(cgf, t)
    a, b = math.sqrt(A), math.sqrt(B)
    w = t * a
    num = k3 / 3.0 + k4 * t / 4.0
    den = a * b * (a + b)
    R = num / den
    pw = float(_phi(w))
    for r in range(1, 5):
        e = np.zeros(4)
        e[r - 1] = 1.0
        d = dt[r - 1]
        dA = e[1] + (2.0 / 3.0) * (e[2] * t + k3 * d) + 0.25 * (e[3] * t * t + 2 * k4 * t * d)
        dB = e[1] + e[2] * t + k3 * d + 0.5 * e[3] * t * t + k4 * t * d
        da, db = dA / (2 * a), dB / (2 * b)
        dw = a * d + t * da
        dnum = e[2] / 3.0 + 0.25 * (e[3] * t + k4 * d)
        dden = da * b * (a + b) + a * db * (a + b) + a * b * (da + db)
        dR = dnum / den - num * dden / den**2
        g[r - 1] = pw * ((1.0 - w * R) * dw + dR)
    return g


def spa_cdf_sensitivity(
    cgf: CgfModel,
    moments: Sequence[float],
    dmoments: np.ndarray,
    xi: float = 0.0,
    method: str = "auto",
) -> np.ndarray:
    """Design sensitivities of the SPA CDF at ``xi``.

    ``dmoments[r-1, k]`` holds ``d m^(r) / d d_k``.
    """
    dk = cumulant_sensitivities(moments, dmoments)
    g = spa_cdf_kappa_gradient(cgf, xi, method)[: len(moments)]
    return g @ dk


@dataclass
class ReliabilityReport:
    """Failure probability (or CDF value) with design sensitivities."""

    method: str
    p_f: float
    sensitivities: np.ndarray
    design_names: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "p_f": float(self.p_f),
            "sensitivities": [float(v) for v in np.atleast_1d(self.sensitivities)],
            "design_names": list(self.design_names),
            "diagnostics": _jsonable(self.diagnostics),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\r\n")
        wr.writerow(["quantity", "design_index", "name", "value", "std_error"])
        se = self.diagnostics.get("std_error", "")
        wr.writerow(["p_f", "", "", _fmt(self.p_f), _fmt(se) if se != "" else ""])
        sse = self.diagnostics.get("sensitivity_std_error")
        for k, v in enumerate(np.atleast_1d(self.sensitivities)):
            name = self.design_names[k] if k < len(self.design_names) else ""
            wr.writerow(["dp_f", k, name, _fmt(v), _fmt(sse[k]) if sse is not None else ""])
        return buf.getvalue()


def _fmt(v) -> str:
    return format(float(v), ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def spa_analysis(moments: Sequence[float], dmoments: np.ndarray, xi: float = 0.0, names=()) -> ReliabilityReport:
    """SPA estimate of ``P[y <= xi]`` and its design sensitivities."""
    cgf = cumulants_from_moments(moments)
    br = saddlepoint_bracket(cgf)
    st = spa_state(cgf, xi)
    sens = spa_cdf_sensitivity(cgf, moments, dmoments, xi)
    diag = {
        "saddlepoint": st.t,
        "bracket": [br.t_l, br.t_u],
        "case": br.case,
        "excluded_point": br.excluded_point,
        "limit_branch": st.limit_branch,
        "cumulants": cgf.kappa,
        "xi": xi,
    }
    return ReliabilityReport("PDD-SPA", st.cdf, np.asarray(sens), list(names), diag)


# --------------------------------------------------------------------------
# Monte Carlo on the surrogate
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EventSpec:
    """Failure event: ``component`` {y < 0}, ``series`` (union) or ``parallel`` (intersection)."""

    kind: str = "component"

    def __post_init__(self):
        if self.kind not in ("component", "series", "parallel"):
            raise ValueError(f"unknown event kind {self.kind!r}")

    def indicator(self, Y: np.ndarray) -> np.ndarray:
        Y = np.asarray(Y)
        if Y.ndim == 1:
            Y = Y[:, None]
        if self.kind == "component":
            if Y.shape[1] != 1:
                raise ValueError("component event takes one response")
            return Y[:, 0] < 0
        if self.kind == "series":
            return np.any(Y < 0, axis=1)
        return np.all(Y < 0, axis=1)


def sample_block(inputs: Sequence[Marginal], seed: int, block: int, size: int) -> np.ndarray:
    """Input samples of one block; the stream depends only on ``(seed, block)``."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(block)])))
    U = rng.random((size, len(inputs)))
    X = np.empty_like(U)
    for i, mg in enumerate(inputs):
        X[:, i] = mg.ppf(U[:, i])
    return X


def _blocks(L: int):
    nb = -(-L // MCS_BLOCK)
    return [(b, min(MCS_BLOCK, L - b * MCS_BLOCK)) for b in range(nb)]


def _run_blocks(fn: Callable[[int, int], tuple], L: int, threads: int | None):
    blocks = _blocks(L)
    if threads is None or threads <= 1 or len(blocks) == 1:
        parts = [fn(b, n) for b, n in blocks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda bn: fn(*bn), blocks))
    # fixed-order reduction keeps results independent of the worker count
    total = [np.zeros_like(np.asarray(p, dtype=float)) for p in parts[0]]
    for p in parts:
        for j, v in enumerate(p):
            total[j] = total[j] + v
    return total


def _score_matrix(bindings: Sequence[DesignBinding], inputs, X) -> np.ndarray:
    if not bindings:
        return np.zeros((X.shape[0], 0))
    return np.stack([b.score(inputs, X) for b in bindings], axis=1)


def _surrogate_response(surrogates) -> Callable[[np.ndarray], np.ndarray]:
    surrogates = list(surrogates)

    def fn(X):
        return np.stack([s.evaluate(X) for s in surrogates], axis=1)

    return fn


def _model_response(model) -> Callable[[np.ndarray], np.ndarray]:
    f = model.evaluate_batch if hasattr(model, "evaluate_batch") else model

    def fn(X):
        Y = np.asarray(f(X), dtype=float)
        return Y[:, None] if Y.ndim == 1 else Y

    return fn


def probability_by_sampling(
    response: Callable[[np.ndarray], np.ndarray],
    inputs: Sequence[Marginal],
    event: EventSpec,
    L: int,
    seed: int,
    bindings: Sequence[DesignBinding] = (),
    threads: int | None = 1,
    method: str = "PDD-MCS",
) -> ReliabilityReport:
    """Indicator mean and score-weighted indicator means in one sampling pass."""
    if L < 1:
        raise ValueError("L must be positive")
    bindings = list(bindings)
    for b in bindings:
        b.validate(inputs)
    K = len(bindings)

    def work(block, n):
        X = sample_block(inputs, seed, block, n)
        I = event.indicator(response(X)).astype(float)
        Sc = _score_matrix(bindings, inputs, X)
        IS = I[:, None] * Sc
        return (np.array([I.sum()]), IS.sum(axis=0), (IS * IS).sum(axis=0))

    s1, sk, sk2 = _run_blocks(work, L, threads)
    p = float(s1[0] / L)
    sens = sk / L
    var = np.maximum(sk2 / L - sens**2, 0.0)
    diag = {
        "samples": L,
        "seed": seed,
        "std_error": math.sqrt(p * (1 - p) / L),
        "sensitivity_std_error": np.sqrt(var / L) if K else np.zeros(0),
        "event": event.kind,
    }
    return ReliabilityReport(method, p, sens, [b.name for b in bindings], diag)


def mcs_failure_probability(
    event: EventSpec,
    surrogates,
    L: int,
    seed: int,
    bindings: Sequence[DesignBinding] = (),
    threads: int | None = 1,
) -> ReliabilityReport:
    """PDD-MCS failure probability (and sensitivities when bindings are given)."""
    surrogates = [surrogates] if not isinstance(surrogates, (list, tuple)) else list(surrogates)
    inputs = surrogates[0].inputs
    return probability_by_sampling(_surrogate_response(surrogates), inputs, event, L, seed, bindings, threads)


def mcs_sensitivity(event, surrogates, bindings, L: int, seed: int, threads: int | None = 1) -> np.ndarray:
    return mcs_failure_probability(event, surrogates, L, seed, bindings, threads).sensitivities


@dataclass
class CdfReport:
    xi: np.ndarray
    cdf: np.ndarray
    se: np.ndarray
    sensitivities: np.ndarray
    design_names: list = field(default_factory=list)
    method: str = "PDD-MCS"

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\r\n")
        K = self.sensitivities.shape[1]
        names = [self.design_names[k] if k < len(self.design_names) and self.design_names[k] else f"d{k}" for k in range(K)]
        wr.writerow(["xi", "cdf", "se"] + [f"dcdf_{n}" for n in names])
        for g in range(len(self.xi)):
            wr.writerow([_fmt(self.xi[g]), _fmt(self.cdf[g]), _fmt(self.se[g])] + [_fmt(v) for v in self.sensitivities[g]])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return _jsonable(
            {
                "method": self.method,
                "xi": self.xi,
                "cdf": self.cdf,
                "se": self.se,
                "sensitivities": self.sensitivities,
                "design_names": self.design_names,
            }
        )


def cdf_by_sampling(
    response: Callable[[np.ndarray], np.ndarray],
    inputs: Sequence[Marginal],
    xi_grid: Sequence[float],
    L: int,
    seed: int,
    bindings: Sequence[DesignBinding] = (),
    threads: int | None = 1,
    method: str = "PDD-MCS",
) -> CdfReport:
    xi = np.asarray(xi_grid, dtype=float)
    bindings = list(bindings)

    def work(block, n):
        X = sample_block(inputs, seed, block, n)
        y = response(X)[:, 0]
        I = (y[:, None] <= xi[None, :]).astype(float)
        Sc = _score_matrix(bindings, inputs, X)
        return (I.sum(axis=0), Sc.T @ I)

    s1, sk = _run_blocks(work, L, threads)
    F = s1 / L
    return CdfReport(xi, F, np.sqrt(F * (1 - F) / L), (sk / L).T, [b.name for b in bindings], method)


def mcs_cdf(surrogate, xi_grid, bindings=(), L: int = 10**6, seed: int = 0, threads: int | None = 1) -> CdfReport:
    """PDD-MCS CDF of one surrogate on a grid, with score-function sensitivities."""
    return cdf_by_sampling(_surrogate_response([surrogate]), surrogate.inputs, xi_grid, L, seed, bindings, threads)


def crude_mcs_sf(model, inputs, event: EventSpec, L: int, seed: int, bindings=(), threads=1) -> ReliabilityReport:
    """Crude MCS with score-function sensitivities on the original model."""
    return probability_by_sampling(_model_response(model), inputs, event, L, seed, bindings, threads, "crude MCS/SF")


def crude_mcs_sf_cdf(model, inputs, xi_grid, L: int, seed: int, bindings=(), threads=1) -> CdfReport:
    return cdf_by_sampling(_model_response(model), inputs, xi_grid, L, seed, bindings, threads, "crude MCS/SF")


def crude_mcs_fd(
    model, inputs, event: EventSpec, L: int, seed: int, bindings=(), threads=1, rel_step: float = 0.01
) -> ReliabilityReport:
    """Crude MCS with forward finite differences (common random numbers)."""
    resp = _model_response(model)
    base = probability_by_sampling(resp, inputs, event, L, seed, (), threads, "crude MCS/FD")
    sens = np.zeros(len(bindings))
    for k, b in enumerate(bindings):
        d = b.value(inputs)
        h = rel_step * (abs(d) if d != 0 else 1.0)
        pert = b.perturbed(inputs, h)
        sens[k] = (probability_by_sampling(resp, pert, event, L, seed, (), threads).p_f - base.p_f) / h
    base.sensitivities = sens
    base.design_names = [b.name for b in bindings]
    base.diagnostics["relative_step"] = rel_step
    base.diagnostics["model_evaluations"] = L * (1 + len(bindings))
    return base
