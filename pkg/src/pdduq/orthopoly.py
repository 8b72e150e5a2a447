"""Measure-consistent orthonormal polynomials and Gauss quadrature.

Every marginal is mapped to a standardized coordinate ``z = (x - loc) / scale``
(see :attr:`Marginal.standardization`) and the three-term recurrence is stored
in that coordinate.  Gaussian, Exponential and Uniform marginals use the
Hermite, Laguerre and Legendre recurrences in closed form; every other kind
runs a discretized Stieltjes procedure on a dense composite Gauss-Legendre
rule laid out in a variable where the density is smooth.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, special

from .distributions import (
    Exponential,
    Gaussian,
    Lognormal,
    Marginal,
    TruncatedGaussian,
    Uniform,
    Weibull,
)

_PANEL_POINTS = 50
_LOG_DROP = 45.0
_STABLE_TOL = 1e-10


class MeasureError(ArithmeticError):
    """Raised when a recurrence cannot be built for the requested degree."""


@dataclass(frozen=True, eq=False)
class RecurrenceTable:
    """Recurrence coefficients of the orthonormal basis in standardized form.

    ``sqrt(beta[j+1]) psi_{j+1}(z) = (z - alpha[j]) psi_j(z) - sqrt(beta[j]) psi_{j-1}(z)``
    with ``beta[0] = 1`` (the mass of a probability measure).
    """

    alpha: np.ndarray
    beta: np.ndarray
    loc: float = 0.0
    scale: float = 1.0
    family: str = "stieltjes"
    symmetric: bool = False

    @property
    def m_max(self) -> int:
        return len(self.alpha) - 1

    @property
    def alpha_x(self) -> np.ndarray:
        """Recurrence coefficients expressed in the original coordinate."""
        return self.loc + self.scale * self.alpha

    @property
    def beta_x(self) -> np.ndarray:
        b = self.scale**2 * self.beta
        b[0] = self.beta[0]
        return b

    def standardize(self, x):
        return (np.asarray(x, dtype=float) - self.loc) / self.scale

    def evaluate(self, x, degree: int) -> np.ndarray:
        """Values of ``psi_0 .. psi_degree`` at ``x``; shape ``x.shape + (degree+1,)``."""
        if degree > self.m_max:
            raise ValueError(f"degree {degree} exceeds table size {self.m_max}")
        z = self.standardize(x)
        out = np.empty(z.shape + (degree + 1,))
        out[..., 0] = 1.0
        if degree >= 1:
            sb = np.sqrt(self.beta)
            out[..., 1] = (z - self.alpha[0]) / sb[1]
            for j in range(1, degree):
                out[..., j + 1] = ((z - self.alpha[j]) * out[..., j] - sb[j] * out[..., j - 1]) / sb[j + 1]
        return out


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Gauss rule for one marginal; ``nodes`` are in the original coordinate."""

    nodes: np.ndarray
    weights: np.ndarray
    z: np.ndarray = field(repr=False, default=None)

    @property
    def n(self) -> int:
        return len(self.nodes)


def eval_orthonormal(table: RecurrenceTable, degree: int, x):
    """Value of the orthonormal polynomial of the given degree at ``x``."""
    if degree < 0 or degree > table.m_max:
        raise ValueError(f"degree {degree} outside 0..{table.m_max}")
    v = table.evaluate(x, degree)[..., degree]
    return v if v.ndim else float(v)


# --------------------------------------------------------------------------
# recurrence construction
# --------------------------------------------------------------------------


def build_recurrence(marginal: Marginal, m_max: int) -> RecurrenceTable:
    """Recurrence coefficients of ``psi_0 .. psi_{m_max}`` for ``marginal``.

    The table carries ``m_max + 1`` entries of alpha and beta, enough for
    Gauss rules of up to ``m_max + 1`` nodes.
    """
    if m_max < 0:
        raise ValueError("m_max must be non-negative")
    size = max(24, 8 * math.ceil((m_max + 1) / 8))
    full = _cached_recurrence(marginal, size)
    if m_max + 1 > len(full.alpha):
        full = _cached_recurrence(marginal, m_max + 1)
    return RecurrenceTable(
        full.alpha[: m_max + 1].copy(),
        full.beta[: m_max + 1].copy(),
        full.loc,
        full.scale,
        full.family,
        full.symmetric,
    )


@functools.lru_cache(maxsize=512)
def _cached_recurrence(marginal: Marginal, size: int) -> RecurrenceTable:
    loc, scale = marginal.standardization
    j = np.arange(size, dtype=float)
    if isinstance(marginal, Gaussian):
        alpha, beta, family = np.zeros(size), j.copy(), "hermite"
    elif isinstance(marginal, Exponential):
        alpha, beta, family = 2 * j + 1, j * j, "laguerre"
    elif isinstance(marginal, Uniform):
        alpha, beta, family = np.zeros(size), j * j / (4 * j * j - 1), "legendre"
    else:
        z, w = _stable_dense_rule(marginal, size)
        alpha, beta = stieltjes(z, w, size)
        family = "stieltjes"
        if marginal.symmetric:
            alpha = np.zeros(size)
    beta = np.asarray(beta, dtype=float)
    beta[0] = 1.0
    if np.any(beta[1:] <= 0) or not np.all(np.isfinite(beta)):
        raise MeasureError("measure not positive-definite at requested degree")
    alpha.setflags(write=False)
    beta.setflags(write=False)
    return RecurrenceTable(alpha, beta, float(loc), float(scale), family, marginal.symmetric)


def stieltjes(z: np.ndarray, w: np.ndarray, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Discretized Stieltjes procedure on the discrete measure ``(z, w)``."""
    if size > len(z):
        raise MeasureError("discrete measure too small for requested degree")
    alpha = np.zeros(size)
    beta = np.zeros(size)
    beta[0] = w.sum()
    # work with sqrt(w) * psi_k, whose entries are bounded by one
    q_prev = np.zeros_like(z)
    q = np.sqrt(w / beta[0])
    for k in range(size):
        alpha[k] = np.dot(z * q, q)
        if k + 1 == size:
            break
        r = (z - alpha[k]) * q - (math.sqrt(beta[k]) if k else 0.0) * q_prev
        beta[k + 1] = np.dot(r, r)
        if not beta[k + 1] > 0:
            raise MeasureError("measure not positive-definite at requested degree")
        q_prev, q = q, r / math.sqrt(beta[k + 1])
    return alpha, beta


def dense_rule(marginal: Marginal, degree: int, panels: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Dense discrete measure ``(z, w)`` in standardized coordinates.

    The rule integrates smooth functions times polynomials of degree up to
    about ``2 * degree`` against the marginal to near machine precision.
    """
    return _stable_dense_rule(marginal, degree) if panels is None else _dense_rule(marginal, degree, panels)


@functools.lru_cache(maxsize=256)
def _stable_dense_rule(marginal: Marginal, degree: int) -> tuple[np.ndarray, np.ndarray]:
    panels = 8
    z, w = _dense_rule(marginal, degree, panels)
    a0, b0 = stieltjes(z, w, degree + 1)
    for _ in range(8):
        panels *= 2
        z2, w2 = _dense_rule(marginal, degree, panels)
        a1, b1 = stieltjes(z2, w2, degree + 1)
        da = np.max(np.abs(a1 - a0) / np.maximum(1.0, np.abs(a1)))
        db = np.max(np.abs(b1 - b0) / np.maximum(1.0, np.abs(b1)))
        z, w, a0, b0 = z2, w2, a1, b1
        if max(da, db) < _STABLE_TOL:
            break
    z.setflags(write=False)
    w.setflags(write=False)
    return z, w


def _natural(marginal: Marginal):
    """(log-density in t, map t -> z, finite t-interval or None)."""
    loc, scale = marginal.standardization
    half_log_2pi = 0.5 * math.log(2 * math.pi)
    if isinstance(marginal, Gaussian):
        return (lambda t: -0.5 * t * t - half_log_2pi), (lambda t: t), None
    if isinstance(marginal, Lognormal):
        mt, st = marginal.mu_tilde, marginal.sigma_tilde
        return (lambda t: -0.5 * t * t - half_log_2pi), (lambda t: (np.exp(mt + st * t) - loc) / scale), None
    if isinstance(marginal, (Weibull, Exponential)):
        if isinstance(marginal, Exponential):
            lam, k = 1.0 / marginal.rate, 1.0
        else:
            lam, k = marginal.scale, marginal.shape
        return (lambda t: math.log(k) + k * t - np.exp(k * t)), (lambda t: (lam * np.exp(t) - loc) / scale), None
    if isinstance(marginal, TruncatedGaussian):
        b = marginal.half_width / marginal.sigma
        lm = math.log(float(special.ndtr(b) - special.ndtr(-b)))
        return (lambda t: -0.5 * t * t - half_log_2pi - lm), (lambda t: t), (-b, b)
    if isinstance(marginal, Uniform):
        return (lambda t: np.full_like(t, -math.log(2.0))), (lambda t: t), (-1.0, 1.0)
    raise TypeError(f"unsupported marginal {marginal!r}")


def _interval(logp, zmap, degree: int) -> tuple[float, float]:
    half = 20.0
    for _ in range(12):
        t = np.linspace(-half, half, 8001)
        with np.errstate(over="ignore", invalid="ignore"):
            lp = logp(t)
            lz = np.log1p(np.abs(zmap(t)))
        keep = np.zeros(t.shape, dtype=bool)
        # union of the regions that matter for every polynomial weight |z|^k
        for k in range(2 * degree + 1):
            g = lp + k * lz
            g = np.where(np.isfinite(g), g, -np.inf)
            keep |= g >= g.max() - _LOG_DROP
        idx = np.nonzero(keep)[0]
        lo_i, hi_i = idx[0], idx[-1]
        if lo_i > 0 and hi_i < len(t) - 1:
            step = t[1] - t[0]
            return t[lo_i] - step, t[hi_i] + step
        half *= 2
    raise MeasureError("could not bracket the effective support")


def _dense_rule(marginal: Marginal, degree: int, panels: int) -> tuple[np.ndarray, np.ndarray]:
    logp, zmap, fixed = _natural(marginal)
    a, b = fixed if fixed is not None else _interval(logp, zmap, degree)
    gx, gw = np.polynomial.legendre.leggauss(_PANEL_POINTS)
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    t = (mid + half * gx).ravel()
    w = (half * gw).ravel() * np.exp(logp(t))
    keep = w > 0
    t, w = t[keep], w[keep]
    return zmap(t), w / w.sum()


# --------------------------------------------------------------------------
# Gauss rules
# --------------------------------------------------------------------------


def gauss_rule(table: RecurrenceTable, n: int) -> QuadratureRule:
    """n-point Gauss rule from the Jacobi matrix (Golub-Welsch)."""
    if n < 1 or n > table.m_max + 1:
        raise ValueError(f"n={n} needs a recurrence table with m_max >= {n - 1}")
    a = np.asarray(table.alpha[:n], dtype=float)
    off = np.sqrt(table.beta[1:n])
    if n == 1:
        z, v0 = a.copy(), np.ones(1)
    else:
        try:
            z, vecs = linalg.eigh_tridiagonal(a, off)
        except linalg.LinAlgError as exc:
            raise MeasureError(f"Jacobi eigenproblem did not converge: {exc}") from None
        v0 = vecs[0]
    w = table.beta[0] * v0 * v0
    if table.symmetric:
        z = 0.5 * (z - z[::-1])
        w = 0.5 * (w + w[::-1])
        if n % 2:
            z[n // 2] = 0.0
    w = w / w.sum()
    x = table.loc + table.scale * z
    return QuadratureRule(x, w, z)


@functools.lru_cache(maxsize=1024)
def marginal_gauss_rule(marginal: Marginal, n: int) -> QuadratureRule:
    """Cached Gauss rule of ``n`` points for a marginal."""
    return gauss_rule(build_recurrence(marginal, max(n - 1, 1)), n)


@functools.lru_cache(maxsize=1024)
def marginal_basis(marginal: Marginal, m_max: int) -> RecurrenceTable:
    return build_recurrence(marginal, m_max)


# --------------------------------------------------------------------------
# triple products
# --------------------------------------------------------------------------


def _dfact(n: int) -> int:
    return 1 if n <= 0 else math.prod(range(n, 0, -2))


def _hermite_triple(j1: int, j2: int, j3: int) -> float:
    s = j1 + j2 + j3
    if s % 2:
        return 0.0
    q = s // 2
    if max(j1, j2, j3) > q:
        return 0.0
    num = math.sqrt(math.factorial(j1) * math.factorial(j2) * math.factorial(j3))
    den = math.factorial(q - j1) * math.factorial(q - j2) * math.factorial(q - j3)
    return num / den


def _laguerre_triple(j1: int, j2: int, j3: int) -> float:
    if not abs(j1 - j2) <= j3 <= j1 + j2:
        return 0.0
    vmin = math.ceil((j1 + j2 + 1 - j3) / 2)
    vmax = min(j1, j2, j1 + j2 - j3)
    total = 0.0
    for v in range(vmin, vmax + 1):
        e = j3 - j1 - j2 + 2 * v
        if e < 0 or e > v:
            continue
        total += math.factorial(j1 + j2 - v) * 2.0**e / (
            math.factorial(v) * math.factorial(j1 - v) * math.factorial(j2 - v)
        ) * math.comb(v, e)
    return (-1) ** (j1 + j2 + j3) * total


def _legendre_triple(j1: int, j2: int, j3: int) -> float:
    s = j1 + j2 + j3
    if s % 2 or not abs(j1 - j2) <= j3 <= j1 + j2:
        return 0.0
    pre = 0.5 * math.sqrt(2 * (2 * j1 + 1) * (2 * j2 + 1) * (2 * j3 + 1))
    num = _dfact(j1 + j2 - j3 - 1) * _dfact(j2 + j3 - j1 - 1) * _dfact(s) * _dfact(j1 + j3 - j2 - 1)
    den = _dfact(j1 + j2 - j3) * _dfact(j2 + j3 - j1) * _dfact(s + 1) * _dfact(j1 + j3 - j2)
    return pre * num / den


_CLOSED_FORMS = {"hermite": _hermite_triple, "laguerre": _laguerre_triple, "legendre": _legendre_triple}
_REFERENCE = {"hermite": Gaussian(), "laguerre": Exponential(), "legendre": Uniform()}
VALIDATION_MAX_DEGREE = 8


def triple_product_oracle(table: RecurrenceTable, j1: int, j2: int, j3: int) -> float:
    """E[psi_j1 psi_j2 psi_j3] by a Gauss rule that is exact for the product."""
    n = math.ceil((j1 + j2 + j3 + 1) / 2)
    rule = gauss_rule(table, n)
    top = max(j1, j2, j3)
    p = table.evaluate(rule.nodes, top)
    return float(np.sum(rule.weights * p[:, j1] * p[:, j2] * p[:, j3]))


@functools.lru_cache(maxsize=None)
def closed_form_validated(family: str) -> bool:
    """Whether the closed form for ``family`` agrees with the quadrature oracle.

    Checked once for all degree triples up to ``VALIDATION_MAX_DEGREE`` to 1e-9.
    """
    if family not in _CLOSED_FORMS:
        return False
    f = _CLOSED_FORMS[family]
    table = build_recurrence(_REFERENCE[family], 2 * VALIDATION_MAX_DEGREE)
    top = VALIDATION_MAX_DEGREE + 1
    for j1 in range(top):
        for j2 in range(j1, top):
            for j3 in range(j2, top):
                ref = triple_product_oracle(table, j1, j2, j3)
                if abs(f(j1, j2, j3) - ref) > 1e-9 * max(1.0, abs(ref)):
                    return False
    return True


def triple_product(table: RecurrenceTable, j1: int, j2: int, j3: int) -> float:
    """E[psi_j1 psi_j2 psi_j3] under the measure that generated ``table``.

    Selection-rule zeros are returned exactly.  Closed forms are used for the
    Hermite, Laguerre and Legendre families only if they reproduce the
    quadrature oracle; otherwise the oracle is evaluated directly.
    """
    j1, j2, j3 = sorted((int(j1), int(j2), int(j3)))
    if min(j1, j2, j3) < 0:
        raise ValueError("degrees must be non-negative")
    if j3 > j1 + j2:
        return 0.0
    if table.symmetric and (j1 + j2 + j3) % 2:
        return 0.0
    if j1 == 0:
        return 1.0 if j2 == j3 else 0.0
    if table.family in _CLOSED_FORMS and closed_form_validated(table.family):
        return _CLOSED_FORMS[table.family](j1, j2, j3)
    need = math.ceil((j1 + j2 + j3 + 1) / 2)
    if table.m_max + 1 < need:
        raise ValueError(f"recurrence table too small; need m_max >= {need - 1}")
    return triple_product_oracle(table, j1, j2, j3)


def triple_product_tensor(table: RecurrenceTable, m: int, m_prime: int) -> np.ndarray:
    """Array ``T[a, b, c] = E[psi_a psi_b psi_c]`` for a, b <= m and c <= m_prime."""
    out = np.zeros((m + 1, m + 1, m_prime + 1))
    for a in range(m + 1):
        for b in range(a, m + 1):
            for c in range(m_prime + 1):
                v = triple_product(table, a, b, c)
                out[a, b, c] = out[b, a, c] = v
    return out
