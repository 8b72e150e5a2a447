"""Truncated polynomial dimensional decomposition (PDD) surrogates.

The surrogate is

    y_S,m(x) = y0 + sum_{u, j} C_{u j} prod_p psi_{u_p j_p}(x_{u_p})

over variable subsets ``u`` with ``1 <= |u| <= S`` and degrees ``1 <= j_p <= m``.
Coefficients are estimated by dimension-reduction integration: an
alternating binomial sum of at most R-dimensional tensor Gauss integrals
anchored at a reference point.  Variable indices are 0-based.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .distributions import Marginal, marginal_from_dict
from .orthopoly import RecurrenceTable, marginal_basis, marginal_gauss_rule

_EVAL_BLOCK = 20_000


class ModelEvaluationError(RuntimeError):
    """A model evaluation failed; ``point`` holds the offending input."""

    def __init__(self, message: str, point: np.ndarray):
        super().__init__(f"{message} at x = {np.array2string(point, precision=17)}")
        self.point = point


@dataclass(frozen=True, order=True)
class TermKey:
    """Index of one PDD coefficient: a variable subset and matching degrees."""

    subset: tuple[int, ...]
    degrees: tuple[int, ...]

    def __post_init__(self):
        if len(self.subset) != len(self.degrees) or not self.subset:
            raise ValueError("subset and degrees must be non-empty and of equal length")
        if any(b <= a for a, b in zip(self.subset, self.subset[1:])):
            raise ValueError("subset must be strictly increasing")
        if min(self.degrees) < 1:
            raise ValueError("degrees must be at least one")

    @property
    def order(self) -> int:
        return len(self.subset)


def term_count(N: int, S: int, m: int) -> int:
    """Number of non-constant terms, sum_{k=1..S} C(N, k) m^k."""
    return sum(math.comb(N, k) * m**k for k in range(1, S + 1))


def evaluation_bound(N: int, R: int, n: int) -> int:
    """Upper bound on distinct model evaluations, sum_{k=0..R} C(N, k) n^k."""
    return sum(math.comb(N, k) * n**k for k in range(0, R + 1))


def enumerate_terms(N: int, S: int, m: int) -> list[TermKey]:
    """All term keys with ``|u| <= S`` and degrees in ``1..m``.

    Ordered by subset size, then subsets lexicographically, then degree
    tuples lexicographically.
    """
    if not 1 <= S <= N or m < 1:
        raise ValueError("need 1 <= S <= N and m >= 1")
    out = []
    for k in range(1, S + 1):
        for u in itertools.combinations(range(N), k):
            for j in itertools.product(range(1, m + 1), repeat=k):
                out.append(TermKey(u, j))
    return out


def _subset_offsets(N: int, S: int, m: int) -> dict[tuple[int, ...], int]:
    offsets, pos = {}, 0
    for k in range(1, S + 1):
        for u in itertools.combinations(range(N), k):
            offsets[u] = pos
            pos += m**k
    return offsets


def reduction_weight(N: int, R: int, size: int) -> int:
    """Weight of a |v| = size integral in R-variate dimension reduction."""
    i = R - size
    a = N - R + i - 1
    if a < 0:
        return 1 if i == 0 else 0
    return (-1) ** i * math.comb(a, i)


@dataclass(eq=False)
class PddSurrogate:
    """PDD surrogate of one scalar response."""

    inputs: tuple[Marginal, ...]
    S: int
    m: int
    y_empty: float
    coeffs: np.ndarray
    R: int | None = None
    n: int | None = None
    reference: np.ndarray | None = None
    n_evaluations: int = 0
    _offsets: dict = field(default=None, init=False, repr=False)
    _tables: list = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.inputs = tuple(self.inputs)
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if len(self.coeffs) != term_count(self.N, self.S, self.m):
            raise ValueError("coefficient vector does not match (N, S, m)")
        self._offsets = _subset_offsets(self.N, self.S, self.m)
        self._tables = [marginal_basis(x, self.m) for x in self.inputs]
        self._Q = None

    # ---- structure ---------------------------------------------------------
    @property
    def N(self) -> int:
        return len(self.inputs)

    @property
    def terms(self) -> list[TermKey]:
        return enumerate_terms(self.N, self.S, self.m)

    @property
    def tables(self) -> list[RecurrenceTable]:
        return self._tables

    def block(self, subset: Sequence[int]) -> np.ndarray:
        """Coefficients of one subset as an array of shape ``(m,) * |u|``."""
        u = tuple(subset)
        start = self._offsets[u]
        k = len(u)
        return self.coeffs[start : start + self.m**k].reshape((self.m,) * k)

    def coefficient(self, key: TermKey) -> float:
        return float(self.block(key.subset)[tuple(j - 1 for j in key.degrees)])

    def univariate(self) -> np.ndarray:
        """Matrix ``U[i, j-1] = C_{{i}, j}`` of univariate coefficients."""
        return self.coeffs[: self.N * self.m].reshape(self.N, self.m)

    def subsets(self, order: int | None = None):
        for u in self._offsets:
            if order is None or len(u) == order:
                yield u

    # ---- moments -----------------------------------------------------------
    def mean(self) -> float:
        return float(self.y_empty)

    def variance(self) -> float:
        return float(np.dot(self.coeffs, self.coeffs))

    def second_moment(self) -> float:
        return float(self.y_empty**2 + self.variance())

    # ---- evaluation --------------------------------------------------------
    def basis_values(self, x: np.ndarray) -> np.ndarray:
        """``P[b, i, j] = psi_{i j}(x[b, i])`` for ``j = 0..m``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        P = np.empty(x.shape + (self.m + 1,))
        for i, t in enumerate(self._tables):
            P[:, i, :] = t.evaluate(x[:, i], self.m)
        return P

    def _bivariate_matrix(self) -> np.ndarray:
        N, m = self.N, self.m
        Q = np.zeros((N * m, N * m))
        for u in self.subsets(2):
            a, b = u
            Q[a * m : (a + 1) * m, b * m : (b + 1) * m] = self.block(u)
        return Q

    def evaluate_basis(self, P: np.ndarray) -> np.ndarray:
        """Surrogate values from precomputed basis values ``P``."""
        B = P.shape[0]
        N, m = self.N, self.m
        Pm = P[:, :, 1:].reshape(B, N * m)
        y = np.full(B, float(self.y_empty))
        y += Pm @ self.coeffs[: N * m]
        if self.S >= 2:
            if self._Q is None:
                self._Q = self._bivariate_matrix()
            y += np.einsum("bi,bi->b", Pm @ self._Q, Pm)
        for k in range(3, self.S + 1):
            subs = list(self.subsets(k))
            if not subs:
                continue
            degs = list(itertools.product(range(1, m + 1), repeat=k))
            for u in subs:
                blk = self.block(u).ravel()
                vals = np.ones((B, len(degs)))
                for p, i in enumerate(u):
                    vals *= P[:, i, [d[p] for d in degs]]
                y += vals @ blk
        return y

    def evaluate(self, x) -> np.ndarray | float:
        """Surrogate value at one point or at each row of ``x``."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = np.atleast_2d(x)
        out = np.empty(X.shape[0])
        for s in range(0, X.shape[0], _EVAL_BLOCK):
            out[s : s + _EVAL_BLOCK] = self.evaluate_basis(self.basis_values(X[s : s + _EVAL_BLOCK]))
        return float(out[0]) if single else out

    __call__ = evaluate

    # ---- serialization -----------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "format": "pdduq-surrogate",
            "version": 1,
            "inputs": [x.to_dict() for x in self.inputs],
            "S": self.S,
            "m": self.m,
            "R": self.R,
            "n": self.n,
            "reference": None if self.reference is None else [float(v) for v in self.reference],
            "n_evaluations": self.n_evaluations,
            "y_empty": float(self.y_empty),
            "terms": [
                {"u": list(k.subset), "j": list(k.degrees), "c": float(c)} for k, c in zip(self.terms, self.coeffs)
            ],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "PddSurrogate":
        inputs = [marginal_from_dict(x) for x in d["inputs"]]
        N, S, m = len(inputs), int(d["S"]), int(d["m"])
        offsets = _subset_offsets(N, S, m)
        coeffs = np.zeros(term_count(N, S, m))
        for t in d["terms"]:
            u, j = tuple(t["u"]), tuple(t["j"])
            flat = int(np.ravel_multi_index(tuple(v - 1 for v in j), (m,) * len(j)))
            coeffs[offsets[u] + flat] = float(t["c"])
        ref = d.get("reference")
        return cls(
            inputs,
            S,
            m,
            float(d["y_empty"]),
            coeffs,
            d.get("R"),
            d.get("n"),
            None if ref is None else np.asarray(ref, dtype=float),
            int(d.get("n_evaluations", 0)),
        )

    @classmethod
    def from_json(cls, text: str) -> "PddSurrogate":
        return cls.from_dict(json.loads(text))


# --------------------------------------------------------------------------
# coefficient estimation
# --------------------------------------------------------------------------


def _as_batch_function(model) -> Callable[[np.ndarray], np.ndarray]:
    if hasattr(model, "evaluate_batch"):
        return model.evaluate_batch
    return model


def _evaluate_unique(fn, X: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(fn(X), dtype=float)
    except Exception as exc:
        for row in X:
            try:
                fn(row[None, :])
            except Exception:
                raise ModelEvaluationError(f"model evaluation failed ({exc})", row.copy()) from exc
        raise
    if out.shape[0] != X.shape[0]:
        raise ValueError("model returned the wrong number of rows")
    bad = ~np.isfinite(out.reshape(out.shape[0], -1)).all(axis=1)
    if bad.any():
        raise ModelEvaluationError("model returned a non-finite value", X[np.argmax(bad)].copy())
    return out


def integration_plan(inputs: Sequence[Marginal], R: int, n: int, reference: np.ndarray):
    """Subsets with non-zero reduction weight and their tensor grids.

    Returns ``(plan, points)`` where ``plan`` is a list of
    ``(v, weight, start, stop)`` rows indexing into ``points``.
    """
    N = len(inputs)
    rules = [marginal_gauss_rule(x, n) for x in inputs]
    plan, blocks, pos = [], [], 0
    for k in range(0, R + 1):
        wgt = reduction_weight(N, R, k)
        if wgt == 0:
            continue
        for v in itertools.combinations(range(N), k):
            grid = np.tile(reference, (n**k, 1))
            if k:
                mesh = np.meshgrid(*[rules[i].nodes for i in v], indexing="ij")
                for p, i in enumerate(v):
                    grid[:, i] = mesh[p].ravel()
            blocks.append(grid)
            plan.append((v, wgt, pos, pos + n**k))
            pos += n**k
    return plan, np.concatenate(blocks, axis=0), rules


def compute_coefficients(
    model,
    inputs: Sequence[Marginal],
    S: int,
    m: int,
    R: int | None = None,
    n: int | None = None,
    reference: Sequence[float] | None = None,
):
    """Estimate PDD coefficients by dimension-reduction integration.

    Parameters
    ----------
    model : PerformanceModel or callable
        Maps an ``(B, N)`` array to ``(B,)`` or, for multi-output models,
        ``(B, Q)`` responses.
    inputs : sequence of Marginal
    S, m : int
        Truncation: interaction order and polynomial degree.
    R, n : int, optional
        Reduction order (default ``S``) and Gauss points per dimension
        (default ``m + 1``).
    reference : array_like, optional
        Anchor point; defaults to the input means.

    Returns
    -------
    PddSurrogate, or a list of them for a multi-output model.
    """
    inputs = tuple(inputs)
    N = len(inputs)
    R = S if R is None else int(R)
    n = m + 1 if n is None else int(n)
    if not 1 <= S <= N:
        raise ValueError("need 1 <= S <= N")
    if R < S or R > N:
        raise ValueError("need S <= R <= N")
    if n < 1:
        raise ValueError("need n >= 1")
    c = np.array([x.mean for x in inputs], dtype=float) if reference is None else np.asarray(reference, float)

    plan, points, rules = integration_plan(inputs, R, n, c)
    keys = np.ascontiguousarray(points).view(np.dtype((np.void, points.dtype.itemsize * N))).ravel()
    _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    order = np.sort(first)
    remap = np.empty(len(first), dtype=np.int64)
    remap[np.argsort(first)] = np.arange(len(first))
    unique_pts = points[order]
    values = _evaluate_unique(_as_batch_function(model), unique_pts)
    multi = values.ndim == 2
    values = values.reshape(len(unique_pts), -1)[remap[inverse.ravel()]]
    n_out = values.shape[1]

    # projection matrices A_i[k, j] = w_k psi_j(x_k)
    A = [r.weights[:, None] * marginal_basis(x, m).evaluate(r.nodes, m) for r, x in zip(rules, inputs)]
    offsets = _subset_offsets(N, S, m)
    y0 = np.zeros(n_out)
    coeffs = np.zeros((term_count(N, S, m), n_out))
    for v, wgt, start, stop in plan:
        k = len(v)
        H = values[start:stop].reshape((n,) * k + (n_out,))
        for p, i in enumerate(v):
            H = np.tensordot(H, A[i], axes=([0], [0]))
        # axes are now (out, j_v0, j_v1, ...)
        H = np.moveaxis(H, 0, -1)
        y0 += wgt * H[(0,) * k]
        for size in range(1, min(k, S) + 1):
            for pos in itertools.combinations(range(k), size):
                idx = tuple(slice(1, None) if p in pos else 0 for p in range(k))
                u = tuple(v[p] for p in pos)
                blk = H[idx].reshape(-1, n_out)
                o = offsets[u]
                coeffs[o : o + len(blk)] += wgt * blk
    n_eval = len(unique_pts)
    out = [
        PddSurrogate(inputs, S, m, float(y0[q]), coeffs[:, q].copy(), R, n, c.copy(), n_eval) for q in range(n_out)
    ]
    return out if multi else out[0]
