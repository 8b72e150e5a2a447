"""Performance functions: a counting wrapper and the benchmark models.

All evaluators are vectorized: they map an ``(B, N)`` array of input
points to ``(B,)`` responses, or ``(B, q)`` for multi-output models.
"""

from __future__ import annotations

import json
import math
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

TRIG_POLY_SEED = 20040615
TRIG_POLY_DIM = 15


class ModelError(ValueError):
    pass


@dataclass(eq=False)
class PerformanceModel:
    """Vectorized response function with a thread-safe evaluation counter.

    Parameters
    ----------
    N : int
        Input dimension.
    func : callable
        Maps ``(B, N)`` points to ``(B,)`` or ``(B, n_outputs)`` responses.
    n_outputs : int
        Number of responses per point.
    name : str
        Label used in reports.
    """

    N: int
    func: Callable[[np.ndarray], np.ndarray]
    n_outputs: int = 1
    name: str = "model"
    output_names: tuple = ()
    _count: int = field(default=0, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    @property
    def evaluations(self) -> int:
        return self._count

    def reset_counter(self) -> None:
        with self._lock:
            self._count = 0

    def evaluate_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.N:
            raise ModelError(f"{self.name}: expected points of shape (B, {self.N}), got {X.shape}")
        with self._lock:
            self._count += X.shape[0]
        return np.asarray(self.func(X), dtype=float)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return self.evaluate_batch(x[None, :])[0]
        return self.evaluate_batch(x)


# --------------------------------------------------------------------------
# analytic benchmarks
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TrigPolyData:
    """Coefficients of ``a1.x + a2.sin(x) + a3.cos(x) + x^T M x``."""

    a1: np.ndarray
    a2: np.ndarray
    a3: np.ndarray
    M: np.ndarray
    source: str = "seeded default"

    @classmethod
    def default(cls, seed: int = TRIG_POLY_SEED, N: int = TRIG_POLY_DIM) -> "TrigPolyData":
        """Seeded stand-in: ``a_k ~ U(0, 2)`` and ``M_ij ~ N(0, 0.2^2)``."""
        rng = np.random.default_rng(seed)
        a = rng.uniform(0.0, 2.0, size=(3, N))
        M = rng.normal(0.0, 0.2, size=(N, N))
        return cls(a[0], a[1], a[2], M, f"seeded default (seed {seed})")

    @classmethod
    def from_json(cls, path) -> "TrigPolyData":
        """Read ``{"a1": [...], "a2": [...], "a3": [...], "M": [[...]]}``."""
        d = json.loads(Path(path).read_text())
        try:
            a1, a2, a3 = (np.asarray(d[k], dtype=float) for k in ("a1", "a2", "a3"))
            M = np.asarray(d["M"], dtype=float)
        except KeyError as exc:
            raise ModelError(f"trig_poly data file missing field {exc}") from None
        N = len(a1)
        if not (a2.shape == a3.shape == (N,) and M.shape == (N, N)):
            raise ModelError("trig_poly data: a1, a2, a3 must have length N and M shape (N, N)")
        return cls(a1, a2, a3, M, str(path))

    def to_dict(self) -> dict:
        return {"a1": self.a1.tolist(), "a2": self.a2.tolist(), "a3": self.a3.tolist(), "M": self.M.tolist()}


def trig_poly(data: TrigPolyData | None = None) -> PerformanceModel:
    data = TrigPolyData.default() if data is None else data
    a1, a2, a3, M = data.a1, data.a2, data.a3, data.M

    def f(X):
        return X @ a1 + np.sin(X) @ a2 + np.cos(X) @ a3 + np.einsum("bi,ij,bj->b", X, M, X)

    return PerformanceModel(len(a1), f, name="trig_poly")


def trig_poly_moments(data: TrigPolyData, mu, sigma) -> tuple:
    """Closed-form ``(E[y], E[y^2])`` for iid ``N(mu, sigma^2)`` inputs.

    Accepts complex ``mu`` and ``sigma`` so that derivatives can be taken
    by complex-step differentiation.
    """
    a, b, c, d = data.a1, data.a2, data.a3, np.diag(data.M)
    N = len(a)
    s2 = sigma * sigma
    e = np.exp(-s2 / 2)
    e2, e3, e4 = mu**2 + s2, mu**3 + 3 * mu * s2, mu**4 + 6 * mu**2 * s2 + 3 * s2**2
    sn, cs = np.sin(mu), np.cos(mu)
    Es, Ec = e * sn, e * cs
    Exs, Exc = e * (mu * sn + s2 * cs), e * (mu * cs - s2 * sn)
    q = mu**2 + s2 - s2**2
    Ex2s, Ex2c = e * (q * sn + 2 * mu * s2 * cs), e * (q * cs - 2 * mu * s2 * sn)
    e4s = np.exp(-2 * s2)
    Es2, Ec2, Esc = (1 - e4s * np.cos(2 * mu)) / 2, (1 + e4s * np.cos(2 * mu)) / 2, e4s * np.sin(2 * mu) / 2
    F = a * mu + b * Es + c * Ec + d * e2
    G = a * e2 + b * Exs + c * Exc + d * e3
    FF = (
        a * a * e2 + b * b * Es2 + c * c * Ec2 + d * d * e4
        + 2 * (a * b * Exs + a * c * Exc + a * d * e3 + b * c * Esc + b * d * Ex2s + c * d * Ex2c)
    )
    iu, ju = np.triu_indices(N, 1)
    B = (data.M + data.M.T)[iu, ju]
    sF = F.sum()
    m1 = sF + B.sum() * mu**2
    cross = np.sum(B * (mu**2 * (sF - F[iu] - F[ju]) + mu * (G[iu] + G[ju])))
    shared = _pair_overlap(N)
    V = np.array([mu**4, e2 * mu**2, e2 * e2])
    m2 = FF.sum() + sF**2 - np.sum(F * F) + 2 * cross + B @ V[shared] @ B
    return m1, m2


def _pair_overlap(N: int) -> np.ndarray:
    iu, ju = np.triu_indices(N, 1)
    P = np.stack([iu, ju], axis=1)
    return (P[:, None, 0] == P[None, :, 0]).astype(int) + (P[:, None, 0] == P[None, :, 1]) + (
        P[:, None, 1] == P[None, :, 0]
    ) + (P[:, None, 1] == P[None, :, 1])


def trig_poly_moment_sensitivities(data: TrigPolyData, mu: float, sigma: float) -> np.ndarray:
    """``[[dm1/dmu, dm1/dsigma], [dm2/dmu, dm2/dsigma]]`` by complex step."""
    h = 1e-30
    out = np.zeros((2, 2))
    for k, (dm, ds) in enumerate(((1j * h, 0.0), (0.0, 1j * h))):
        m1, m2 = trig_poly_moments(data, mu + dm, sigma + ds)
        out[0, k], out[1, k] = np.imag(m1) / h, np.imag(m2) / h
    return out


def cubic4() -> PerformanceModel:
    def f(X):
        x1, x2, x3, x4 = X.T
        return 500.0 - (x1 + x2) ** 3 + x1 - x2 - x3 + x1 * x2 * x3 - x4

    return PerformanceModel(4, f, name="cubic4")


def gauss_sum(N: int) -> PerformanceModel:
    """``1/(1000 + sum x) - 1/(1000 + 3 sqrt(N))``."""
    if N < 1:
        raise ModelError("gauss_sum needs N >= 1")
    shift = 1.0 / (1000.0 + 3.0 * math.sqrt(N))

    def f(X):
        return 1.0 / (1000.0 + X.sum(axis=1)) - shift

    return PerformanceModel(N, f, name=f"gauss_sum({N})")


LINEAR6_COEFFS = np.array([1.0, 2.0, 2.0, 1.0, -5.0, -5.0])


def linear6() -> PerformanceModel:
    def f(X):
        return X @ LINEAR6_COEFFS

    return PerformanceModel(6, f, name="linear6")


# --------------------------------------------------------------------------
# plane truss
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TrussModel:
    """Pin-jointed plane truss (inch, lb, psi).

    Node and member indices are 0-based.  ``supports`` maps a node to its
    restrained ``(x, y)`` directions; ``loads`` maps a node to ``(Fx, Fy)``.
    """

    nodes: np.ndarray
    members: np.ndarray
    supports: dict
    loads: dict
    E: float = 1.0e7
    d_allow: float = 0.266
    sigma_allow: float = 37680.0
    monitor_node: int = 6

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        members = np.asarray(self.members, dtype=int)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "members", members)
        if members.ndim != 2 or members.shape[1] != 2 or members.min() < 0 or members.max() >= len(nodes):
            raise ModelError("truss members must be pairs of valid node indices")
        d = nodes[members[:, 1]] - nodes[members[:, 0]]
        L = np.hypot(d[:, 0], d[:, 1])
        if np.any(L <= 0):
            raise ModelError("truss member of zero length")
        c = d / L[:, None]
        ndof = 2 * len(nodes)
        fixed = {2 * int(n) + k for n, r in self.supports.items() for k in (0, 1) if r[k]}
        free = np.array([q for q in range(ndof) if q not in fixed])
        # unit-area element stiffness, scattered to global dofs
        Ke = np.zeros((len(members), ndof, ndof))
        for e, (i, j) in enumerate(members):
            dofs = [2 * i, 2 * i + 1, 2 * j, 2 * j + 1]
            g = np.array([-c[e, 0], -c[e, 1], c[e, 0], c[e, 1]])
            Ke[e][np.ix_(dofs, dofs)] = self.E / L[e] * np.outer(g, g)
        F = np.zeros(ndof)
        for n, (fx, fy) in self.loads.items():
            F[2 * int(n)] += fx
            F[2 * int(n) + 1] += fy
        B = np.zeros((len(members), ndof))
        for e, (i, j) in enumerate(members):
            B[e, [2 * i, 2 * i + 1, 2 * j, 2 * j + 1]] = self.E / L[e] * np.array([-c[e, 0], -c[e, 1], c[e, 0], c[e, 1]])
        object.__setattr__(self, "_lengths", L)
        object.__setattr__(self, "_free", free)
        object.__setattr__(self, "_Ke", Ke)
        object.__setattr__(self, "_Kf", Ke[:, free][:, :, free])
        object.__setattr__(self, "_F", F)
        object.__setattr__(self, "_B", B)
        # a mechanism is singular for every positive area vector
        ev = np.linalg.eigvalsh(self._Kf.sum(axis=0)) if len(free) else np.ones(1)
        if ev[0] <= 1e-10 * ev[-1]:
            raise ModelError("singular truss stiffness (mechanism or insufficient supports)")

    @property
    def n_members(self) -> int:
        return len(self.members)

    @property
    def lengths(self) -> np.ndarray:
        return self._lengths

    @property
    def load_vector(self) -> np.ndarray:
        return self._F.copy()

    def stiffness(self, areas) -> np.ndarray:
        """Full (unconstrained) global stiffness for one area vector."""
        return np.tensordot(np.asarray(areas, dtype=float), self._Ke, axes=1)

    def displacements(self, areas) -> np.ndarray:
        """Nodal displacements ``(B, 2 * n_nodes)`` for areas ``(B, n_members)``."""
        A = np.atleast_2d(np.asarray(areas, dtype=float))
        if A.shape[1] != self.n_members:
            raise ModelError(f"expected {self.n_members} member areas")
        if np.any(~(A > 0)):
            raise ModelError("member areas must be positive")
        K = np.tensordot(A, self._Kf, axes=1)
        f = np.broadcast_to(self._F[self._free], (A.shape[0], len(self._free)))
        u = np.zeros((A.shape[0], 2 * len(self.nodes)))
        u[:, self._free] = np.linalg.solve(K, f[..., None])[..., 0]
        return u

    def reactions(self, areas) -> np.ndarray:
        """Support reactions (global force vector minus applied load)."""
        u = self.displacements(areas)[0]
        return self.stiffness(np.asarray(areas, dtype=float).ravel()) @ u - self._F

    def member_stresses(self, areas) -> np.ndarray:
        return self.displacements(areas) @ self._B.T

    def to_dict(self) -> dict:
        return {
            "nodes": self.nodes.tolist(),
            "members": self.members.tolist(),
            "supports": {str(k): list(map(bool, v)) for k, v in self.supports.items()},
            "loads": {str(k): list(map(float, v)) for k, v in self.loads.items()},
            "E": self.E,
            "d_allow": self.d_allow,
            "sigma_allow": self.sigma_allow,
            "monitor_node": self.monitor_node,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrussModel":
        try:
            return cls(
                nodes=np.asarray(d["nodes"], dtype=float),
                members=np.asarray(d["members"], dtype=int),
                supports={int(k): tuple(bool(b) for b in v) for k, v in d["supports"].items()},
                loads={int(k): tuple(float(b) for b in v) for k, v in d["loads"].items()},
                E=float(d.get("E", 1.0e7)),
                d_allow=float(d.get("d_allow", 0.266)),
                sigma_allow=float(d.get("sigma_allow", 37680.0)),
                monitor_node=int(d.get("monitor_node", 6)),
            )
        except KeyError as exc:
            raise ModelError(f"truss definition missing field {exc}") from None

    @classmethod
    def from_json(cls, path) -> "TrussModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


# six equal bays over a 120 in span; the height sets the mean-design
# displacement near d_allow so that P_F is of order 1e-2
TRUSS21_BAY = 20.0
TRUSS21_HEIGHT = 30.5
TRUSS21_MEAN_AREAS = np.array([2.0] * 6 + [10.0] * 6 + [3.0] * 5 + [1.0] * 4)
# compact arched variant in which the stress limit state is also active
TRUSS21_ARCH_BAY = 10.5
TRUSS21_ARCH_HEIGHT = 9.72


def default_truss21(bay: float = TRUSS21_BAY, height: float = TRUSS21_HEIGHT, profile: str = "flat") -> TrussModel:
    """Reconstructed six-bay, twenty-one-bar truss with Pratt-style web.

    Bottom chord nodes 0, 2, 4, 6, 8, 10, 11 at ``x = 0 .. 6 bay``; top
    nodes 1, 3, 5, 7, 9 above the interior bottom nodes, at constant
    ``height`` (``profile="flat"``) or on a parabola of rise ``height``
    (``profile="parabolic"``).  Members 0-5 form the bottom chord, 6-11 the
    top chord including its two inclined end posts, 12-16 the verticals and
    17-20 the diagonals, which slope down towards mid-span.  Node 0 is
    pinned and node 11 is on a roller, so the truss is statically
    determinate.  Loads of 10000 lb act at nodes 2, 4, 8, 10 and 16000 lb at
    node 6.

    Parameters
    ----------
    bay, height : float
        Bay width and top-chord height (inch).
    profile : {"flat", "parabolic"}
        Top-chord shape.
    """
    if profile not in ("flat", "parabolic"):
        raise ModelError(f"unknown truss profile {profile!r}")
    bottom = [0, 2, 4, 6, 8, 10, 11]
    top = [1, 3, 5, 7, 9]
    nodes = np.zeros((12, 2))
    for k, n in enumerate(bottom):
        nodes[n] = (k * bay, 0.0)
    span = 6 * bay
    for k, n in enumerate(top):
        x = (k + 1) * bay
        y = height if profile == "flat" else 4.0 * height * x * (span - x) / span**2
        nodes[n] = (x, y)
    members = (
        [(bottom[k], bottom[k + 1]) for k in range(6)]
        + [(0, 1), (1, 3), (3, 5), (5, 7), (7, 9), (9, 11)]
        + [(top[k], bottom[k + 1]) for k in range(5)]
        + [(1, 4), (3, 6), (7, 6), (9, 8)]
    )
    loads = {2: (0.0, -10000.0), 4: (0.0, -10000.0), 6: (0.0, -16000.0), 8: (0.0, -10000.0), 10: (0.0, -10000.0)}
    return TrussModel(nodes, np.array(members), {0: (True, True), 11: (False, True)}, loads)


def arched_truss21() -> TrussModel:
    """Compact parabolic variant where both displacement and stress limits bind."""
    return default_truss21(TRUSS21_ARCH_BAY, TRUSS21_ARCH_HEIGHT, "parabolic")


def truss_solve(truss: TrussModel, areas) -> np.ndarray:
    """``(v_max, sigma_max, y1, y2)`` per area vector; shape ``(B, 4)`` or ``(4,)``."""
    A = np.asarray(areas, dtype=float)
    single = A.ndim == 1
    A = np.atleast_2d(A)
    u = truss.displacements(A)
    v = np.abs(u[:, 2 * truss.monitor_node + 1])
    s = np.max(np.abs(u @ truss._B.T), axis=1)
    out = np.stack([v, s, 1.0 - v / truss.d_allow, 1.0 - s / truss.sigma_allow], axis=1)
    return out[0] if single else out


def truss21(truss: TrussModel | None = None, full_output: bool = False) -> PerformanceModel:
    """Truss responses ``(y1, y2)``, or ``(v_max, sigma_max, y1, y2)`` with ``full_output``."""
    truss = default_truss21() if truss is None else truss

    def f(X):
        out = truss_solve(truss, X)
        return out if full_output else out[:, 2:]

    names = ("v_max", "sigma_max", "y1", "y2") if full_output else ("y1", "y2")
    return PerformanceModel(truss.n_members, f, len(names), "truss21", names)


# --------------------------------------------------------------------------
# registry
# --------------------------------------------------------------------------

BUILTINS = ("trig_poly", "cubic4", "gauss_sum", "linear6", "truss21")


def builtin(name: str, **options) -> PerformanceModel:
    """Benchmark model by name.

    ``gauss_sum`` takes ``N`` (also accepted as ``"gauss_sum(10)"``);
    ``trig_poly`` takes an optional ``data`` path; ``truss21`` takes an
    optional ``data`` path, ``variant`` (``"flat"`` or ``"arched"``) and
    ``full_output``.
    """
    m = re.fullmatch(r"\s*(\w+)\s*(?:\(\s*(\d+)\s*\))?\s*", name)
    if not m or m.group(1) not in BUILTINS:
        raise ModelError(f"unknown model {name!r}; choose from {', '.join(BUILTINS)}")
    key = m.group(1)
    if key == "gauss_sum":
        N = options.get("N", m.group(2))
        if N is None:
            raise ModelError("gauss_sum needs N")
        return gauss_sum(int(N))
    if m.group(2) is not None:
        raise ModelError(f"model {key!r} takes no size argument")
    if key == "trig_poly":
        data = options.get("data")
        return trig_poly(TrigPolyData.from_json(data) if data else None)
    if key == "cubic4":
        return cubic4()
    if key == "linear6":
        return linear6()
    data = options.get("data")
    variant = options.get("variant", "flat")
    if variant not in ("flat", "arched"):
        raise ModelError(f"unknown truss21 variant {variant!r}; choose 'flat' or 'arched'")
    if data:
        truss = TrussModel.from_json(data)
    else:
        truss = arched_truss21() if variant == "arched" else default_truss21()
    return truss21(truss, bool(options.get("full_output", False)))
