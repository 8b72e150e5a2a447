"""Independent input marginals, their score kernels, and design bindings.

Every marginal is an immutable value object.  Besides density, CDF and
inverse-CDF sampling, each kind knows the derivative of its log-density with
respect to each bindable parameter (the score kernel) and the affine map to a
standardized coordinate used when building orthonormal polynomial bases.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields, replace
from typing import Callable, ClassVar, Sequence

import numpy as np
from scipy import special


class DistributionError(ValueError):
    """Invalid marginal parameters or an unsupported operation."""


class Role(str, enum.Enum):
    MEAN = "mean"
    STDEV = "stdev"
    RATE = "rate"
    SCALE = "scale"
    SHAPE = "shape"


# TruncatedGaussian score kernels: "table2" uses the printed kernels including
# the 1/(Phi(D) - Phi(-D)) prefactor, "numeric" differentiates ln pdf.
SCORE_OPTIONS = {"truncated_gaussian": "table2"}


@dataclass(frozen=True)
class Marginal:
    """Base class of the six supported marginal kinds."""

    kind: ClassVar[str] = ""
    roles: ClassVar[tuple[Role, ...]] = ()
    fixed_support: ClassVar[bool] = True
    symmetric: ClassVar[bool] = False

    # ---- interface implemented by subclasses -------------------------------
    @property
    def mean(self) -> float:
        raise NotImplementedError

    @property
    def std(self) -> float:
        raise NotImplementedError

    @property
    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    def logpdf(self, x):
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def ppf(self, u):
        raise NotImplementedError

    def raw_moment(self, order: int) -> float:
        raise NotImplementedError

    def _score(self, role: Role, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def standardization(self) -> tuple[float, float]:
        """(loc, scale) of the standardized coordinate z = (x - loc) / scale."""
        return self.mean, self.std

    # ---- shared behaviour --------------------------------------------------
    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.exp(self.logpdf(x))
        return out if out.ndim else float(out)

    def in_support(self, x) -> np.ndarray:
        lo, hi = self.support
        x = np.asarray(x, dtype=float)
        return (x >= lo) & (x <= hi)

    def sample(self, rng: np.random.Generator, size=None):
        """Inverse-CDF draws from ``rng``; one uniform per draw."""
        return self.ppf(rng.random(size))

    def param(self, role: Role) -> float:
        return float(getattr(self, self._role_field(role)))

    def with_param(self, role: Role, value: float) -> "Marginal":
        return replace(self, **{self._role_field(role): float(value)})

    def _role_field(self, role: Role) -> str:
        role = Role(role)
        if role not in self.roles:
            raise DistributionError(f"{self.kind} has no bindable parameter {role.value!r}")
        return _ROLE_FIELDS[(self.kind, role)]

    def log_density_derivative(self, role: Role, x):
        """Derivative of ``ln f(x)`` with respect to the parameter ``role``."""
        role = Role(role)
        if role not in self.roles:
            raise DistributionError(f"{self.kind} has no bindable parameter {role.value!r}")
        xa = np.asarray(x, dtype=float)
        if not np.all(self.in_support(xa)):
            raise DistributionError("outside support")
        out = self._score(role, xa)
        return out if np.ndim(out) else float(out)

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        for f in fields(self):
            d[f.name] = getattr(self, f.name)
        return d

    def _check_moment_order(self, order: int) -> int:
        if int(order) != order or order < 0:
            raise DistributionError("moment undefined")
        return int(order)


@dataclass(frozen=True)
class Gaussian(Marginal):
    mu: float = 0.0
    sigma: float = 1.0

    kind: ClassVar[str] = "Gaussian"
    roles: ClassVar[tuple[Role, ...]] = (Role.MEAN, Role.STDEV)
    symmetric: ClassVar[bool] = True

    def __post_init__(self):
        _positive(self, "sigma")

    @property
    def mean(self):
        return self.mu

    @property
    def std(self):
        return self.sigma

    @property
    def support(self):
        return (-math.inf, math.inf)

    def logpdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mu) / self.sigma
        return -0.5 * z * z - math.log(self.sigma) - 0.5 * math.log(2 * math.pi)

    def cdf(self, x):
        return special.ndtr((np.asarray(x, dtype=float) - self.mu) / self.sigma)

    def ppf(self, u):
        return self.mu + self.sigma * special.ndtri(u)

    def raw_moment(self, order):
        order = self._check_moment_order(order)
        return sum(
            math.comb(order, j) * self.mu ** (order - j) * self.sigma**j * _double_factorial(j - 1)
            for j in range(0, order + 1, 2)
        )

    def _score(self, role, x):
        z = (x - self.mu) / self.sigma
        if role is Role.MEAN:
            return z / self.sigma
        return (z * z - 1.0) / self.sigma


@dataclass(frozen=True)
class Exponential(Marginal):
    rate: float = 1.0

    kind: ClassVar[str] = "Exponential"
    roles: ClassVar[tuple[Role, ...]] = (Role.RATE,)

    def __post_init__(self):
        _positive(self, "rate")

    @property
    def mean(self):
        return 1.0 / self.rate

    @property
    def std(self):
        return 1.0 / self.rate

    @property
    def support(self):
        return (0.0, math.inf)

    @property
    def standardization(self):
        return 0.0, 1.0 / self.rate

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(x >= 0, math.log(self.rate) - self.rate * x, -np.inf)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, -np.expm1(-self.rate * np.maximum(x, 0.0)), 0.0)

    def ppf(self, u):
        return -np.log1p(-np.asarray(u, dtype=float)) / self.rate

    def raw_moment(self, order):
        order = self._check_moment_order(order)
        return math.factorial(order) / self.rate**order

    def _score(self, role, x):
        return 1.0 / self.rate - x


@dataclass(frozen=True)
class Lognormal(Marginal):
    """Lognormal variable parameterized by its own mean and standard deviation."""

    mu: float = 1.0
    sigma: float = 0.1

    kind: ClassVar[str] = "Lognormal"
    roles: ClassVar[tuple[Role, ...]] = (Role.MEAN, Role.STDEV)

    def __post_init__(self):
        _positive(self, "mu")
        _positive(self, "sigma")

    @property
    def sigma_tilde(self) -> float:
        return math.sqrt(math.log1p((self.sigma / self.mu) ** 2))

    @property
    def mu_tilde(self) -> float:
        return math.log(self.mu) - 0.5 * math.log1p((self.sigma / self.mu) ** 2)

    def tilde_derivatives(self, role: Role) -> tuple[float, float]:
        """(d mu_tilde, d sigma_tilde) with respect to the mean or stdev."""
        mu, sig = self.mu, self.sigma
        st = self.sigma_tilde
        q = mu * mu + sig * sig
        if role is Role.MEAN:
            dst = -sig * sig / (st * mu * q)
            dmt = 1.0 / mu + sig * sig / (mu * q)
        else:
            dst = sig / (st * q)
            dmt = -sig / q
        return dmt, dst

    @property
    def mean(self):
        return self.mu

    @property
    def std(self):
        return self.sigma

    @property
    def support(self):
        return (0.0, math.inf)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        st, mt = self.sigma_tilde, self.mu_tilde
        with np.errstate(divide="ignore", invalid="ignore"):
            lx = np.log(np.where(x > 0, x, 1.0))
            val = -lx - math.log(st) - 0.5 * math.log(2 * math.pi) - 0.5 * ((lx - mt) / st) ** 2
        return np.where(x > 0, val, -np.inf)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            z = (np.log(np.where(x > 0, x, 1.0)) - self.mu_tilde) / self.sigma_tilde
        return np.where(x > 0, special.ndtr(z), 0.0)

    def ppf(self, u):
        return np.exp(self.mu_tilde + self.sigma_tilde * special.ndtri(u))

    def raw_moment(self, order):
        order = self._check_moment_order(order)
        return math.exp(order * self.mu_tilde + 0.5 * (order * self.sigma_tilde) ** 2)

    def _score(self, role, x):
        st, mt = self.sigma_tilde, self.mu_tilde
        dmt, dst = self.tilde_derivatives(role)
        r = np.log(x) - mt
        return -dst / st + (r / st) * (st * dmt + r * dst) / st**2


@dataclass(frozen=True)
class TruncatedGaussian(Marginal):
    """Gaussian truncated to [mu - half_width, mu + half_width].

    The truncation bounds move with ``mu``.
    """

    mu: float = 0.0
    sigma: float = 1.0
    half_width: float = 1.0

    kind: ClassVar[str] = "TruncatedGaussian"
    roles: ClassVar[tuple[Role, ...]] = (Role.MEAN, Role.STDEV)
    fixed_support: ClassVar[bool] = False
    symmetric: ClassVar[bool] = True

    def __post_init__(self):
        _positive(self, "sigma")
        _positive(self, "half_width")

    @property
    def _mass(self) -> float:
        b = self.half_width / self.sigma
        return float(special.ndtr(b) - special.ndtr(-b))

    @property
    def mean(self):
        return self.mu

    @property
    def std(self):
        b = self.half_width / self.sigma
        phi = math.exp(-0.5 * b * b) / math.sqrt(2 * math.pi)
        return self.sigma * math.sqrt(1.0 - 2.0 * b * phi / self._mass)

    @property
    def support(self):
        return (self.mu - self.half_width, self.mu + self.half_width)

    @property
    def standardization(self):
        return self.mu, self.sigma

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        z = (x - self.mu) / self.sigma
        val = -0.5 * z * z - math.log(self.sigma * self._mass) - 0.5 * math.log(2 * math.pi)
        return np.where(self.in_support(x), val, -np.inf)

    def cdf(self, x):
        b = self.half_width / self.sigma
        z = np.clip((np.asarray(x, dtype=float) - self.mu) / self.sigma, -b, b)
        return (special.ndtr(z) - special.ndtr(-b)) / self._mass

    def ppf(self, u):
        b = self.half_width / self.sigma
        lo = special.ndtr(-b)
        return self.mu + self.sigma * special.ndtri(lo + np.asarray(u, dtype=float) * self._mass)

    def raw_moment(self, order):
        order = self._check_moment_order(order)
        if order == 0:
            return 1.0
        # standardized moments: M_k = (k-1) M_{k-2} - (b^{k-1} - (-b)^{k-1}) phi(b) / Z
        b = self.half_width / self.sigma
        phib = math.exp(-0.5 * b * b) / math.sqrt(2.0 * math.pi)
        z = [1.0, 0.0]
        for k in range(2, order + 1):
            z.append((k - 1) * z[k - 2] - (b ** (k - 1) - (-b) ** (k - 1)) * phib / self._mass)
        return float(
            sum(math.comb(order, k) * self.mu ** (order - k) * self.sigma**k * z[k] for k in range(order + 1))
        )

    def _score(self, role, x):
        z = (x - self.mu) / self.sigma
        if SCORE_OPTIONS["truncated_gaussian"] == "numeric":
            return _central_difference_score(self, role, x)
        # printed kernels, prefactor evaluated at the half-width itself
        pref = 1.0 / float(special.ndtr(self.half_width) - special.ndtr(-self.half_width))
        if role is Role.MEAN:
            return pref * z / self.sigma
        return pref * (z * z - 1.0) / self.sigma


@dataclass(frozen=True)
class Weibull(Marginal):
    scale: float = 1.0
    shape: float = 1.0

    kind: ClassVar[str] = "Weibull"
    roles: ClassVar[tuple[Role, ...]] = (Role.SCALE, Role.SHAPE)

    def __post_init__(self):
        _positive(self, "scale")
        _positive(self, "shape")

    @property
    def mean(self):
        return self.scale * math.gamma(1.0 + 1.0 / self.shape)

    @property
    def std(self):
        k = self.shape
        g1 = math.gamma(1.0 + 1.0 / k)
        g2 = math.gamma(1.0 + 2.0 / k)
        return self.scale * math.sqrt(g2 - g1 * g1)

    @property
    def support(self):
        return (0.0, math.inf)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        lam, k = self.scale, self.shape
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(x > 0, x, 1.0) / lam
            val = math.log(k / lam) + (k - 1.0) * np.log(r) - r**k
        out = np.where(x > 0, val, -np.inf)
        if k == 1.0:
            out = np.where(x == 0, math.log(k / lam), out)
        return out

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, -np.expm1(-(np.maximum(x, 0.0) / self.scale) ** self.shape), 0.0)

    def ppf(self, u):
        return self.scale * (-np.log1p(-np.asarray(u, dtype=float))) ** (1.0 / self.shape)

    def raw_moment(self, order):
        order = self._check_moment_order(order)
        return self.scale**order * math.gamma(1.0 + order / self.shape)

    def _score(self, role, x):
        lam, k = self.scale, self.shape
        r = x / lam
        if role is Role.SCALE:
            return (k / lam) * (r**k - 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            lr = np.log(r)
            return 1.0 / k + lr * (1.0 - r**k)


@dataclass(frozen=True)
class Uniform(Marginal):
    lower: float = -1.0
    upper: float = 1.0

    kind: ClassVar[str] = "Uniform"
    roles: ClassVar[tuple[Role, ...]] = ()
    symmetric: ClassVar[bool] = True

    def __post_init__(self):
        if not self.lower < self.upper:
            raise DistributionError("Uniform requires lower < upper")

    @property
    def mean(self):
        return 0.5 * (self.lower + self.upper)

    @property
    def std(self):
        return (self.upper - self.lower) / math.sqrt(12.0)

    @property
    def support(self):
        return (self.lower, self.upper)

    @property
    def standardization(self):
        return self.mean, 0.5 * (self.upper - self.lower)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(self.in_support(x), -math.log(self.upper - self.lower), -np.inf)

    def cdf(self, x):
        return np.clip((np.asarray(x, dtype=float) - self.lower) / (self.upper - self.lower), 0.0, 1.0)

    def ppf(self, u):
        return self.lower + (self.upper - self.lower) * np.asarray(u, dtype=float)

    def raw_moment(self, order):
        order = self._check_moment_order(order)
        a, b = self.lower, self.upper
        return (b ** (order + 1) - a ** (order + 1)) / ((order + 1) * (b - a))


KINDS: dict[str, type[Marginal]] = {
    cls.kind: cls for cls in (Gaussian, Exponential, Lognormal, TruncatedGaussian, Weibull, Uniform)
}

_KIND_ALIASES = {k.lower(): v for k, v in KINDS.items()}

_ROLE_FIELDS = {
    ("Gaussian", Role.MEAN): "mu",
    ("Gaussian", Role.STDEV): "sigma",
    ("Exponential", Role.RATE): "rate",
    ("Lognormal", Role.MEAN): "mu",
    ("Lognormal", Role.STDEV): "sigma",
    ("TruncatedGaussian", Role.MEAN): "mu",
    ("TruncatedGaussian", Role.STDEV): "sigma",
    ("Weibull", Role.SCALE): "scale",
    ("Weibull", Role.SHAPE): "shape",
}


def marginal_from_dict(d: dict) -> Marginal:
    d = dict(d)
    kind = str(d.pop("kind", ""))
    cls = _KIND_ALIASES.get(kind.lower().replace("_", "").replace("-", ""))
    if cls is None:
        raise DistributionError(f"unknown marginal kind {kind!r}; choose from {', '.join(KINDS)}")
    try:
        return cls(**{k: float(v) for k, v in d.items()})
    except TypeError as exc:
        raise DistributionError(str(exc)) from None


def _positive(obj, name):
    v = getattr(obj, name)
    if not (v > 0 and math.isfinite(v)):
        raise DistributionError(f"{obj.kind}.{name} must be positive and finite, got {v}")


def _double_factorial(n: int) -> int:
    return 1 if n <= 0 else math.prod(range(n, 0, -2))


def _central_difference_score(marginal: Marginal, role: Role, x: np.ndarray) -> np.ndarray:
    d = marginal.param(role)
    h = 1e-6 * max(abs(d), 1e-3)
    hi = marginal.with_param(role, d + h).logpdf(x)
    lo = marginal.with_param(role, d - h).logpdf(x)
    return (hi - lo) / (2 * h)


@dataclass(frozen=True)
class DesignBinding:
    """Links design variable ``d_k`` to distribution parameters of the inputs.

    ``targets`` lists ``(variable_index, role)`` pairs with 0-based indices.
    A single pair is the single-variable case; several pairs sharing a role
    express a parameter common to identically distributed inputs.
    """

    targets: tuple[tuple[int, Role], ...]
    name: str = ""

    def __post_init__(self):
        tg = tuple((int(i), Role(r)) for i, r in self.targets)
        if not tg:
            raise DistributionError("a design binding needs at least one target")
        if len(set(tg)) != len(tg):
            raise DistributionError("duplicate (variable, role) pair in design binding")
        object.__setattr__(self, "targets", tg)

    @classmethod
    def shared(cls, role: Role, indices: Sequence[int], name: str = "") -> "DesignBinding":
        return cls(tuple((i, Role(role)) for i in indices), name)

    def validate(self, inputs: Sequence[Marginal]) -> None:
        for i, role in self.targets:
            if not 0 <= i < len(inputs):
                raise DistributionError(f"binding {self.name!r}: variable index {i} out of range")
            if role not in inputs[i].roles:
                raise DistributionError(
                    f"binding {self.name!r}: {inputs[i].kind} variable {i} has no parameter {role.value!r}"
                )

    @property
    def variables(self) -> tuple[int, ...]:
        return tuple(sorted({i for i, _ in self.targets}))

    def roles_for(self, i: int) -> list[Role]:
        return [r for j, r in self.targets if j == i]

    def value(self, inputs: Sequence[Marginal]) -> float:
        """Current value of the design variable (that of its first target)."""
        i, role = self.targets[0]
        return inputs[i].param(role)

    def perturbed(self, inputs: Sequence[Marginal], delta: float) -> list[Marginal]:
        """Inputs with every bound parameter shifted by ``delta``."""
        out = list(inputs)
        for i, role in self.targets:
            out[i] = out[i].with_param(role, out[i].param(role) + delta)
        return out

    def score(self, inputs: Sequence[Marginal], x: np.ndarray) -> np.ndarray:
        """First-order score function evaluated at the rows of ``x``."""
        x = np.asarray(x, dtype=float)
        total = np.zeros(x.shape[:-1])
        for i, role in self.targets:
            total = total + inputs[i]._score(role, x[..., i])
        return total

    def score_kernel(self, inputs: Sequence[Marginal], i: int) -> Callable[[np.ndarray], np.ndarray]:
        roles = self.roles_for(i)
        m = inputs[i]

        def kernel(x):
            x = np.asarray(x, dtype=float)
            return sum(m._score(r, x) for r in roles)

        return kernel

    def to_dict(self) -> dict:
        return {"name": self.name, "targets": [[i, r.value] for i, r in self.targets]}

    @classmethod
    def from_dict(cls, d: dict) -> "DesignBinding":
        return cls(tuple((int(i), Role(r)) for i, r in d["targets"]), d.get("name", ""))
