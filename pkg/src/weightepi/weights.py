"""Laws of the directed edge weights W in [0, 1].

Every model is an immutable, hashable dataclass so that it can key the
order-statistic memo table.  Continuous models additionally expose
``pdf``/``cdf``/``ppf`` on [0, 1]; those are the only ones the weight-based
acquaintance strategy accepts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import integrate, special

from .degree_dist import DegreeDist, sample_degrees
from .errors import ParameterError, UnsupportedKindError

__all__ = [
    "Uniform",
    "Beta",
    "TabulatedCDF",
    "TwoPoint",
    "ContactCount",
    "ThresholdStrength",
    "ExponentialStrength",
    "DegreeDependent",
    "WeightFunctionG",
    "WeightModel",
    "mean_weight",
    "sample_weight",
    "sample_weights",
    "eval_g",
    "is_continuous",
]


def _rng(rng) -> np.random.Generator:
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


class _Continuous:
    continuous = True

    def mean(self) -> float:
        # E[W] = int_0^1 (1 - F(x)) dx
        val, _ = integrate.quad(lambda x: 1.0 - self.cdf(x), 0.0, 1.0, epsabs=1e-13, limit=200)
        return val

    def sample(self, rng, size=None):
        return self.ppf(_rng(rng).random(size))

    def quantile_kinks(self) -> tuple:
        """Levels u in (0, 1) where the quantile function is not smooth."""
        return ()


@dataclass(frozen=True)
class Uniform(_Continuous):
    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= 0) & (x <= 1), 1.0, 0.0)

    def cdf(self, x):
        return np.clip(x, 0.0, 1.0)

    def ppf(self, u):
        return np.asarray(u, dtype=float)

    def mean(self) -> float:
        return 0.5

    def sample(self, rng, size=None):
        return _rng(rng).random(size)

    def __str__(self):
        return "uniform"


@dataclass(frozen=True)
class Beta(_Continuous):
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ParameterError(f"beta parameters must be positive, got ({self.a}, {self.b})")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            logp = (
                (self.a - 1) * np.log(x) + (self.b - 1) * np.log1p(-x) - special.betaln(self.a, self.b)
            )
        inside = (x > 0) & (x < 1)
        return np.where(inside, np.exp(np.where(inside, logp, 0.0)), 0.0)

    def cdf(self, x):
        return special.betainc(self.a, self.b, np.clip(x, 0.0, 1.0))

    def ppf(self, u):
        return special.betaincinv(self.a, self.b, u)

    def mean(self) -> float:
        return self.a / (self.a + self.b)

    def sample(self, rng, size=None):
        return _rng(rng).beta(self.a, self.b, size)

    def __str__(self):
        return f"beta({self.a:g},{self.b:g})"


@dataclass(frozen=True)
class TabulatedCDF(_Continuous):
    """Piecewise-linear CDF through ``(xs[i], cdf[i])`` with xs[0]=0, xs[-1]=1."""

    xs: tuple
    cdf_values: tuple

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        fs = np.asarray(self.cdf_values, dtype=float)
        if xs.shape != fs.shape or xs.size < 2:
            raise ParameterError("tabulated CDF needs matching knot arrays of length >= 2")
        if xs[0] != 0.0 or xs[-1] != 1.0 or np.any(np.diff(xs) <= 0):
            raise ParameterError("knots must increase strictly from 0 to 1")
        if fs[0] != 0.0 or fs[-1] != 1.0 or np.any(np.diff(fs) <= 0):
            # strictly increasing F keeps the law continuous with an invertible CDF
            raise ParameterError("CDF values must increase strictly from 0 to 1")

    def pdf(self, x):
        xs = np.asarray(self.xs)
        slopes = np.diff(self.cdf_values) / np.diff(xs)
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, slopes.size - 1)
        return np.where((x >= 0) & (x <= 1), slopes[idx], 0.0)

    def cdf(self, x):
        return np.interp(x, self.xs, self.cdf_values)

    def ppf(self, u):
        return np.interp(u, self.cdf_values, self.xs)

    def quantile_kinks(self) -> tuple:
        return tuple(float(f) for f in self.cdf_values[1:-1])

    def mean(self) -> float:
        xs = np.asarray(self.xs)
        fs = np.asarray(self.cdf_values)
        # exact for a piecewise-linear integrand
        return float(np.sum(np.diff(xs) * (1.0 - 0.5 * (fs[1:] + fs[:-1]))))

    def __str__(self):
        return f"tabulated({len(self.xs)} knots)"


@dataclass(frozen=True)
class TwoPoint:
    a: float
    b: float
    pa: float
    continuous = False

    def __post_init__(self):
        if not (0 <= self.a < self.b <= 1):
            raise ParameterError(f"two-point weights need 0 <= a < b <= 1, got a={self.a}, b={self.b}")
        if not 0 <= self.pa <= 1:
            raise ParameterError(f"pa must lie in [0, 1], got {self.pa}")

    @property
    def pb(self) -> float:
        return 1.0 - self.pa

    def mean(self) -> float:
        return self.a * self.pa + self.b * self.pb

    def sample(self, rng, size=None):
        u = _rng(rng).random(size)
        return np.where(u < self.pa, self.a, self.b)

    def __str__(self):
        return f"twopoint(a={self.a:g},b={self.b:g},pa={self.pa:g})"


@dataclass(frozen=True)
class ContactCount:
    """W = 1 - (1 - p)**N with N drawn from an integer law."""

    contacts: DegreeDist
    p: float
    continuous = False

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise ParameterError(f"per-contact probability must lie in [0, 1], got {self.p}")

    def mean(self) -> float:
        # 1 - G_N(1 - p)
        q = 1.0 - self.p
        return 1.0 - self.contacts.expect(lambda k: q**k)

    def sample(self, rng, size=None):
        rng = _rng(rng)
        n = 1 if size is None else int(np.prod(size))
        counts = sample_degrees(self.contacts, n, rng)
        w = 1.0 - (1.0 - self.p) ** counts
        return float(w[0]) if size is None else w.reshape(size)

    def __str__(self):
        return f"contacts({self.contacts.label},p={self.p:g})"


@dataclass(frozen=True)
class ExponentialStrength:
    """Connection strength X ~ Exponential(mean)."""

    mean_strength: float

    def __post_init__(self):
        if not self.mean_strength > 0:
            raise ParameterError("exponential strength mean must be positive")

    def sf(self, x):
        return np.exp(-np.asarray(x, dtype=float) / self.mean_strength)

    def pdf(self, x):
        return np.exp(-np.asarray(x, dtype=float) / self.mean_strength) / self.mean_strength

    def sample(self, rng, size=None):
        return _rng(rng).exponential(self.mean_strength, size)

    def __str__(self):
        return f"exp({self.mean_strength:g})"


@dataclass(frozen=True)
class ThresholdStrength:
    """W = 1{X >= theta} (rule="indicator") or W = 1 - alpha**X (rule="decay")."""

    strength: ExponentialStrength
    rule: str
    param: float

    def __post_init__(self):
        if self.rule == "indicator":
            if self.param < 0:
                raise ParameterError("threshold theta must be >= 0")
        elif self.rule == "decay":
            if not 0 <= self.param <= 1:
                raise ParameterError("decay alpha must lie in [0, 1]")
        else:
            raise ParameterError(f"unknown strength rule {self.rule!r}")

    @property
    def continuous(self) -> bool:
        return self.rule == "decay" and 0 < self.param < 1

    def _transform(self, x):
        if self.rule == "indicator":
            return (x >= self.param).astype(float)
        return 1.0 - self.param**x

    def _shape(self) -> float:
        # W = 1 - alpha**X with X ~ Exp(m) has P(W <= w) = 1 - (1 - w)**c
        if not self.continuous:
            raise UnsupportedKindError(f"{self} has no density")
        return -1.0 / (self.strength.mean_strength * np.log(self.param))

    def cdf(self, w):
        w = np.clip(np.asarray(w, dtype=float), 0.0, 1.0)
        return 1.0 - (1.0 - w) ** self._shape()

    def pdf(self, w):
        w = np.asarray(w, dtype=float)
        c = self._shape()
        with np.errstate(divide="ignore"):
            val = c * np.power(1.0 - np.clip(w, 0.0, 1.0), c - 1.0)
        return np.where((w >= 0) & (w < 1), val, 0.0)

    def ppf(self, u):
        return 1.0 - (1.0 - np.asarray(u, dtype=float)) ** (1.0 / self._shape())

    def mean(self) -> float:
        if self.rule == "indicator":
            return float(self.strength.sf(self.param))
        if self.param == 0:
            return 1.0
        val, _ = integrate.quad(
            lambda x: (1.0 - self.param**x) * self.strength.pdf(x), 0.0, np.inf, epsabs=1e-12
        )
        return val

    def sample(self, rng, size=None):
        w = self._transform(np.asarray(self.strength.sample(rng, size), dtype=float))
        return float(w) if size is None else w

    def __str__(self):
        key = "theta" if self.rule == "indicator" else "decay"
        return f"strength({self.strength},{key}={self.param:g})"


@dataclass(frozen=True)
class WeightFunctionG:
    """Degree-to-weight map g with W_(u,v) = g(D_u).

    ``kind`` is one of ``indicator`` (1{k >= theta}), ``geom`` (alpha**k),
    ``power`` (k**-tau for k >= 1) or ``table`` (explicit values, the last
    entry repeating for larger degrees).
    """

    kind: str
    param: float = 0.0
    table: tuple = ()

    def __post_init__(self):
        if self.kind == "indicator":
            if self.param < 0:
                raise ParameterError("indicator threshold must be >= 0")
        elif self.kind == "geom":
            if not 0 < self.param < 1:
                raise ParameterError("geometric decay alpha must lie in (0, 1)")
        elif self.kind == "power":
            if not 0 <= self.param <= 1:
                raise ParameterError("power decay tau must lie in [0, 1]")
        elif self.kind == "table":
            t = np.asarray(self.table, dtype=float)
            if t.size == 0 or np.any((t < 0) | (t > 1)):
                raise ParameterError("table values must lie in [0, 1]")
        else:
            raise ParameterError(f"unknown g kind {self.kind!r}")

    def __call__(self, degree):
        k = np.asarray(degree)
        if np.any(k < 0):
            raise ParameterError("degree must be non-negative")
        if self.kind == "indicator":
            out = (k >= self.param).astype(float)
        elif self.kind == "geom":
            out = self.param ** k.astype(float)
        elif self.kind == "power":
            # g(0) is never used (isolated vertices transmit nothing); define it as 1
            out = np.maximum(k, 1).astype(float) ** -self.param
        else:
            t = np.asarray(self.table, dtype=float)
            out = t[np.minimum(k, t.size - 1)]
        return float(out) if np.ndim(out) == 0 else out

    def is_monotone(self, degrees) -> int:
        """+1 if non-decreasing on ``degrees``, -1 if non-increasing, 0 otherwise."""
        d = np.diff(self(np.asarray(degrees)))
        if np.all(d >= 0):
            return 1
        if np.all(d <= 0):
            return -1
        return 0

    def __str__(self):
        if self.kind == "table":
            return "table(" + ",".join(f"{float(v):g}" for v in self.table) + ")"
        return f"{self.kind}({self.param:g})"


@dataclass(frozen=True)
class DegreeDependent:
    g: WeightFunctionG
    continuous = False

    def __str__(self):
        return f"g={self.g}"


WeightModel = Union[Uniform, Beta, TabulatedCDF, TwoPoint, ContactCount, ThresholdStrength, DegreeDependent]


def is_continuous(m) -> bool:
    return bool(getattr(m, "continuous", False))


def mean_weight(m) -> float:
    """gamma = E[W]."""
    if isinstance(m, DegreeDependent):
        raise UnsupportedKindError("mean weight is undefined for degree-dependent weights without a degree law")
    return float(m.mean())


def sample_weights(m, rng, size):
    if isinstance(m, DegreeDependent):
        raise UnsupportedKindError("degree-dependent weights are set from degrees, not sampled")
    return np.asarray(m.sample(_rng(rng), size), dtype=float)


def sample_weight(m, rng) -> float:
    return float(sample_weights(m, rng, 1)[0])


def eval_g(g: WeightFunctionG, degree):
    return g(degree)
