"""Degree distributions for the configuration model.

A :class:`DegreeDist` is stored as a dense probability vector ``pmf`` indexed
by degree, so ``d.pmf[k]`` is ``P(D = k)``.  Infinite-support laws are cut
where the discarded tail mass falls below ``tail`` and then renormalised.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from math import ceil
from pathlib import Path
from typing import Iterable

import numpy as np
from scipy import special, stats

from .errors import ParameterError

__all__ = [
    "DegreeDist",
    "SizeBiasedDist",
    "ParameterError",
    "poisson",
    "power_law",
    "power_law_raw_mean",
    "empirical",
    "from_csv",
    "point_mass",
    "size_bias",
    "excess_mean",
    "sample_degrees",
]

DEFAULT_TAIL = 1e-10
_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DegreeDist:
    pmf: np.ndarray
    label: str = "custom"
    tail_discarded: float = 0.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        p = np.asarray(self.pmf, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ParameterError("pmf must be a non-empty 1-d array")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ParameterError("pmf entries must be finite and non-negative")
        total = p.sum()
        if total <= 0:
            raise ParameterError("pmf has zero total mass")
        p = p / total
        nz = np.flatnonzero(p)
        p = p[: nz[-1] + 1].copy()
        p.setflags(write=False)
        object.__setattr__(self, "pmf", p)

    @property
    def cutoff(self) -> int:
        """Largest degree with positive probability."""
        return self.pmf.size - 1

    @property
    def degrees(self) -> np.ndarray:
        return np.arange(self.pmf.size)

    def moment(self, order: int) -> float:
        key = ("moment", order)
        if key not in self._cache:
            k = self.degrees.astype(float)
            self._cache[key] = float(np.dot(k**order, self.pmf))
        return self._cache[key]

    def mean(self) -> float:
        return self.moment(1)

    def variance(self) -> float:
        m = self.mean()
        return max(self.moment(2) - m * m, 0.0)

    def expect(self, fn) -> float:
        """E[fn(D)] for a vectorised ``fn`` of the degree."""
        return float(np.dot(np.asarray(fn(self.degrees), dtype=float), self.pmf))

    def cdf(self) -> np.ndarray:
        c = np.cumsum(self.pmf)
        c[-1] = 1.0
        return c

    def sf_at(self, k: int) -> float:
        """P(D >= k)."""
        if k <= 0:
            return 1.0
        if k > self.cutoff:
            return 0.0
        return float(self.pmf[k:].sum())

    def __repr__(self):
        return f"DegreeDist({self.label}, cutoff={self.cutoff})"


class SizeBiasedDist(DegreeDist):
    """Degree law of a vertex reached by following a uniformly chosen edge."""


def point_mass(k: int) -> DegreeDist:
    if k < 0:
        raise ParameterError("degree must be non-negative")
    p = np.zeros(k + 1)
    p[k] = 1.0
    return DegreeDist(p, label=f"point({k})")


def poisson(mu: float, tail: float = 1e-15) -> DegreeDist:
    """Poisson(mu) degrees, cut where the upper tail drops below ``tail``.

    The default tail is far below 1e-10 so that the shift identity of the
    size-biased law holds to ~1e-15 after renormalisation.
    """
    if not mu > 0:
        raise ParameterError(f"poisson mean must be positive, got {mu}")
    if not 0 < tail <= DEFAULT_TAIL:
        raise ParameterError("tail must lie in (0, 1e-10]")
    hi = int(ceil(mu + 50 * np.sqrt(mu) + 60))
    k = np.arange(hi + 1)
    sf = stats.poisson.sf(k, mu)  # P(D > k)
    cut = int(np.argmax(sf < tail))
    p = stats.poisson.pmf(np.arange(cut + 1), mu)
    return DegreeDist(p, label=f"poisson({mu:g})", tail_discarded=float(sf[cut]))


def _zipf_block(exponent: float, kmin: int, tail: float) -> tuple[np.ndarray, float]:
    """pmf proportional to k**-exponent on [kmin, K], K minimal with tail < ``tail``."""
    z0 = special.zeta(exponent, kmin)

    def tail_after(k):
        return special.zeta(exponent, k + 1) / z0

    lo, hi = kmin, max(2 * kmin, 16)
    while tail_after(hi) >= tail:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if tail_after(mid) < tail:
            hi = mid
        else:
            lo = mid + 1
    p = np.zeros(lo + 1)
    k = np.arange(kmin, lo + 1, dtype=float)
    p[kmin:] = k**-exponent
    discarded = float(tail_after(lo))
    return p / p.sum(), discarded


def power_law_raw_mean(exponent: float, tail: float = DEFAULT_TAIL) -> float:
    """Mean of the truncated law proportional to k**-exponent on k >= 1."""
    p, _ = _zipf_block(exponent, 1, tail)
    return float(np.dot(np.arange(p.size), p))


def _mix(a: np.ndarray, b: np.ndarray, wa: float) -> np.ndarray:
    out = np.zeros(max(a.size, b.size))
    out[: a.size] += wa * a
    out[: b.size] += (1.0 - wa) * b
    return out


def power_law(
    exponent: float,
    target_mean: float,
    method: str = "cutoff",
    tail: float = DEFAULT_TAIL,
) -> DegreeDist:
    """Power-law degrees with tail ``k**-exponent`` and mean ``target_mean``.

    ``method="cutoff"`` raises the lower cut-off: the law is a mixture of the
    pure power laws on ``k >= m`` and ``k >= m + 1`` with the mixing weight
    chosen to hit the mean exactly.  Above ``m + 1`` the pmf is exactly
    proportional to ``k**-exponent``.

    ``method="shift"`` instead returns ``D = X + C`` where ``X`` is the pure
    power law on ``k >= 1`` and ``C`` is an independent offset equal to
    ``floor(delta)`` or ``ceil(delta)``.  This keeps Var(D) close to Var(X),
    which is much smaller than for the cut-off construction.
    """
    if not exponent > 3:
        raise ParameterError(f"power-law exponent must exceed 3, got {exponent}")
    base, disc = _zipf_block(exponent, 1, tail)
    raw = float(np.dot(np.arange(base.size), base))
    if target_mean < raw - 1e-12:
        raise ParameterError(
            f"target mean {target_mean} below the minimum {raw:.6f} for exponent {exponent}"
        )
    label = f"powerlaw({exponent:g},mean={target_mean:g})"

    if method == "shift":
        delta = max(target_mean - raw, 0.0)
        c = int(np.floor(delta))
        frac = delta - c
        lo = np.concatenate([np.zeros(c), base])
        hi = np.concatenate([np.zeros(c + 1), base])
        return DegreeDist(_mix(lo, hi, 1.0 - frac), label=label[:-1] + ",method=shift)", tail_discarded=disc)
    if method != "cutoff":
        raise ParameterError(f"unknown power-law method {method!r}")

    def block_mean(m):
        p, d = _zipf_block(exponent, m, tail)
        return p, d, float(np.dot(np.arange(p.size), p))

    # untruncated mean ~ zeta(e-1, m)/zeta(e, m) locates the cut-off quickly
    m = 1
    while special.zeta(exponent - 1, m + 1) / special.zeta(exponent, m + 1) <= target_mean:
        m += 1
    p_lo, d_lo, mu_lo = block_mean(m)
    p_hi, d_hi, mu_hi = block_mean(m + 1)
    while mu_lo > target_mean and m > 1:
        m -= 1
        p_hi, d_hi, mu_hi = p_lo, d_lo, mu_lo
        p_lo, d_lo, mu_lo = block_mean(m)
    while mu_hi < target_mean:
        m += 1
        p_lo, d_lo, mu_lo = p_hi, d_hi, mu_hi
        p_hi, d_hi, mu_hi = block_mean(m + 1)
    w_lo = (mu_hi - target_mean) / (mu_hi - mu_lo)
    w_lo = min(max(w_lo, 0.0), 1.0)
    pmf = _mix(p_lo, p_hi, w_lo)
    return DegreeDist(pmf, label=label, tail_discarded=max(d_lo, d_hi))


def empirical(counts: Iterable[tuple[int, float]], label: str = "empirical") -> DegreeDist:
    """Normalised pmf from ``(degree, weight)`` pairs; repeated degrees add up."""
    counts = list(counts)
    if not counts:
        raise ParameterError("empirical distribution needs at least one (degree, weight) pair")
    kmax = max(int(k) for k, _ in counts)
    p = np.zeros(kmax + 1)
    for k, w in counts:
        if int(k) != k or k < 0:
            raise ParameterError(f"degree must be a non-negative integer, got {k}")
        if w < 0:
            raise ParameterError(f"weight must be non-negative, got {w}")
        p[int(k)] += w
    if p.sum() <= 0:
        raise ParameterError("empirical weights are all zero")
    return DegreeDist(p, label=label)


def from_csv(path: str | Path) -> DegreeDist:
    """Read a ``degree,prob`` CSV (header required)."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"degree", "prob"} <= set(reader.fieldnames):
            raise ParameterError(f"{path}: expected columns degree,prob")
        rows = [(int(r["degree"]), float(r["prob"])) for r in reader]
    return empirical(rows, label=f"empirical({path})")


def size_bias(d: DegreeDist) -> SizeBiasedDist:
    mu = d.mean()
    if mu <= 0:
        raise ParameterError("size-biasing needs a positive mean degree")
    pt = d.degrees * d.pmf / mu
    return SizeBiasedDist(pt, label=f"sizebiased({d.label})")


def excess_mean(d: DegreeDist) -> float:
    """E[D~ - 1], the mean number of further neighbours of an edge-reached vertex.

    Evaluated from the size-biased pmf and from ``mu + (Var(D) - mu)/mu``;
    a disagreement beyond 1e-9 signals a broken pmf and raises.
    """
    mu = d.mean()
    if mu <= 0:
        raise ParameterError("excess mean needs a positive mean degree")
    sb = size_bias(d)
    direct = sb.mean() - 1.0
    identity = mu + (d.variance() - mu) / mu
    if abs(direct - identity) > 1e-9 * max(1.0, abs(direct)):
        raise ArithmeticError(f"excess mean routes disagree: {direct} vs {identity}")
    return direct


def sample_degrees(d: DegreeDist, n: int, seed=None) -> np.ndarray:
    """``n`` i.i.d. draws by inverse CDF; ``seed`` may be an int or a Generator."""
    if n < 1:
        raise ParameterError("need n >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    u = rng.random(n)
    return np.searchsorted(d.cdf(), u, side="right").astype(np.int64)
