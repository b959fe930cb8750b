"""Means of order statistics of i.i.d. continuous weights.

``E[W_j^(k)]`` is the mean of the j-th smallest of k draws.  Everything is
integrated in quantile space against the Beta(j, k+1-j) rank kernel, so a
density with jumps (tabulated CDFs) causes no trouble.  The partial sums used by the vaccination formulas go through the one-dimensional
identity

    sum_{j<=m} E[W_j^(k)] = k * int_0^1 Q(u) P(Bin(k-1, u) <= m-1) du,

so a partial sum costs a single quadrature whatever its length.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .errors import ParameterError, UnsupportedKindError
from .weights import Uniform, is_continuous

__all__ = [
    "order_stat_mean",
    "order_stat_means",
    "partial_sum_order_means",
    "top_sum_order_means",
    "mixed_top_sum",
]

_EPSABS = 1e-13
_EPSREL = 1e-12
_LIMIT = 400


def _check(m, k: int):
    if not is_continuous(m):
        raise UnsupportedKindError(f"order statistics need a continuous weight law, got {m}")
    if k < 1:
        raise ParameterError(f"sample size k must be >= 1, got {k}")


def _rank_points(k: int, j: int) -> list[float]:
    """Quantile levels bracketing the bulk of the Beta(j, k+1-j) law."""
    u0 = j / (k + 1)
    sd = np.sqrt(u0 * (1 - u0) / (k + 2))
    pts = {float(np.clip(u0 + c * sd, 0.0, 1.0)) for c in (-8, -3, 0, 3, 8)}
    return sorted(p for p in pts if 0 < p < 1)


def _kinks(m) -> tuple:
    """Quantile levels where Q has a corner (laws without the hook have none)."""
    hook = getattr(m, "quantile_kinks", None)
    return tuple(hook()) if hook else ()


def _with_kinks(m, pts) -> list[float]:
    return sorted({float(p) for p in pts} | set(_kinks(m)))


def _log_rank_kernel(k: int, j, u):
    """log of the Beta(j, k+1-j) density, the law of the j-th smallest of k uniforms."""
    log_c = special.gammaln(k + 1) - special.gammaln(j) - special.gammaln(k + 1 - j)
    return log_c + (j - 1) * np.log(u) + (k - j) * np.log1p(-u)


@lru_cache(maxsize=1 << 16)
def order_stat_mean(m, k: int, j: int) -> float:
    """E[W_j^(k)]: mean of the j-th smallest of k i.i.d. draws from ``m``.

    Integrated in quantile space, int Q(u) beta(u; j, k+1-j) du, where Q is
    continuous even when the density of ``m`` jumps.
    """
    _check(m, k)
    if not 1 <= j <= k:
        raise ParameterError(f"rank j must lie in 1..{k}, got {j}")
    if isinstance(m, Uniform):
        return j / (k + 1)

    def integrand(u):
        if u <= 0.0 or u >= 1.0:
            return 0.0
        return float(m.ppf(u)) * float(np.exp(_log_rank_kernel(k, j, u)))

    val, _ = integrate.quad(
        integrand, 0.0, 1.0, points=_with_kinks(m, _rank_points(k, j)) or None, epsabs=_EPSABS, epsrel=_EPSREL, limit=_LIMIT
    )
    return val


# all ranks of one k at once on a fixed composite Gauss-Legendre grid, graded
# toward both ends; 100 interior panels resolve the rank kernels up to this k
_GRID_MAX_K = 400


@lru_cache(maxsize=64)
def _law_grid(m) -> tuple[np.ndarray, np.ndarray]:
    """Nodes u and weights times Q(u); panel edges also sit on Q's kinks."""
    ends = np.geomspace(1e-15, 0.5, 70)
    edges = np.unique(np.concatenate([[0.0, 1.0], ends, 1.0 - ends, np.linspace(0.0, 1.0, 101), _kinks(m)]))
    x, w = np.polynomial.legendre.leggauss(20)
    a, b = edges[:-1, None], edges[1:, None]
    u = np.minimum((a + (b - a) * (x + 1) / 2).ravel(), 1.0 - 2.0**-53)
    wt = ((b - a) / 2 * w).ravel()
    return u, np.asarray(m.ppf(u), dtype=float) * wt


def order_stat_means(m, k: int) -> np.ndarray:
    """All k order-statistic means, smallest rank first."""
    _check(m, k)
    if isinstance(m, Uniform):
        return np.arange(1, k + 1) / (k + 1)
    if k > _GRID_MAX_K:
        return np.array([order_stat_mean(m, k, j) for j in range(1, k + 1)])
    u, qw = _law_grid(m)
    j = np.arange(1, k + 1)[:, None]
    return np.exp(_log_rank_kernel(k, j, u[None, :])) @ qw


def _binomial_weighted_integral(m, k: int, lo: int, hi: int) -> float:
    """k * int Q(u) P(lo <= Bin(k-1, u) <= hi) du (sum of ranks lo+1..hi+1)."""

    def integrand(u):
        p_hi = special.bdtr(hi, k - 1, u) if hi < k - 1 else 1.0
        p_lo = special.bdtr(lo - 1, k - 1, u) if lo > 0 else 0.0
        return float(m.ppf(u)) * (p_hi - p_lo)

    centre_lo = lo / max(k - 1, 1)
    centre_hi = hi / max(k - 1, 1)
    pts = set()
    for c in (centre_lo, centre_hi):
        sd = np.sqrt(max(c * (1 - c), 1.0 / k) / k)
        for s in (-8, -3, 0, 3, 8):
            pts.add(float(np.clip(c + s * sd, 0.0, 1.0)))
    pts = _with_kinks(m, (p for p in pts if 0 < p < 1))
    val, _ = integrate.quad(integrand, 0.0, 1.0, points=pts or None, epsabs=_EPSABS, epsrel=_EPSREL, limit=_LIMIT)
    return k * val


@lru_cache(maxsize=1 << 20)
def partial_sum_order_means(m, k: int, upto: int) -> float:
    """sum_{j=1}^{upto} E[W_j^(k)]."""
    _check(m, k)
    if not 0 <= upto <= k:
        raise ParameterError(f"upto must lie in 0..{k}, got {upto}")
    if upto == 0:
        return 0.0
    if isinstance(m, Uniform):
        return upto * (upto + 1) / (2 * (k + 1))
    if upto == k:
        return k * float(m.mean())
    if 2 * upto <= k:
        return _binomial_weighted_integral(m, k, 0, upto - 1)
    # the top ranks have the narrower integrand; take the complement
    return k * float(m.mean()) - top_sum_order_means(m, k, k - upto)


@lru_cache(maxsize=1 << 20)
def top_sum_order_means(m, k: int, count: int) -> float:
    """Sum of the ``count`` largest order-statistic means out of k."""
    _check(m, k)
    if not 0 <= count <= k:
        raise ParameterError(f"count must lie in 0..{k}, got {count}")
    if count == 0:
        return 0.0
    if isinstance(m, Uniform):
        return count * k / (k + 1) - count * (count - 1) / (2 * (k + 1))
    if count == k:
        return k * float(m.mean())
    return _binomial_weighted_integral(m, k, k - count, k - 1)


def _binom_cdf_small(c: int, n: np.ndarray, t: float) -> np.ndarray:
    """P(Bin(n, t) <= c) for a small count c, by the term recursion."""
    if t >= 1.0:
        return (n <= c).astype(float)
    term = np.exp(n * np.log1p(-t))
    acc = term.copy()
    ratio = t / (1.0 - t)
    for j in range(c):
        term = term * ((n - j) / (j + 1) * ratio)
        acc += term
    return np.minimum(acc, 1.0)


def mixed_top_sum(m, ks, coeffs, count: int) -> float:
    """sum_k coeffs[k] * (sum of the ``count`` largest order-statistic means of k).

    Swapping the sum over k with the binomial integral leaves one quadrature
    for the whole mixture, which is what makes supports with tens of
    thousands of degrees tractable.  ``ks`` must be increasing and >= count.
    """
    ks = np.asarray(ks, dtype=np.int64)
    coeffs = np.asarray(coeffs, dtype=float)
    if ks.size == 0 or count == 0:
        return 0.0
    _check(m, int(ks[0]))
    if ks[0] < count:
        raise ParameterError("every k must be at least count")
    if isinstance(m, Uniform):
        kf = ks.astype(float)
        return float(np.dot(coeffs, count * kf / (kf + 1) - count * (count - 1) / (2 * (kf + 1))))
    wk = coeffs * ks
    n = (ks - 1).astype(float)
    # P(Bin(n, t) <= count-1) is negligible once n*t is far past count
    reach = count + 12.0 * np.sqrt(count) + 40.0

    def integrand(t):
        top = n.size if t <= 0 else int(np.searchsorted(n, reach / t, side="right"))
        return float(m.ppf(1.0 - t)) * float(np.dot(wk[:top], _binom_cdf_small(count - 1, n[:top], t)))

    lo = count / float(ks[-1])
    pts = np.unique(np.geomspace(lo / 2, 1.0, 40))[:-1]
    # t = 1 - u, so Q's kinks move to 1 - u
    pts = sorted({float(p) for p in pts if 0 < p < 1} | {1.0 - u for u in _kinks(m)})
    val, _ = integrate.quad(integrand, 0.0, 1.0, points=pts, epsabs=_EPSABS, epsrel=1e-11, limit=800)
    return val
