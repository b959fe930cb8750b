"""Vaccination strategies: analytic coverage and reproduction numbers, and
concrete plans on generated graphs.

Strategy families and their parameter:

``uniform``       each vertex vaccinated with probability v
``acquaintance``  each vertex sampled Po(beta) times, each sample names a
                  uniformly random neighbour
``weighted``      each vertex sampled Po(beta) times; i samples vaccinate the
                  i neighbours with the largest out-weights (continuous weights)
``twopoint``      each vertex sampled with probability s; a sampled vertex
                  vaccinates every neighbour whose out-weight equals b
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .degree_dist import DegreeDist, size_bias
from .errors import BracketError, ParameterError, StrategyMismatchError
from .ordstat import mixed_top_sum, partial_sum_order_means
from .thresholds import r0_iid
from .weights import TwoPoint, Uniform, is_continuous, mean_weight

__all__ = [
    "FAMILIES",
    "StrategySpec",
    "VaccinationPlan",
    "CriticalCoverage",
    "coverage_from_escape",
    "coverage_uniform",
    "r_uniform",
    "removal_prob_weighted",
    "escape_prob_weighted",
    "coverage_weighted",
    "inner_sampling_law",
    "r_weighted",
    "escape_prob_acq",
    "coverage_acq_standard",
    "r_acq_standard",
    "escape_prob_twopoint",
    "coverage_twopoint",
    "r_twopoint",
    "evaluate",
    "sampled_fraction_analytic",
    "critical_coverage",
    "parameter_for_coverage",
    "parameter_for_r",
    "sampled_fraction_sweep",
    "sampled_fraction_csv",
    "coverage_sweep",
    "coverage_sweep_csv",
    "apply_plan",
    "sampled_fraction_curve",
]

FAMILIES = ("uniform", "acquaintance", "weighted", "twopoint")
BETA_MAX = 50.0
# above this many (k, i) terms one quadrature per i beats memoised per-term sums
_PAIRWISE_LIMIT = 4000


@dataclass(frozen=True)
class StrategySpec:
    kind: str
    param: float
    weights: object = None

    def __post_init__(self):
        if self.kind not in FAMILIES:
            raise ParameterError(f"unknown strategy {self.kind!r}")
        if self.kind in ("uniform", "twopoint"):
            if not 0 <= self.param <= 1:
                raise ParameterError(f"{self.kind} parameter must lie in [0, 1], got {self.param}")
        elif not self.param >= 0:
            raise ParameterError(f"beta must be >= 0, got {self.param}")
        _check_family(self.kind, self.weights)


@dataclass(frozen=True, eq=False)
class VaccinationPlan:
    strategy: StrategySpec
    mask: np.ndarray
    realized_coverage: float
    sampled_fraction: float


@dataclass(frozen=True)
class CriticalCoverage:
    family: str
    parameter: float | None
    coverage: float | None
    r_at_parameter: float
    reachable: bool


def _check_family(kind: str, m) -> None:
    if kind == "weighted" and not is_continuous(m):
        raise StrategyMismatchError(f"weight-based acquaintance vaccination needs continuous weights, got {m}")
    if kind == "twopoint" and not isinstance(m, TwoPoint):
        raise StrategyMismatchError(f"two-point strategy needs two-point weights, got {m}")


def _need_mu(d: DegreeDist) -> float:
    mu = d.mean()
    if mu <= 0:
        raise ParameterError("vaccination formulas need a positive mean degree")
    return mu


def _check_beta(beta: float):
    if not beta >= 0:
        raise ParameterError(f"beta must be >= 0, got {beta}")


def coverage_from_escape(d: DegreeDist, alpha: float) -> float:
    """1 - sum_j alpha**j p_j, summed as sum_j (1 - alpha**j) p_j."""
    if alpha >= 1.0:
        return 0.0
    k = d.degrees.astype(float)
    if alpha <= 0.0:
        return float(min(1.0, d.pmf[1:].sum()))
    return float(min(1.0, -np.dot(np.expm1(k * np.log(alpha)), d.pmf)))


def coverage_uniform(v: float) -> float:
    if not 0 <= v <= 1:
        raise ParameterError(f"coverage must lie in [0, 1], got {v}")
    return float(v)


def r_uniform(d: DegreeDist, gamma: float, v: float) -> float:
    return (1.0 - coverage_uniform(v)) * r0_iid(d, gamma)


# --- weight-based acquaintance vaccination, continuous weights ----------------


def removal_prob_weighted(ks: np.ndarray, beta: float) -> np.ndarray:
    """r_k = sum_{i<k} P(V=i) (1 - i/k), V ~ Po(beta); r_0 = 0.

    Uses sum_{i<k} i P(V=i) = beta P(V <= k-2).
    """
    ks = np.asarray(ks)
    out = np.zeros(ks.shape)
    pos = ks > 0
    k = ks[pos].astype(float)
    if beta == 0:
        out[pos] = 1.0
        return out
    out[pos] = special.pdtr(k - 1, beta) - beta * np.where(k >= 2, special.pdtr(k - 2, beta), 0.0) / k
    return out


def escape_prob_weighted(d: DegreeDist, beta: float) -> float:
    """alpha = sum_k r_k p~_k: a vertex is not named by a given neighbour."""
    _check_beta(beta)
    _need_mu(d)
    if beta == 0:
        return 1.0
    sb = size_bias(d)
    return float(np.dot(removal_prob_weighted(sb.degrees, beta), sb.pmf))


def coverage_weighted(d: DegreeDist, beta: float) -> float:
    return coverage_from_escape(d, escape_prob_weighted(d, beta))


def inner_sampling_law(k: int, beta: float) -> np.ndarray:
    """P(V_w = i | D_w = k, w did not name the parent), i = 0..k-1."""
    _check_beta(beta)
    if k < 1:
        raise ParameterError("degree must be >= 1")
    i = np.arange(k)
    num = (1.0 - i / k) * stats.poisson.pmf(i, beta)
    return num / removal_prob_weighted(np.array([k]), beta)[0]


def _i_cap(beta: float) -> int:
    """Sampling counts above this have total Poisson mass below 1e-18."""
    if beta == 0:
        return 0
    hi = int(beta + 15 * np.sqrt(beta) + 60)
    sf = special.pdtrc(np.arange(hi + 1), beta)  # P(V > i)
    return int(np.argmax(sf < 1e-18))


def r_weighted(d: DegreeDist, m, beta: float) -> float:
    """Reproduction number under weight-based acquaintance vaccination.

    With the size-biased conditioning written out, the r_k of the neighbour
    law cancels against the inner Bayes factor and

        R = sum_{k>=2} p~_k alpha**(k-2)
              sum_{i=0}^{k-2} (1 - i/k) P(V=i) (1 - 1/(k-i)) S(k, k-i)

    where S(k, m) is the sum of the m smallest order-statistic means of k
    weights.
    """
    _check_family("weighted", m)
    _check_beta(beta)
    _need_mu(d)
    if beta == 0:
        return r0_iid(d, mean_weight(m))
    sb = size_bias(d)
    alpha = float(np.dot(removal_prob_weighted(sb.degrees, beta), sb.pmf))
    ks = np.flatnonzero(sb.pmf)
    ks = ks[ks >= 2]
    if ks.size == 0:
        return 0.0
    outer = sb.pmf[ks] * np.power(alpha, ks - 2, dtype=float)
    icap = _i_cap(beta)
    pv = stats.poisson.pmf(np.arange(icap + 1), beta)

    if isinstance(m, Uniform):
        # (1 - 1/(k-i)) S(k, k-i) = (k-i-1)(k-i+1) / (2(k+1))
        total = 0.0
        for i in range(min(icap, int(ks.max()) - 2) + 1):
            kk = ks[ks >= i + 2].astype(float)
            o = outer[ks >= i + 2]
            h = (kk - i - 1) * (kk - i + 1) / (2 * (kk + 1))
            total += pv[i] * float(np.dot(o * (1 - i / kk), h))
        return total

    live = outer * ks >= 1e-18
    ks, outer = ks[live], outer[live]
    pairs = int(np.minimum(ks - 1, icap + 1).sum())
    if pairs > _PAIRWISE_LIMIT:
        return _r_weighted_mixture(m, ks, outer, pv)

    total = 0.0
    for k, o in zip(ks.tolist(), outer.tolist()):
        inner = 0.0
        for i in range(min(k - 2, icap) + 1):
            w = (1.0 - i / k) * pv[i]
            if w == 0.0:
                continue
            inner += w * (1.0 - 1.0 / (k - i)) * partial_sum_order_means(m, k, k - i)
        total += o * inner
    return total


def _r_weighted_mixture(m, ks: np.ndarray, outer: np.ndarray, pv: np.ndarray) -> float:
    """Same sum with S(k, k-i) = k E[W] - (top i sum), one quadrature per i."""
    gamma = mean_weight(m)
    kf = ks.astype(float)
    total = 0.0
    for i in range(min(pv.size - 1, int(ks[-1]) - 2) + 1):
        if pv[i] == 0.0:
            continue
        sel = ks >= i + 2
        k = kf[sel]
        c = outer[sel] * (1.0 - i / k) * (1.0 - 1.0 / (k - i))
        total += pv[i] * (gamma * float(np.dot(c, k)) - mixed_top_sum(m, ks[sel], c, i))
    return total


# --- standard acquaintance vaccination -----------------------------------------


def escape_prob_acq(d: DegreeDist, beta: float) -> float:
    """alpha = sum_k exp(-beta/k) p~_k."""
    _check_beta(beta)
    _need_mu(d)
    if beta == 0:
        return 1.0
    sb = size_bias(d)
    k = sb.degrees[1:].astype(float)
    return float(np.dot(np.exp(-beta / k), sb.pmf[1:]))


def coverage_acq_standard(d: DegreeDist, beta: float) -> float:
    return coverage_from_escape(d, escape_prob_acq(d, beta))


def r_acq_standard(d: DegreeDist, gamma: float, beta: float) -> float:
    """gamma * sum_{k>=2} (k-1) alpha**(k-2) exp(-2 beta/k) p~_k."""
    if not 0 <= gamma <= 1:
        raise ParameterError(f"mean weight must lie in [0, 1], got {gamma}")
    alpha = escape_prob_acq(d, beta)
    sb = size_bias(d)
    k = sb.degrees[2:]
    kf = k.astype(float)
    terms = (kf - 1) * np.power(alpha, k - 2, dtype=float) * np.exp(-2 * beta / kf) * sb.pmf[2:]
    return gamma * float(terms.sum())


# --- two-point weights -----------------------------------------------------------


def escape_prob_twopoint(m: TwoPoint, s: float) -> float:
    if not 0 <= s <= 1:
        raise ParameterError(f"sampling probability must lie in [0, 1], got {s}")
    return 1.0 - s * m.pb


def coverage_twopoint(d: DegreeDist, m: TwoPoint, s: float) -> float:
    _check_family("twopoint", m)
    return coverage_from_escape(d, escape_prob_twopoint(m, s))


def r_twopoint(d: DegreeDist, m: TwoPoint, s: float) -> float:
    """(nu a p_a + (1 - nu) gamma) sum_{k>=2} p~_k alpha**(k-1) (k-1), nu = p_a s / alpha."""
    _check_family("twopoint", m)
    _need_mu(d)
    alpha = escape_prob_twopoint(m, s)
    sb = size_bias(d)
    k = sb.degrees[2:]
    series = float(np.dot(sb.pmf[2:] * np.power(alpha, k - 1, dtype=float), (k - 1).astype(float)))
    if series == 0.0:
        return 0.0
    nu = m.pa * s / alpha
    return (nu * m.a * m.pa + (1.0 - nu) * m.mean()) * series


# --- family dispatch ----------------------------------------------------------------


def evaluate(family: str, d: DegreeDist, m, param: float) -> tuple[float, float]:
    """(coverage, reproduction number) of ``family`` at ``param``."""
    _check_family(family, m)
    if family == "uniform":
        pair = coverage_uniform(param), r_uniform(d, mean_weight(m), param)
    elif family == "acquaintance":
        pair = coverage_acq_standard(d, param), r_acq_standard(d, mean_weight(m), param)
    elif family == "weighted":
        pair = coverage_weighted(d, param), r_weighted(d, m, param)
    elif family == "twopoint":
        pair = coverage_twopoint(d, m, param), r_twopoint(d, m, param)
    else:
        raise ParameterError(f"unknown strategy {family!r}")
    return float(pair[0]), float(pair[1])


def sampled_fraction_analytic(family: str, param: float) -> float:
    """Expected fraction of vertices sampled at least once."""
    if family in ("acquaintance", "weighted"):
        return float(-np.expm1(-param))
    if family in ("twopoint", "uniform"):
        return float(param)
    raise ParameterError(f"unknown strategy {family!r}")


def _upper(family: str, beta_max: float) -> float:
    return 1.0 if family in ("uniform", "twopoint") else beta_max


def _bisect(fn, lo: float, hi: float, target: float, increasing: bool, tol: float, xtol: float = 1e-13):
    """Bisection for fn(x) = target on a monotone bracket; checks monotonicity as it goes."""
    f_lo, f_hi = fn(lo), fn(hi)
    sign = 1.0 if increasing else -1.0
    if sign * (f_lo - target) > 0 or sign * (f_hi - target) < 0:
        raise BracketError(f"target {target} not bracketed: f({lo})={f_lo}, f({hi})={f_hi}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if sign * (f_mid - f_lo) < -1e-12 or sign * (f_hi - f_mid) < -1e-12:
            raise BracketError(
                f"non-monotone response on [{lo}, {hi}]: f={f_lo}, {f_mid}, {f_hi}"
            )
        if abs(f_mid - target) < tol and hi - lo < 1e-6:
            return mid, f_mid
        if sign * (f_mid - target) < 0:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
        if hi - lo < xtol:
            break
    return mid, f_mid


def critical_coverage(family: str, d: DegreeDist, m, tol: float = 1e-6, beta_max: float = BETA_MAX) -> CriticalCoverage:
    """Coverage at which the strategy pushes the reproduction number to 1."""
    _check_family(family, m)
    r0 = evaluate(family, d, m, 0.0)[1]
    if r0 <= 1.0:
        return CriticalCoverage(family, 0.0, 0.0, float(r0), True)
    hi = _upper(family, beta_max)
    r_hi = evaluate(family, d, m, hi)[1]
    if r_hi > 1.0:
        return CriticalCoverage(family, None, None, float(r_hi), False)
    if family == "uniform":
        v = 1.0 - 1.0 / r0
        return CriticalCoverage(family, v, v, float(r_uniform(d, mean_weight(m), v)), True)
    x, r = _bisect(lambda p: evaluate(family, d, m, p)[1], 0.0, hi, 1.0, increasing=False, tol=tol)
    return CriticalCoverage(family, float(x), evaluate(family, d, m, x)[0], float(r), True)


def parameter_for_coverage(family: str, d: DegreeDist, m, coverage: float, beta_max: float = BETA_MAX) -> float | None:
    """Strategy parameter achieving ``coverage``; None when out of reach."""
    _check_family(family, m)
    if family == "uniform":
        return coverage_uniform(coverage)
    if coverage <= 0:
        return 0.0
    hi = _upper(family, beta_max)
    cov = {
        "acquaintance": lambda p: coverage_acq_standard(d, p),
        "weighted": lambda p: coverage_weighted(d, p),
        "twopoint": lambda p: coverage_twopoint(d, m, p),
    }[family]
    if cov(hi) < coverage:
        return None
    x, _ = _bisect(cov, 0.0, hi, coverage, increasing=True, tol=1e-12)
    return x


def parameter_for_r(family: str, d: DegreeDist, m, target: float, beta_max: float = BETA_MAX) -> float | None:
    """Strategy parameter at which the reproduction number equals ``target``."""
    _check_family(family, m)
    r_lo = evaluate(family, d, m, 0.0)[1]
    hi = _upper(family, beta_max)
    if r_lo < target or evaluate(family, d, m, hi)[1] > target:
        return None
    x, _ = _bisect(lambda p: evaluate(family, d, m, p)[1], 0.0, hi, target, increasing=False, tol=1e-10)
    return float(x)


def sampled_fraction_sweep(d: DegreeDist, m, fractions, families=("acquaintance", "twopoint")):
    """Rows (sampled fraction, coverage, family): coverage bought per sampled vertex.

    The acquaintance families sample Po(beta) times, so a sampled fraction
    f corresponds to beta = -log(1 - f); the two-point family samples with
    probability s = f.
    """
    rows = []
    for fam in families:
        _check_family(fam, m)
        for f in fractions:
            f = float(f)
            direct = fam in ("twopoint", "uniform")
            if not (0 <= f <= 1 if direct else 0 <= f < 1):
                raise ParameterError(f"sampled fraction {f} is out of range for {fam}")
            param = f if direct else float(-np.log1p(-f))
            rows.append((f, evaluate(fam, d, m, param)[0], fam))
    return rows


def sampled_fraction_csv(d: DegreeDist, m, fractions, comment: str | None = None, families=("acquaintance", "twopoint")) -> str:
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["sampled_fraction", "coverage", "strategy"])
    for f, cov, fam in sampled_fraction_sweep(d, m, fractions, families):
        w.writerow([f"{f:.6g}", repr(cov), fam])
    return buf.getvalue()


def coverage_sweep(d: DegreeDist, m, coverages, beta_max: float = BETA_MAX) -> list[tuple[float, float, float, float]]:
    """Rows (coverage, R uniform, R standard acquaintance, R weight-based).

    The weight-based column uses the continuous strategy for continuous
    weights and the two-point strategy for two-point weights.  Unreachable
    coverages give NaN.
    """
    weight_family = "twopoint" if isinstance(m, TwoPoint) else "weighted"
    rows = []
    for v in coverages:
        v = float(v)
        row = [v]
        for fam in ("uniform", "acquaintance", weight_family):
            p = parameter_for_coverage(fam, d, m, v, beta_max)
            row.append(float("nan") if p is None else evaluate(fam, d, m, p)[1])
        rows.append(tuple(row))
    return rows


def coverage_sweep_csv(d: DegreeDist, m, coverages, comment: str | None = None, beta_max: float = BETA_MAX) -> str:
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["coverage", "r_uniform", "r_acq", "r_weight"])
    for row in coverage_sweep(d, m, coverages, beta_max):
        w.writerow([f"{row[0]:.6g}"] + [repr(x) for x in row[1:]])
    return buf.getvalue()


# --- plans on concrete graphs ------------------------------------------------------


def _weight_ranks(g) -> np.ndarray:
    """Rank of each arc among its source's arcs by decreasing out-weight (ties: lower id first)."""
    if "wrank" not in g._cache:
        src = g.sources
        order = np.lexsort((g.neighbors, -g.out_weight, src))
        rank = np.empty(order.size, dtype=np.int64)
        rank[order] = np.arange(order.size) - g.offsets[src[order]]
        g._cache["wrank"] = rank
    return g._cache["wrank"]


def apply_plan(g, spec: StrategySpec, seed=None) -> VaccinationPlan:
    """Draw a concrete vaccinated mask on graph ``g``."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n = g.n
    deg = g.degree
    mask = np.zeros(n, dtype=bool)
    kind, p = spec.kind, spec.param

    if kind == "uniform":
        mask = rng.random(n) < p
        sampled = float(np.count_nonzero(mask)) / n
    elif kind == "acquaintance":
        counts = rng.poisson(p, n)
        sampled = float(np.count_nonzero(counts)) / n
        counts[deg == 0] = 0
        src = np.repeat(np.arange(n), counts)
        pick = g.offsets[src] + np.floor(rng.random(src.size) * deg[src]).astype(np.int64)
        mask[g.neighbors[pick]] = True
    elif kind == "weighted":
        counts = rng.poisson(p, n)
        sampled = float(np.count_nonzero(counts)) / n
        chosen = _weight_ranks(g) < counts[g.sources]
        mask[g.neighbors[chosen]] = True
    else:
        hit = rng.random(n) < p
        sampled = float(np.count_nonzero(hit)) / n
        chosen = hit[g.sources] & (g.out_weight == spec.weights.b)
        mask[g.neighbors[chosen]] = True

    return VaccinationPlan(spec, mask, float(np.count_nonzero(mask)) / n, sampled)


def sampled_fraction_curve(d: DegreeDist, m, family: str, grid, n: int = 20000, replicates: int = 1, seed: int = 0):
    """Rows (parameter, sampled fraction, coverage) averaged over fresh graphs and plans."""
    from .netgen import generate

    _check_family(family, m)
    ss = np.random.SeedSequence(seed)
    graph_seeds = [int(s.generate_state(1)[0]) for s in ss.spawn(replicates)]
    graphs = [generate(n, d, m, seed=gs) for gs in graph_seeds]
    rows = []
    for gi, param in enumerate(grid):
        fr, cv = [], []
        for r, g in enumerate(graphs):
            plan = apply_plan(g, StrategySpec(family, float(param), m), np.random.default_rng([seed, gi, r]))
            fr.append(plan.sampled_fraction)
            cv.append(plan.realized_coverage)
        rows.append((float(param), float(np.mean(fr)), float(np.mean(cv))))
    return rows
