"""Reed-Frost epidemics on a weighted graph with a vaccinated mask.

Each generation is processed as one vectorised step: every arc leaving the
current generation gets one uniform draw, successful arcs into susceptible
vertices claim their target, and the first successful arc (in arc order)
is credited with the infection.

Ensembles derive one independent stream per run from the master seed with
``SeedSequence(master_seed, spawn_key=(run,))``, so results do not depend
on how runs are spread over worker processes.
"""

from __future__ import annotations

import csv
import io
import math
import multiprocessing as mp
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientSamplesError, ParameterError

__all__ = [
    "EpidemicRun",
    "EnsembleStats",
    "REstimate",
    "run_epidemic",
    "run_ensemble",
    "estimate_r",
    "outbreak_cutoff",
    "ensemble_csv",
]

Z95 = 1.959963984540054
OUTBREAK_FRACTION = 0.01
MIN_GEN2_RUNS = 200

_SUSCEPTIBLE, _INFECTED, _VACCINATED = 0, 1, 2


@dataclass
class EpidemicRun:
    seed: object
    initial_case: int
    generations: list[int]
    final_size: int
    gen2_offspring: np.ndarray
    truncated: bool = False


@dataclass
class EnsembleStats:
    runs: int
    outbreak_prob: float
    outbreak_ci: tuple[float, float]
    mean_gen2_offspring: float
    gen2_se: float
    gen2_ci: tuple[float, float]
    gen2_vertices: int
    runs_with_gen2: int
    mean_final_fraction_given_outbreak: float
    final_sizes: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class REstimate:
    value: float
    se: float
    ci_low: float
    ci_high: float
    gen2_vertices: int
    runs_with_gen2: int


def _as_mask(g, plan) -> np.ndarray:
    if plan is None:
        return np.zeros(g.n, dtype=bool)
    mask = getattr(plan, "mask", plan)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (g.n,):
        raise ParameterError("vaccination mask does not match the graph size")
    return mask


def outbreak_cutoff(n: int, fraction: float = OUTBREAK_FRACTION) -> int:
    return max(1, int(math.ceil(fraction * n)))


def run_epidemic(g, plan=None, seed=None, stop_at: int | None = None, max_generations: int | None = None) -> EpidemicRun:
    """One epidemic started from a uniformly chosen unvaccinated vertex.

    ``stop_at`` halts once the cumulative number infected reaches it (and
    generation 3 exists); ``max_generations`` halts after that many
    generations exist.  Both mark the run as truncated without altering the
    generations already produced.
    """
    mask = _as_mask(g, plan)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    unvacc = np.flatnonzero(~mask)
    if unvacc.size == 0:
        raise ParameterError("every vertex is vaccinated; nobody can be infected")

    state = np.where(mask, _VACCINATED, _SUSCEPTIBLE).astype(np.int8)
    first = int(unvacc[rng.integers(unvacc.size)])
    state[first] = _INFECTED
    frontier = np.array([first], dtype=np.int64)
    generations = [1]
    total = 1
    gen2_offspring = np.zeros(0, dtype=np.int64)
    offsets, nbr, w = g.offsets, g.neighbors, g.out_weight
    deg = np.diff(offsets)
    truncated = False

    while True:
        # generation 3 must exist before stopping so gen2_offspring is complete
        if stop_at is not None and total >= stop_at and len(generations) >= 3:
            truncated = True
            break
        if max_generations is not None and len(generations) >= max_generations:
            truncated = True
            break
        counts = deg[frontier]
        n_arcs = int(counts.sum())
        if n_arcs == 0:
            if len(generations) == 2:
                gen2_offspring = np.zeros(frontier.size, dtype=np.int64)
            break
        starts = np.repeat(offsets[frontier], counts)
        within = np.arange(n_arcs) - np.repeat(np.cumsum(counts) - counts, counts)
        arc = starts + within
        targets = nbr[arc]
        hit = (rng.random(n_arcs) < w[arc]) & (state[targets] == _SUSCEPTIBLE)
        hit_targets = targets[hit]
        new, first_claim = np.unique(hit_targets, return_index=True)
        if len(generations) == 2:
            infector = np.repeat(np.arange(frontier.size), counts)[hit][first_claim]
            gen2_offspring = np.bincount(infector, minlength=frontier.size)
        if new.size == 0:
            break
        state[new] = _INFECTED
        frontier = new
        generations.append(int(new.size))
        total += int(new.size)

    if np.any(mask[state == _INFECTED]):
        raise AssertionError("a vaccinated vertex was infected")
    return EpidemicRun(seed, first, generations, total, gen2_offspring, truncated)


# --- ensembles -----------------------------------------------------------------------

_WORKER: dict = {}


def _run_seed(master_seed: int, run: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(run,)))


def _summarise(g, mask, master_seed, runs, stop_at, max_generations):
    out = np.zeros((len(runs), 3), dtype=np.int64)
    for row, r in enumerate(runs):
        res = run_epidemic(g, mask, _run_seed(master_seed, r), stop_at, max_generations)
        out[row] = (res.final_size, res.gen2_offspring.size, int(res.gen2_offspring.sum()))
    return out


def _worker_init(g, mask):
    _WORKER["g"] = g
    _WORKER["mask"] = mask


def _worker_chunk(args):
    master_seed, runs, stop_at, max_generations = args
    return _summarise(_WORKER["g"], _WORKER["mask"], master_seed, runs, stop_at, max_generations)


def _binomial_ci(k: int, n: int) -> tuple[float, float]:
    p = k / n
    half = Z95 * math.sqrt(p * (1 - p) / n)
    return max(0.0, p - half), min(1.0, p + half)


def run_ensemble(
    g,
    plan=None,
    runs: int = 1000,
    master_seed: int = 0,
    threads: int | None = None,
    outbreak_fraction: float = OUTBREAK_FRACTION,
    stop_at: int | None = None,
    max_generations: int | None = None,
) -> EnsembleStats:
    """Independent epidemics from the same graph and plan.

    ``stop_at``/``max_generations`` are passed to every run; the final-size
    statistic is NaN whenever any run was cut short by them.
    """
    if runs < 1:
        raise ParameterError("need at least one run")
    mask = _as_mask(g, plan)
    threads = threads or os.cpu_count() or 1
    chunks = [list(c) for c in np.array_split(np.arange(runs), min(runs, max(1, threads) * 4)) if c.size]
    if threads <= 1:
        parts = [_summarise(g, mask, master_seed, c, stop_at, max_generations) for c in chunks]
    else:
        ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else None
        with ProcessPoolExecutor(threads, mp_context=ctx, initializer=_worker_init, initargs=(g, mask)) as ex:
            parts = list(ex.map(_worker_chunk, [(master_seed, c, stop_at, max_generations) for c in chunks]))
    table = np.concatenate(parts)
    final, x, y = table[:, 0], table[:, 1], table[:, 2]

    cutoff = outbreak_cutoff(g.n, outbreak_fraction)
    big = final >= cutoff
    k = int(big.sum())
    truncated = stop_at is not None or max_generations is not None
    final_frac = float(final[big].mean() / g.n) if k and not truncated else float("nan")

    est = _ratio_estimate(x, y)
    return EnsembleStats(
        runs=runs,
        outbreak_prob=k / runs,
        outbreak_ci=_binomial_ci(k, runs),
        mean_gen2_offspring=est.value,
        gen2_se=est.se,
        gen2_ci=(est.ci_low, est.ci_high),
        gen2_vertices=est.gen2_vertices,
        runs_with_gen2=est.runs_with_gen2,
        mean_final_fraction_given_outbreak=final_frac,
        final_sizes=final,
    )


def _ratio_estimate(x: np.ndarray, y: np.ndarray) -> REstimate:
    """Pooled offspring mean sum(y)/sum(x) with a run-clustered standard error."""
    sel = x > 0
    xs, ys = x[sel].astype(float), y[sel].astype(float)
    n_runs = int(sel.sum())
    if n_runs == 0:
        return REstimate(float("nan"), float("nan"), float("nan"), float("nan"), 0, 0)
    r = ys.sum() / xs.sum()
    if n_runs > 1:
        resid = ys - r * xs
        se = math.sqrt(float(np.sum(resid**2)) / (n_runs * (n_runs - 1))) / xs.mean()
    else:
        se = float("nan")
    return REstimate(float(r), se, r - Z95 * se, r + Z95 * se, int(xs.sum()), n_runs)


def estimate_r(g, plan=None, runs: int = 2000, master_seed: int = 0, threads: int | None = None) -> REstimate:
    """Mean number of cases caused by generation-2 infectives.

    Runs stop once generation 3 exists, which is all the estimate needs.
    """
    stats = run_ensemble(g, plan, runs, master_seed, threads, max_generations=3)
    if stats.runs_with_gen2 < MIN_GEN2_RUNS:
        raise InsufficientSamplesError(
            f"only {stats.runs_with_gen2} runs reached generation 2; need {MIN_GEN2_RUNS}"
        )
    se = stats.gen2_se
    return REstimate(stats.mean_gen2_offspring, se, stats.gen2_ci[0], stats.gen2_ci[1], stats.gen2_vertices, stats.runs_with_gen2)


def ensemble_csv(rows, comment: str | None = None) -> str:
    """CSV ``config_id,analytic_r,estimated_r,ci_low,ci_high,outbreak_prob,coverage``."""
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    cols = ["config_id", "analytic_r", "estimated_r", "ci_low", "ci_high", "outbreak_prob", "coverage"]
    w.writerow(cols)
    for row in rows:
        w.writerow([row[c] if isinstance(row[c], str) else repr(float(row[c])) for c in cols])
    return buf.getvalue()
