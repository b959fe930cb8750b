"""``weightepi`` command line: thresholds, sweeps, critical coverage, simulation.

Exit codes: 0 success, 2 parse error, 3 domain error, 4 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    Config,
    parse_degree,
    parse_g,
    parse_grid,
    parse_strategy,
    parse_strategy_list,
    parse_weights,
    read_config,
)
from .errors import (
    BracketError,
    ConfigError,
    InsufficientSamplesError,
    ParameterError,
    StrategyMismatchError,
    UnsupportedKindError,
)
from .netgen import edge_csv, generate, load_binary, to_bytes
from .sim import ensemble_csv, outbreak_cutoff, run_ensemble
from .thresholds import ThresholdReport, degree_dep_trio, r0_iid, sweep_tau_csv
from .vaccination import (
    FAMILIES,
    StrategySpec,
    apply_plan,
    coverage_sweep_csv,
    critical_coverage,
    sampled_fraction_csv,
)
from .validation import analytic_values, validate_items, validation_csv
from .weights import DegreeDependent, TwoPoint, is_continuous, mean_weight

EXIT_PARSE, EXIT_DOMAIN, EXIT_VALIDATION = 2, 3, 4

DEFAULT_SUITE = (
    "none; uniform(0.3); acquaintance(1); weighted(1); "
    "twopoint(0.5, weights=twopoint(a=0.1,b=1,pa=0.5))"
)

# figure presets: degree law, weight spec, sweep kind
FIGURES = {
    1: ("powerlaw(3.5,mean=4)", None, "tau"),
    2: ("poisson(6)", "uniform", "coverage"),
    4: ("poisson(14)", "beta(0.5,2.5)", "coverage"),
    5: ("powerlaw(3.5,mean=14)", "beta(0.5,2.5)", "coverage"),
    6: ("poisson(14)", "twopoint(a=0.1,b=1,pa=0.9)", "coverage"),
    7: ("powerlaw(3.5,mean=14)", "twopoint(a=0.1,b=1,pa=0.9)", "coverage"),
    8: ("powerlaw(3.5,mean=14)", "twopoint(a=0.1,b=1,pa=0.5)", "coverage"),
    9: ("powerlaw(3.5,mean=14)", "twopoint(a=0.1,b=1,pa=0.5)", "sampled"),
}

DEFAULT_GRIDS = {"tau": "0:1:0.02", "coverage": "0:0.95:0.01", "sampled": "0:0.95:0.01"}

# keys that never change results and so stay out of the echoed config line
_NOT_ECHOED = {"threads"}


class ValidationFailed(Exception):
    pass


# --- helpers ----------------------------------------------------------------------------


def _comment(command: str, cfg: Config) -> str:
    items = {k: v for k, v in cfg.values.items() if k not in _NOT_ECHOED}
    return f"weightepi {command} " + " ".join(f"{k}={items[k]}" for k in sorted(items))


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, newline="")
    else:
        sys.stdout.write(text)


def _require(cfg: Config, key: str) -> str:
    v = cfg.get(key)
    if v is None:
        raise ConfigError(f"missing required setting {key!r} (flag --{key.replace('_', '-')} or config key)")
    return v


def _degree(cfg: Config):
    _require(cfg, "degree")
    return cfg.parsed("degree", lambda s: parse_degree(s, cfg.base))


def _weights(cfg: Config, required: bool = True):
    if cfg.get("g") is not None:
        if cfg.get("weights") is not None:
            raise ConfigError("give either weights or g, not both")
        return DegreeDependent(cfg.parsed("g", parse_g))
    if cfg.get("weights") is None:
        if required:
            _require(cfg, "weights")
        return None
    return cfg.parsed("weights", parse_weights)


def _threads(cfg: Config) -> int:
    t = cfg.get("threads")
    if t is None:
        return os.cpu_count() or 1
    if t < 1:
        raise ParameterError(f"threads must be >= 1, got {t}")
    return int(t)


def _csv_rows(header, rows, comment) -> str:
    buf = io.StringIO()
    buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x) -> str:
    if x is None:
        return "nan"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    return repr(float(x))


# --- subcommands ------------------------------------------------------------------------


def cmd_threshold(cfg: Config, args) -> int:
    d = _degree(cfg)
    w = _weights(cfg, required=False)
    if isinstance(w, DegreeDependent):
        reports = degree_dep_trio(d, w.g, str(w))
    else:
        if cfg.get("gamma") is not None:
            if w is not None:
                raise ConfigError("give either gamma or weights, not both")
            gamma, spec = float(cfg.get("gamma")), f"gamma={cfg.get('gamma')}"
        elif w is not None:
            gamma, spec = mean_weight(w), str(w)
        else:
            raise ConfigError("threshold needs one of --gamma, --weights or --g")
        reports = [ThresholdReport(r0_iid(d, gamma), "iid_weights", d.label, spec)]
    text = _csv_rows(
        ["regime", "r0", "degree", "weights"],
        [[r.regime, repr(float(r.r0)), r.degree_spec, r.weight_spec] for r in reports],
        _comment("threshold", cfg),
    )
    _emit(text, args.out)
    if args.out:
        for r in reports:
            print(f"{r.regime}: {r.r0:.10g}")
    return 0


def cmd_sweep(cfg: Config, args) -> int:
    fig = cfg.get("figure")
    if fig is not None:
        if fig not in FIGURES:
            raise ConfigError(f"no preset for figure {fig}; choose from {sorted(FIGURES)}")
        degree, weights, kind = FIGURES[fig]
        cfg.values.setdefault("degree", degree)
        if weights is not None and cfg.get("g") is None:
            cfg.values.setdefault("weights", weights)
        cfg.values.setdefault("sweep", kind)
    kind = cfg.get("sweep", "coverage")
    if kind not in DEFAULT_GRIDS:
        raise ConfigError(f"sweep must be one of {sorted(DEFAULT_GRIDS)}, got {kind!r}")
    cfg.values.setdefault("grid", DEFAULT_GRIDS[kind])
    grid = cfg.parsed("grid", parse_grid)
    d = _degree(cfg)
    comment = _comment("sweep", cfg)

    if kind == "tau":
        text = sweep_tau_csv(d, grid, comment)
    elif kind == "coverage":
        text = coverage_sweep_csv(d, _weights(cfg), grid, comment)
    else:
        m = _weights(cfg)
        fams = ("acquaintance", "twopoint") if isinstance(m, TwoPoint) else ("acquaintance", "weighted")
        text = sampled_fraction_csv(d, m, grid, comment, families=fams)
    _emit(text, args.out)
    return 0


def _families_for(m) -> list[str]:
    fams = ["uniform", "acquaintance"]
    if isinstance(m, TwoPoint):
        fams.append("twopoint")
    elif is_continuous(m):
        fams.append("weighted")
    return fams


def cmd_coverage(cfg: Config, args) -> int:
    d = _degree(cfg)
    m = _weights(cfg)
    fams = cfg.get("families")
    fams = [f.strip() for f in fams.split(",") if f.strip()] if fams else _families_for(m)
    for f in fams:
        if f not in FAMILIES:
            raise ConfigError(f"unknown strategy {f!r}; choose from {', '.join(FAMILIES)}")
    rows = []
    for f in fams:
        c = critical_coverage(f, d, m)
        rows.append([f, _fmt(c.parameter), _fmt(c.coverage), _fmt(c.r_at_parameter), _fmt(c.reachable)])
    text = _csv_rows(
        ["strategy", "parameter", "critical_coverage", "r_at_parameter", "reachable"], rows, _comment("coverage", cfg)
    )
    _emit(text, args.out)
    return 0


def cmd_validate(cfg: Config, args) -> int:
    cfg.values.setdefault("degree", "poisson(6)")
    if cfg.get("g") is None:
        cfg.values.setdefault("weights", "uniform")
    cfg.values.setdefault("strategies", DEFAULT_SUITE)
    cfg.values.setdefault("n", 200000)
    cfg.values.setdefault("runs", 2000)
    cfg.values.setdefault("seed", 0)
    n = int(cfg.get("n"))
    if n < 1000:
        raise ParameterError(f"validation needs n >= 1000, got {n}")
    d = _degree(cfg)
    m = _weights(cfg)
    items = cfg.parsed("strategies", parse_strategy_list)
    rows = validate_items(d, items, m, n, int(cfg.get("runs")), int(cfg.get("seed")), threads=_threads(cfg))
    _emit(validation_csv(rows, _comment("validate", cfg)), args.out)
    if not all(r.passed for r in rows):
        failed = ", ".join(r.config_id for r in rows if not r.passed)
        raise ValidationFailed(f"validation failed for: {failed}")
    return 0


def cmd_generate(cfg: Config, args) -> int:
    cfg.values.setdefault("n", 10000)
    cfg.values.setdefault("seed", 0)
    d = _degree(cfg)
    m = _weights(cfg)
    g = generate(int(cfg.get("n")), d, m, seed=int(cfg.get("seed")))
    if args.format == "csv":
        _emit(f"# {_comment('generate', cfg)}\n" + edge_csv(g), args.out)
        return 0
    blob = to_bytes(g)
    if args.out:
        Path(args.out).write_bytes(blob)
    else:
        sys.stdout.buffer.write(blob)
    return 0


def cmd_simulate(cfg: Config, args) -> int:
    cfg.values.setdefault("runs", 1000)
    cfg.values.setdefault("seed", 0)
    cfg.values.setdefault("strategy", "none")
    seed = int(cfg.get("seed"))
    item = cfg.parsed("strategy", parse_strategy)
    if args.graph:
        g = load_binary(args.graph)
        cfg.values.setdefault("graph", args.graph)
        cfg.values.setdefault("degree", g.degree_spec)
        cfg.values.setdefault("weights", g.weight_spec)
    else:
        cfg.values.setdefault("n", 10000)
        g = None
    d = _degree(cfg)
    m = item.weights if item.weights is not None else _weights(cfg)
    if g is None:
        g = generate(int(cfg.get("n")), d, m, seed=seed)

    if item.kind == "none":
        mask, coverage = np.zeros(g.n, dtype=bool), 0.0
    else:
        plan = apply_plan(g, StrategySpec(item.kind, item.param, m), np.random.default_rng([seed, 1, 0]))
        mask, coverage = plan.mask, plan.realized_coverage
    try:
        analytic = analytic_values(item.kind, item.param, d, item.analytic_weights or m)[1]
    except (UnsupportedKindError, StrategyMismatchError):
        analytic = float("nan")

    frac = cfg.get("outbreak_fraction", 0.01)
    stats = run_ensemble(
        g, mask, int(cfg.get("runs")), master_seed=seed, threads=_threads(cfg), stop_at=outbreak_cutoff(g.n, frac)
    )
    row = {
        "config_id": item.label or item.kind,
        "analytic_r": analytic,
        "estimated_r": stats.mean_gen2_offspring,
        "ci_low": stats.gen2_ci[0],
        "ci_high": stats.gen2_ci[1],
        "outbreak_prob": stats.outbreak_prob,
        "coverage": coverage,
    }
    _emit(ensemble_csv([row], _comment("simulate", cfg)), args.out)
    return 0


COMMANDS = {
    "threshold": (cmd_threshold, "basic reproduction numbers without vaccination"),
    "sweep": (cmd_sweep, "figure-ready sweeps over tau, coverage or sampled fraction"),
    "coverage": (cmd_coverage, "critical vaccination coverage per strategy"),
    "validate": (cmd_validate, "analytic versus simulated rows with pass/fail flags"),
    "generate": (cmd_generate, "write a weighted configuration-model graph"),
    "simulate": (cmd_simulate, "one Reed-Frost ensemble"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file; flags override its values")
    common.add_argument("--degree", help="degree law, e.g. poisson(6) or powerlaw(3.5,mean=14)")
    common.add_argument("--weights", help="weight law, e.g. uniform, beta(0.5,2.5), g=power(0.7)")
    common.add_argument("--g", help="degree-dependent weight function, e.g. power(0.7)")
    common.add_argument("--gamma", type=float, help="mean edge weight (threshold only)")
    common.add_argument("--strategy", help="single strategy, e.g. weighted(1)")
    common.add_argument("--strategies", help="semicolon-separated strategy list (validate)")
    common.add_argument("--families", help="comma-separated strategy families (coverage)")
    common.add_argument("--figure", type=int, help="sweep preset: 1, 2, 4, 5, 6, 7, 8 or 9")
    common.add_argument("--sweep", help="sweep kind: tau, coverage or sampled")
    common.add_argument("--grid", help="start:stop:step or comma list; empty for header only")
    common.add_argument("--seed", type=int)
    common.add_argument("--n", type=int, help="number of vertices")
    common.add_argument("--runs", type=int, help="epidemics per ensemble")
    common.add_argument("--threads", type=int, help="worker processes (default: all cores)")
    common.add_argument("--outbreak-fraction", dest="outbreak_fraction", type=float)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=["csv", "binary"], default=None)

    p = argparse.ArgumentParser(prog="weightepi", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"weightepi {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, parents=[common], help=help_text)
        if name == "simulate":
            sp.add_argument("--graph", help="binary graph written by 'generate'")
    return p


_OVERRIDABLE = [
    "degree", "weights", "g", "gamma", "strategy", "strategies", "families",
    "figure", "sweep", "grid", "seed", "n", "runs", "threads", "outbreak_fraction",
]


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = read_config(args.config) if args.config else Config()
    cfg.update({k: getattr(args, k) for k in _OVERRIDABLE})
    if args.format is None:
        args.format = "binary" if args.command == "generate" else "csv"
    elif args.format == "binary" and args.command != "generate":
        raise ConfigError("--format binary only applies to generate")
    return COMMANDS[args.command][0](cfg, args)


def main(argv=None) -> int:
    try:
        code = run(argv)
    except ConfigError as e:
        print(f"weightepi: parse error: {e}", file=sys.stderr)
        code = EXIT_PARSE
    except (ParameterError, UnsupportedKindError, StrategyMismatchError, BracketError, InsufficientSamplesError) as e:
        print(f"weightepi: domain error: {e}", file=sys.stderr)
        code = EXIT_DOMAIN
    except ValidationFailed as e:
        print(f"weightepi: {e}", file=sys.stderr)
        code = EXIT_VALIDATION
    return code


if __name__ == "__main__":
    sys.exit(main())
