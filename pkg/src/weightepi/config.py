"""Parsing of model specs and flat ``key = value`` config files.

Specs use call syntax and are parsed with :mod:`ast`, so nesting such as
``contacts(poisson(3), p=0.2)`` works without a hand-written grammar::

    degree   = powerlaw(3.5, mean=14)
    weights  = beta(0.5, 2.5)
    g        = power(0.7)
    strategy = weighted(1.0)
"""

from __future__ import annotations

import ast
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import degree_dist as dd
from . import weights as wm
from .errors import ConfigError, ParameterError
from .vaccination import FAMILIES

__all__ = [
    "Call",
    "parse_call",
    "parse_degree",
    "parse_weights",
    "parse_g",
    "parse_strategy",
    "parse_strategy_list",
    "parse_grid",
    "StrategyItem",
    "Config",
    "KEYS",
    "read_config",
    "parse_config_text",
]


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple
    kwargs: dict = field(default_factory=dict)


def _node(n: ast.AST, text: str):
    if isinstance(n, ast.Call):
        if not isinstance(n.func, ast.Name):
            raise ConfigError(f"unsupported call in {text!r}")
        names = [k.arg for k in n.keywords]
        if None in names or len(set(names)) != len(names):
            raise ConfigError(f"repeated or starred keyword in {text!r}")
        return Call(n.func.id, tuple(_node(a, text) for a in n.args), {k.arg: _node(k.value, text) for k in n.keywords})
    if isinstance(n, ast.Name):
        return Call(n.id, ())
    if isinstance(n, ast.UnaryOp) and isinstance(n.op, (ast.USub, ast.UAdd)):
        v = _node(n.operand, text)
        if not isinstance(v, (int, float)):
            raise ConfigError(f"bad number in {text!r}")
        return -v if isinstance(n.op, ast.USub) else v
    if isinstance(n, ast.Constant) and isinstance(n.value, (int, float, str)) and not isinstance(n.value, bool):
        return n.value
    raise ConfigError(f"cannot read {ast.unparse(n)!r} in {text!r}")


def parse_call(text: str) -> Call:
    """``name``, ``name(args)`` or ``name(args, key=value)`` as a :class:`Call`."""
    text = text.strip()
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError:
        raise ConfigError(f"cannot parse {text!r}") from None
    out = _node(tree.body, text)
    if not isinstance(out, Call):
        raise ConfigError(f"expected a name or call, got {text!r}")
    return out


def _num(v, what: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{what} must be a number, got {v!r}")
    return float(v)


def _int(v, what: str) -> int:
    x = _num(v, what)
    if x != int(x):
        raise ConfigError(f"{what} must be an integer, got {v!r}")
    return int(x)


def _bind(c: Call, names: list[str], required: int, text: str) -> dict:
    if len(c.args) > len(names):
        raise ConfigError(f"{c.name} takes at most {len(names)} positional arguments: {text!r}")
    bound = dict(zip(names, c.args))
    for k, v in c.kwargs.items():
        if k not in names:
            raise ConfigError(f"{c.name} has no argument {k!r}: {text!r}")
        if k in bound:
            raise ConfigError(f"{c.name} got {k!r} twice: {text!r}")
        bound[k] = v
    missing = [n for n in names[:required] if n not in bound]
    if missing:
        raise ConfigError(f"{c.name} is missing {', '.join(missing)}: {text!r}")
    return bound


_EMPIRICAL = re.compile(r"^\s*empirical\(\s*(['\"]?)(.+?)\1\s*\)\s*$")


def parse_degree(text: str, base: Path | None = None) -> dd.DegreeDist:
    """``poisson(6)``, ``point(3)``, ``powerlaw(3.5, mean=14[, method=shift])`` or ``empirical(file.csv)``."""
    m = _EMPIRICAL.match(text)
    if m:
        path = Path(m.group(2))
        if base is not None and not path.is_absolute():
            path = base / path
        try:
            return dd.from_csv(path)
        except OSError as e:
            raise ConfigError(f"cannot read degree table {str(path)!r}: {e.strerror}") from None
    c = parse_call(text)
    if c.name == "poisson":
        a = _bind(c, ["mu"], 1, text)
        return dd.poisson(_num(a["mu"], "mu"))
    if c.name == "point":
        a = _bind(c, ["k"], 1, text)
        return dd.point_mass(_int(a["k"], "k"))
    if c.name == "powerlaw":
        a = _bind(c, ["exponent", "mean", "method"], 2, text)
        method = a.get("method", Call("cutoff", ()))
        if not isinstance(method, Call) or method.args:
            raise ConfigError(f"method must be a bare name: {text!r}")
        return dd.power_law(_num(a["exponent"], "exponent"), _num(a["mean"], "mean"), method=method.name)
    raise ConfigError(f"unknown degree law {c.name!r}")


def parse_g(text: str) -> wm.WeightFunctionG:
    """``power(tau)``, ``indicator(theta)`` or ``geom(alpha)``."""
    c = parse_call(text)
    if c.name in ("power", "indicator", "geom"):
        a = _bind(c, ["param"], 1, text)
        return wm.WeightFunctionG(c.name, _num(a["param"], c.name))
    if c.name == "table":
        return wm.WeightFunctionG("table", table=tuple(_num(v, "table entry") for v in c.args))
    raise ConfigError(f"unknown weight function {c.name!r}")


def _weights_from_call(c: Call, text: str):
    if c.name == "uniform":
        _bind(c, [], 0, text)
        return wm.Uniform()
    if c.name == "beta":
        a = _bind(c, ["a", "b"], 2, text)
        return wm.Beta(_num(a["a"], "a"), _num(a["b"], "b"))
    if c.name == "twopoint":
        a = _bind(c, ["a", "b", "pa"], 3, text)
        return wm.TwoPoint(_num(a["a"], "a"), _num(a["b"], "b"), _num(a["pa"], "pa"))
    if c.name == "contacts":
        a = _bind(c, ["law", "p"], 2, text)
        law = a["law"]
        if not isinstance(law, Call):
            raise ConfigError(f"contacts needs a degree law as first argument: {text!r}")
        return wm.ContactCount(parse_degree(ast.unparse(_to_ast(law))), _num(a["p"], "p"))
    if c.name == "strength":
        a = _bind(c, ["law", "theta", "decay"], 1, text)
        law = a["law"]
        if not (isinstance(law, Call) and law.name == "exp" and len(law.args) == 1):
            raise ConfigError(f"strength needs exp(mean) as its law: {text!r}")
        x = wm.ExponentialStrength(_num(law.args[0], "mean"))
        if ("theta" in a) == ("decay" in a):
            raise ConfigError(f"strength needs exactly one of theta= or decay=: {text!r}")
        if "theta" in a:
            return wm.ThresholdStrength(x, "indicator", _num(a["theta"], "theta"))
        return wm.ThresholdStrength(x, "decay", _num(a["decay"], "decay"))
    if c.name == "g":
        raise ConfigError(f"write degree-dependent weights as g=...: {text!r}")
    raise ConfigError(f"unknown weight law {c.name!r}")


def _to_ast(v) -> ast.AST:
    if isinstance(v, Call):
        if not v.args and not v.kwargs:
            return ast.Name(v.name)
        return ast.Call(
            ast.Name(v.name), [_to_ast(a) for a in v.args], [ast.keyword(k, _to_ast(x)) for k, x in v.kwargs.items()]
        )
    return ast.Constant(v)


def parse_weights(text: str):
    """Weight law; ``g=power(0.7)`` (or similar) gives degree-dependent weights."""
    s = text.strip()
    if s.startswith("g=") or s.startswith("g ="):
        return wm.DegreeDependent(parse_g(s.split("=", 1)[1]))
    return _weights_from_call(parse_call(s), text)


@dataclass(frozen=True)
class StrategyItem:
    """One strategy with optional weight overrides for the simulated and analytic sides."""

    kind: str  # "none" or one of FAMILIES
    param: float = 0.0
    weights: object = None
    analytic_weights: object = None
    label: str = ""


_PARAM_NAMES = {"uniform": "v", "acquaintance": "beta", "weighted": "beta", "twopoint": "s"}


def parse_strategy(text: str) -> StrategyItem:
    """``none``, ``uniform(0.3)``, ``acquaintance(beta=1)``, ``weighted(1)``, ``twopoint(s=0.5)``.

    ``weights=`` and ``analytic=`` keywords attach weight laws to the item.
    """
    c = parse_call(text)
    label = re.sub(r"\s+", "", text)
    if c.name == "none":
        a = _bind(c, ["weights", "analytic"], 0, text)
        kind, param = "none", 0.0
    elif c.name in FAMILIES:
        pname = _PARAM_NAMES[c.name]
        a = _bind(c, [pname, "weights", "analytic"], 1, text)
        kind, param = c.name, _num(a[pname], pname)
    else:
        raise ConfigError(f"unknown strategy {c.name!r}")
    w = a.get("weights")
    aw = a.get("analytic")
    return StrategyItem(
        kind,
        param,
        None if w is None else _weights_from_call(w, text),
        None if aw is None else _weights_from_call(aw, text),
        label,
    )


def parse_strategy_list(text: str) -> list[StrategyItem]:
    return [parse_strategy(part) for part in text.split(";") if part.strip()]


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:step`` (stop included) or a comma list; empty text gives an empty grid."""
    s = text.strip()
    if not s:
        return np.zeros(0)
    try:
        if ":" in s:
            parts = [float(x) for x in s.split(":")]
            if len(parts) != 3 or parts[2] <= 0:
                raise ValueError
            start, stop, step = parts
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return np.round(start + step * np.arange(max(count, 0)), 12)
        return np.array([float(x) for x in s.split(",") if x.strip()])
    except ValueError:
        raise ConfigError(f"bad grid {text!r}; use start:stop:step or a comma list") from None


# --- config files ---------------------------------------------------------------------

KEYS = {
    "degree": str,
    "weights": str,
    "g": str,
    "gamma": float,
    "strategy": str,
    "strategies": str,
    "families": str,
    "sweep": str,
    "figure": int,
    "grid": str,
    "n": int,
    "runs": int,
    "seed": int,
    "threads": int,
    "outbreak_fraction": float,
    "replicates": int,
}


@dataclass
class Config:
    values: dict = field(default_factory=dict)
    lines: dict = field(default_factory=dict)
    source: str | None = None
    base: Path | None = None

    def get(self, key, default=None):
        return self.values.get(key, default)

    def update(self, overrides: dict) -> None:
        for k, v in overrides.items():
            if v is not None:
                self.values[k] = v
                self.lines.pop(k, None)

    def parsed(self, key: str, parser):
        """Apply ``parser`` to a value, tagging failures with the line it came from."""
        raw = self.values.get(key)
        if raw is None:
            return None
        try:
            return parser(raw)
        except (ConfigError, ParameterError) as e:
            line = self.lines.get(key)
            if isinstance(e, ConfigError) and e.line is None and line is not None:
                raise ConfigError(str(e), line, self.source) from None
            if isinstance(e, ParameterError) and line is not None:
                raise ParameterError(f"{self.source}:{line}: {e}") from None
            raise

    def echo(self) -> str:
        return " ".join(f"{k}={self.values[k]}" for k in sorted(self.values))


def parse_config_text(text: str, source: str = "<config>", base: Path | None = None) -> Config:
    cfg = Config(source=source, base=base)
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {raw.strip()!r}", no, source)
        key, value = (x.strip() for x in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", no, source)
        if key in cfg.values:
            raise ConfigError(f"duplicate key {key!r}", no, source)
        try:
            cfg.values[key] = KEYS[key](value)
        except ValueError:
            raise ConfigError(f"{key} expects {KEYS[key].__name__}, got {value!r}", no, source) from None
        cfg.lines[key] = no
    return cfg


def read_config(path: str | Path) -> Config:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {str(p)!r}: {e.strerror}") from None
    return parse_config_text(text, source=str(p), base=p.parent)
