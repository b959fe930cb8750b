"""Basic reproduction numbers without vaccination.

All expectations are finite sums over the truncated degree pmf.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .degree_dist import DegreeDist, excess_mean, size_bias
from .errors import ParameterError
from .weights import WeightFunctionG

__all__ = [
    "ThresholdReport",
    "r0_iid",
    "r0_degree_dep",
    "r0_h1",
    "r0_h2",
    "degree_dep_trio",
    "sweep_tau",
    "sweep_tau_csv",
]

REGIMES = ("iid_weights", "degree_dep", "degree_dep_h1", "degree_dep_h2")


@dataclass(frozen=True)
class ThresholdReport:
    r0: float
    regime: str
    degree_spec: str
    weight_spec: str

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ParameterError(f"unknown regime {self.regime!r}")
        if not (np.isfinite(self.r0) and self.r0 >= 0):
            raise ParameterError(f"reproduction number must be finite and >= 0, got {self.r0}")


def _require_edges(d: DegreeDist):
    if d.mean() <= 0:
        raise ParameterError("reproduction numbers need a positive mean degree")


def r0_iid(d: DegreeDist, gamma: float) -> float:
    """R0 = gamma * E[D~ - 1] for i.i.d. weights with mean ``gamma``."""
    if not 0 <= gamma <= 1:
        raise ParameterError(f"mean weight must lie in [0, 1], got {gamma}")
    _require_edges(d)
    return gamma * excess_mean(d)


def r0_degree_dep(d: DegreeDist, g: WeightFunctionG) -> float:
    """E[(D~ - 1) g(D~)]."""
    _require_edges(d)
    sb = size_bias(d)
    k = sb.degrees
    return float(np.dot((k - 1) * g(k), sb.pmf))


def r0_h1(d: DegreeDist, g: WeightFunctionG) -> float:
    """E[g(D~)] E[D~ - 1]: homogeneous epidemic at the half-edge mean weight."""
    _require_edges(d)
    return size_bias(d).expect(g) * excess_mean(d)


def r0_h2(d: DegreeDist, g: WeightFunctionG) -> float:
    """E[D~ - 1] E[g(D)]: homogeneous epidemic at the vertex-averaged weight."""
    _require_edges(d)
    return excess_mean(d) * d.expect(g)


def degree_dep_trio(d: DegreeDist, g: WeightFunctionG, weight_spec: str | None = None) -> list[ThresholdReport]:
    spec = weight_spec or f"g={g}"
    return [
        ThresholdReport(r0_h2(d, g), "degree_dep_h2", d.label, spec),
        ThresholdReport(r0_h1(d, g), "degree_dep_h1", d.label, spec),
        ThresholdReport(r0_degree_dep(d, g), "degree_dep", d.label, spec),
    ]


def sweep_tau(d: DegreeDist, taus) -> list[tuple[float, float, float, float]]:
    """Rows ``(tau, r0_h2, r0_h1, r0_deg)`` for g(x) = x**-tau."""
    _require_edges(d)
    sb = size_bias(d)
    k = d.degrees
    ex = excess_mean(d)
    rows = []
    for tau in taus:
        tau = float(tau)
        gk = WeightFunctionG("power", tau)(k)
        rows.append(
            (
                tau,
                ex * float(np.dot(gk, d.pmf)),
                ex * float(np.dot(gk, sb.pmf)),
                float(np.dot((k - 1) * gk, sb.pmf)),
            )
        )
    return rows


def sweep_tau_csv(d: DegreeDist, taus, comment: str | None = None) -> str:
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tau", "r0_h2", "r0_h1", "r0_deg"])
    for row in sweep_tau(d, taus):
        w.writerow([f"{row[0]:.6g}"] + [repr(float(x)) for x in row[1:]])
    return buf.getvalue()
