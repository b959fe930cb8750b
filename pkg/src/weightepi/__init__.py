"""Epidemic thresholds and acquaintance vaccination on weighted random graphs.

Modules:

``degree_dist``  degree laws, size biasing, sampling
``weights``      edge-weight laws and degree-dependent weight functions
``netgen``       configuration-model graphs with directed edge weights
``thresholds``   reproduction numbers without vaccination
``ordstat``      order-statistic means of continuous weights
``vaccination``  strategy coverage, reproduction numbers, concrete plans
``sim``          Reed-Frost Monte Carlo ensembles
``validation``   analytic versus simulated comparison rows
``config``       spec-string and config-file parsing
``cli``          the ``weightepi`` command
"""

__version__ = "0.1.0"

from .degree_dist import DegreeDist, excess_mean, poisson, power_law, size_bias
from .netgen import WeightedGraph, generate
from .sim import estimate_r, run_ensemble, run_epidemic
from .thresholds import r0_degree_dep, r0_h1, r0_h2, r0_iid
from .vaccination import StrategySpec, apply_plan, critical_coverage, evaluate
from .weights import Beta, DegreeDependent, TwoPoint, Uniform, WeightFunctionG, mean_weight

__all__ = [
    "DegreeDist",
    "excess_mean",
    "poisson",
    "power_law",
    "size_bias",
    "WeightedGraph",
    "generate",
    "estimate_r",
    "run_ensemble",
    "run_epidemic",
    "r0_degree_dep",
    "r0_h1",
    "r0_h2",
    "r0_iid",
    "StrategySpec",
    "apply_plan",
    "critical_coverage",
    "evaluate",
    "Beta",
    "DegreeDependent",
    "TwoPoint",
    "Uniform",
    "WeightFunctionG",
    "mean_weight",
]
