"""Monte Carlo toolkit for heavy-tailed, spatially non-homogeneous random walks."""
from .estimators import ExponentEstimate, HillEstimator, hill_estimate, loglog_slope, survival_slope
from .strip import InducedChainSpec, StripKernel, build_lamperti, classify_regime, simulate_strip
from .tails import DomainError, TailLaw
from .walk import IncrementLaw, simulate_walk

__version__ = "0.1.0"
__all__ = [
    "DomainError", "ExponentEstimate", "HillEstimator", "IncrementLaw", "InducedChainSpec",
    "StripKernel", "TailLaw", "build_lamperti", "classify_regime", "hill_estimate",
    "loglog_slope", "simulate_strip", "simulate_walk", "survival_slope",
]
