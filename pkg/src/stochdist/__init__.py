"""Distributed algorithms on stochastic graphs.

Vertices know the base graph and every edge probability; after a random
realization is drawn they communicate over realized edges only, in synchronous
rounds. The package contains a round simulator that enforces this model,
exact and Monte-Carlo baselines, and vertex cover, matching and dominating set
algorithms for the model.
"""

from . import kernels
from .engine import ModelViolation, Protocol, RunTrace, monte_carlo, run, run_trial
from .graph import BaseGraph, Realization, StochasticGraph, generate, load, sample_realization, save

__version__ = "0.1.0"

__all__ = [
    "kernels",
    "ModelViolation",
    "Protocol",
    "RunTrace",
    "monte_carlo",
    "run",
    "run_trial",
    "BaseGraph",
    "Realization",
    "StochasticGraph",
    "generate",
    "load",
    "sample_realization",
    "save",
]
