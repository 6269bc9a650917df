"""Frozen coagulation with limited aggregations: event-driven simulation,
configuration-model analysis, and the deterministic limit theory."""

from . import dynamic_cm, frozen_sim, graphs, gw_local, harness, measures, smoluchowski
from .measures import Pmf, binomial, borel_pmf, parse_dist, point_mass, poisson

__version__ = "0.1.0"

__all__ = [
    "Pmf",
    "poisson",
    "binomial",
    "point_mass",
    "parse_dist",
    "borel_pmf",
    "measures",
    "graphs",
    "dynamic_cm",
    "frozen_sim",
    "smoluchowski",
    "gw_local",
    "harness",
    "__version__",
]
