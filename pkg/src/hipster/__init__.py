"""Hipster random walks: exact root laws, tree simulation, monotone schemes,
entropy solutions and couplings."""
__version__ = "0.1.0"

from .dist import AffineMap, ContinuousLaw, Pmf, cdf, kolmogorov_distance, pmf_from_density, total_variation
from .evolution import (EvolutionConfig, StepDistribution, evolve_fomo, evolve_general, evolve_sym,
                        evolve_tal, time_averaged_law)
from .kernels import BACKEND

__all__ = [
    "AffineMap", "BACKEND", "ContinuousLaw", "EvolutionConfig", "Pmf", "StepDistribution", "cdf",
    "evolve_fomo", "evolve_general", "evolve_sym", "evolve_tal", "kolmogorov_distance",
    "pmf_from_density", "time_averaged_law", "total_variation",
]
