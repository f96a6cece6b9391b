"""Inversion of bispectrum data back to the signal."""
from .constructive import constructive_recover
from .objective import objective_h, sample_block, wirtinger_gradient
from .spectral_init import InitConfig, estimate_dc, init_spectral
from .trust_region import (
    LineSearch,
    SolverConfig,
    SolverTrace,
    armijo_backtrack,
    trust_region_solve,
)

__all__ = [
    "InitConfig",
    "LineSearch",
    "SolverConfig",
    "SolverTrace",
    "armijo_backtrack",
    "constructive_recover",
    "estimate_dc",
    "init_spectral",
    "objective_h",
    "sample_block",
    "trust_region_solve",
    "wirtinger_gradient",
]
