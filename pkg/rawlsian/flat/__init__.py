"""Fair Linear Adaptation of Thresholds (FLAT) under Gaussian sub-population models."""

from rawlsian.flat.general import solve_flat_general
from rawlsian.flat.geometry import (
    FlatResult,
    GaussianProblem,
    SolverDiagnostics,
    flat_finalize,
    gaussian_linear_error,
    kappa_profile,
    pair_kappa_profile,
    psd_sqrt,
)
from rawlsian.flat.oracle import DirectionSweep, grid_oracle_2d
from rawlsian.flat.spherical import min_norm_point, solve_flat_spherical

__all__ = [
    "DirectionSweep",
    "FlatResult",
    "GaussianProblem",
    "SolverDiagnostics",
    "flat_finalize",
    "gaussian_linear_error",
    "grid_oracle_2d",
    "kappa_profile",
    "pair_kappa_profile",
    "min_norm_point",
    "psd_sqrt",
    "solve_flat_general",
    "solve_flat_spherical",
]
