"""Poisson-driven approximations of fBm, sub-fBm and the Lei-Nualart process.

H follows the convention H in (0, 2) with fBm covariance
(t^H + s^H - |t - s|^H) / 2.
"""

from ._core import (
    HorizonGuard,
    InvalidCombination,
    Kernel,
    NonConvergence,
    ReplicaFailure,
    SingularPoint,
    UnsupportedParameter,
    cov,
    decomposition_constant,
    kernel_inner_product,
    poisson_jumps,
    run_ensemble,
    transform,
    validate_theta,
)

__all__ = [
    "HorizonGuard",
    "InvalidCombination",
    "Kernel",
    "NonConvergence",
    "ReplicaFailure",
    "SingularPoint",
    "UnsupportedParameter",
    "cov",
    "decomposition_constant",
    "kernel_inner_product",
    "poisson_jumps",
    "run_ensemble",
    "transform",
    "validate_theta",
]
