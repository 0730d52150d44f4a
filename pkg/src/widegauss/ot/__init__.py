from .lap import available_backends, default_backend, solve_assignment
from .metrics import (
    MATCHING_CAP,
    CapacityError,
    PointCloud,
    SinkhornConvergenceError,
    matching_bias_baseline,
    w1_exact_1d,
    w1_matching,
    w1_sinkhorn,
)

__all__ = [
    "MATCHING_CAP",
    "CapacityError",
    "PointCloud",
    "SinkhornConvergenceError",
    "available_backends",
    "default_backend",
    "matching_bias_baseline",
    "solve_assignment",
    "w1_exact_1d",
    "w1_matching",
    "w1_sinkhorn",
]
