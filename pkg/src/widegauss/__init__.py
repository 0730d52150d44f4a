"""Wide random networks against their Gaussian limits.

Simulation of finite-width networks under general weight laws, the limiting
kernel recursion, exact empirical Wasserstein-1 distances, and fully
explicit error bounds with computable constants and rate exponents.
"""

from .activations import ActivationSpec, activation
from .bounds import (
    BoundReport,
    CertificatePair,
    LedgerError,
    MeasuredPair,
    MomentLedger,
    SmoothingDomainError,
    bound_chain,
    combinatorial_constant,
    gaussianization_term,
    ledger_from_config,
    mixture_to_limit_term,
    moment_bound,
    moment_difference_bound,
    pair_cross_constant,
    pair_mismatch_constant,
    rate_bound,
    rate_exponent,
    smooth_to_wasserstein,
)
from .kernel import (
    IndefiniteCovarianceError,
    KernelMatrix,
    QuadratureConvergenceError,
    base_kernel,
    gaussian_expectation,
    kernel_recursion,
    kernel_step,
    relu_closed_form,
    sample_gaussian_fdd,
)
from .network import (
    FddSample,
    InputSet,
    NetworkConfig,
    forward,
    sample_fdd,
    truncate_coords,
)
from .ot import (
    MATCHING_CAP,
    CapacityError,
    PointCloud,
    SinkhornConvergenceError,
    available_backends,
    default_backend,
    matching_bias_baseline,
    solve_assignment,
    w1_exact_1d,
    w1_matching,
    w1_sinkhorn,
)
from .streams import substream
from .sweep import (
    CellConfig,
    RateFit,
    SweepConfig,
    SweepRow,
    fit_rate,
    read_rows,
    run_cell,
    run_sweep,
)
from .weights import (
    FAMILIES,
    InfiniteMomentError,
    WeightSpec,
    moment_constant,
    sample_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "ActivationSpec",
    "BoundReport",
    "CapacityError",
    "CellConfig",
    "CertificatePair",
    "FAMILIES",
    "FddSample",
    "IndefiniteCovarianceError",
    "InfiniteMomentError",
    "InputSet",
    "KernelMatrix",
    "LedgerError",
    "MATCHING_CAP",
    "MeasuredPair",
    "MomentLedger",
    "NetworkConfig",
    "PointCloud",
    "QuadratureConvergenceError",
    "RateFit",
    "SinkhornConvergenceError",
    "SmoothingDomainError",
    "SweepConfig",
    "SweepRow",
    "WeightSpec",
    "activation",
    "available_backends",
    "base_kernel",
    "bound_chain",
    "combinatorial_constant",
    "default_backend",
    "fit_rate",
    "forward",
    "gaussian_expectation",
    "gaussianization_term",
    "kernel_recursion",
    "kernel_step",
    "ledger_from_config",
    "matching_bias_baseline",
    "mixture_to_limit_term",
    "moment_bound",
    "moment_constant",
    "moment_difference_bound",
    "pair_cross_constant",
    "pair_mismatch_constant",
    "rate_bound",
    "rate_exponent",
    "read_rows",
    "relu_closed_form",
    "run_cell",
    "run_sweep",
    "sample_fdd",
    "sample_gaussian_fdd",
    "sample_matrix",
    "smooth_to_wasserstein",
    "solve_assignment",
    "substream",
    "truncate_coords",
    "w1_exact_1d",
    "w1_matching",
    "w1_sinkhorn",
]
