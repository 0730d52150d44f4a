"""Limiting kernel recursion for wide random networks.

The infinite-width limit of the simulated networks is Gaussian with an
s x s covariance built layer by layer:

    K1[a,b]     = c_w0 <x_a, x_b> / n0
    K(l+1)[a,b] = c_w(l) E[sigma(Z_a) sigma(Z_b)],   (Z_a, Z_b) ~ N(0, 2x2 minor of K(l))

The bivariate expectation is evaluated by Gaussian quadrature after a
square-root factorization.  Smooth activations use a tensor-product
Gauss-Hermite rule on the eigen-factorization.  Piecewise-linear
activations (sigma(x) = A x + B|x|) would defeat any fixed product rule
with their cone kink, so they are integrated in conditioned coordinates:
the odd and absolute parts have exact Gaussian moments, and the one
remaining transcendental piece is a smooth half-line integral of the
folded-normal remainder, handled by Gauss-Legendre at the same node
count.  Directions whose eigenvalue is below 1e-12 relative to the trace
collapse to point masses, which keeps duplicated or antipodal input
points exact.  For relu the arc-cosine closed form is available as an
independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import ndtr

from .activations import ActivationSpec
from .network import FddSample, InputSet, NetworkConfig
from .streams import PURPOSE_GAUSSIAN_FDD, substream

__all__ = [
    "KernelMatrix",
    "base_kernel",
    "gaussian_expectation",
    "kernel_step",
    "kernel_recursion",
    "relu_closed_form",
    "sample_gaussian_fdd",
    "PSD_TOLERANCE",
    "COLLAPSE_RTOL",
    "CONVERGENCE_TOL",
]

# Eigenvalue floor for "PSD up to tolerance" checks.
PSD_TOLERANCE = 1e-10
# Eigenvalues below this fraction of the trace collapse to point masses.
COLLAPSE_RTOL = 1e-12
# Doubling the node count must move no kernel entry by more than this.
CONVERGENCE_TOL = 1e-9


class IndefiniteCovarianceError(ValueError):
    """Covariance matrix is indefinite beyond the PSD tolerance."""


class QuadratureConvergenceError(RuntimeError):
    """Gauss-Hermite values failed the node-doubling stability check."""


@dataclass(frozen=True)
class KernelMatrix:
    """Symmetric s x s limit covariance at a given layer."""

    array: np.ndarray
    layer: int

    def __post_init__(self) -> None:
        arr = np.asarray(self.array, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"kernel must be square, got shape {arr.shape}")
        object.__setattr__(self, "array", arr)

    @property
    def s(self) -> int:
        return self.array.shape[0]

    def validate(self, tol: float = PSD_TOLERANCE) -> None:
        """Raise unless symmetric, PSD up to ``tol``, with nonnegative diagonal."""
        arr = self.array
        scale = max(1.0, float(np.abs(arr).max()))
        if not np.all(np.isfinite(arr)):
            raise ValueError("kernel entries must be finite")
        if np.abs(arr - arr.T).max() > tol * scale:
            raise ValueError("kernel is not symmetric")
        if np.diag(arr).min() < -tol * scale:
            raise ValueError("kernel has a negative diagonal entry")
        min_eig = float(np.linalg.eigvalsh((arr + arr.T) / 2.0).min())
        if min_eig < -tol * scale:
            raise IndefiniteCovarianceError(
                f"kernel indefinite: min eigenvalue {min_eig:.3e} below floor {-tol * scale:.3e}"
            )

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "layer": self.layer,
            "s": self.s,
            "entries": [[float(v) for v in row] for row in self.array],
        }


def base_kernel(chi: InputSet, c_w0: float, n0: int | None = None) -> KernelMatrix:
    """Layer-1 covariance ``c_w0 <x_a, x_b> / n0`` (exact, no quadrature)."""
    if c_w0 <= 0:
        raise ValueError("c_w0 must be positive")
    n0 = chi.n0 if n0 is None else int(n0)
    if n0 != chi.n0:
        raise ValueError(f"n0={n0} does not match input dimension {chi.n0}")
    x = chi.matrix
    return KernelMatrix(array=c_w0 * (x.T @ x) / n0, layer=1)


@lru_cache(maxsize=32)
def _gh_nodes(n_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    # nodes/weights for weight exp(-t^2); rescaled to z = sqrt(2) t for N(0,1)
    t, w = np.polynomial.hermite.hermgauss(n_nodes)
    return math.sqrt(2.0) * t, w


# Half-line truncation for the folded-normal remainder integral; the
# integrand decays like exp(-t^2/2), so 13 leaves no representable mass.
_HALF_RANGE = 13.0

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@lru_cache(maxsize=32)
def _gl_nodes(n_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    half = _HALF_RANGE / 2.0
    return half * (x + 1.0), half * w


def _normal_pdf(x: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * x * x) / _SQRT_2PI


def _folded_remainder(y: np.ndarray) -> np.ndarray:
    # E|N(y,1)| - |y| = 2(phi(y) - y Phi(-y)); smooth, even, Gaussian decay
    return 2.0 * (_normal_pdf(y) - y * ndtr(-y))


def _piecewise_linear_expectation(
    kaa: float, kab: float, kbb: float, A: float, B: float, rank: int, n_nodes: int
) -> float:
    """E[sigma(Z_a) sigma(Z_b)] for sigma(x) = A x + B|x|.

    After conditioning Z_b on Z_a, the odd and |x| parts reduce to exact
    Gaussian moments (A^2 kab + B^2 |kab|); what remains is the smoothing
    the conditional noise applies to the kink, a single smooth half-line
    integral evaluated by Gauss-Legendre.
    """
    if rank == 0 or kaa <= 0.0 or kbb <= 0.0:
        return 0.0
    exact = A * A * kab + B * B * abs(kab)
    det = max(kaa * kbb - kab * kab, 0.0)
    if rank == 1 or det == 0.0 or B == 0.0:
        return exact
    alpha = math.sqrt(kaa)
    beta = kab / alpha
    gam = math.sqrt(det / kaa)
    c = abs(beta) / gam
    t, w = _gl_nodes(n_nodes)
    if c <= 1.0:
        vals = t * _folded_remainder(c * t) * _normal_pdf(t)
    else:
        # rescale to the kink layer so the rule sees a unit-width integrand
        vals = t * _folded_remainder(t) * _normal_pdf(t / c) / (c * c)
    return exact + 2.0 * B * B * alpha * gam * float(w @ vals)


def gaussian_expectation(
    cov: np.ndarray, sigma: ActivationSpec, n_nodes: int = 64
) -> float:
    """E[sigma(Z_a) sigma(Z_b)] for (Z_a, Z_b) ~ N(0, cov), cov 2x2.

    Eigenvalues below COLLAPSE_RTOL relative to the trace are treated as
    exact point masses, so rank-deficient covariances (duplicated points,
    perfect correlation) integrate over fewer dimensions instead of
    degrading.  Piecewise-linear activations take the conditioned
    Gauss-Legendre path; smooth ones a tensor Gauss-Hermite rule.
    """
    cov = np.asarray(cov, dtype=np.float64)
    if cov.shape != (2, 2):
        raise ValueError(f"need a 2x2 covariance, got shape {cov.shape}")
    if n_nodes < 2:
        raise ValueError("n_nodes must be at least 2")
    scale = max(1.0, float(np.abs(cov).max()))
    if abs(cov[0, 1] - cov[1, 0]) > PSD_TOLERANCE * scale:
        raise ValueError("covariance must be symmetric")
    sym = (cov + cov.T) / 2.0
    eigvals, eigvecs = np.linalg.eigh(sym)
    if eigvals[0] < -PSD_TOLERANCE * scale:
        raise IndefiniteCovarianceError(
            f"covariance indefinite: eigenvalues {eigvals.tolist()}"
        )
    trace = max(float(np.trace(sym)), 0.0)
    eigvals = np.where(eigvals < COLLAPSE_RTOL * trace, 0.0, np.maximum(eigvals, 0.0))
    active = np.flatnonzero(eigvals > 0.0)

    split = sigma.odd_even_split
    if split is not None:
        return _piecewise_linear_expectation(
            float(sym[0, 0]),
            float(sym[0, 1]),
            float(sym[1, 1]),
            split[0],
            split[1],
            int(active.size),
            n_nodes,
        )

    if active.size == 0:
        s0 = float(sigma(np.array(0.0)))
        return s0 * s0
    z, w = _gh_nodes(n_nodes)
    if active.size == 1:
        amp = eigvecs[:, active[0]] * math.sqrt(eigvals[active[0]])
        vals = sigma(amp[0] * z) * sigma(amp[1] * z)
        return float(vals @ w) / math.sqrt(math.pi)
    root = eigvecs @ np.diag(np.sqrt(eigvals))
    za = root[0, 0] * z[:, None] + root[0, 1] * z[None, :]
    zb = root[1, 0] * z[:, None] + root[1, 1] * z[None, :]
    vals = sigma(za) * sigma(zb)
    return float(w @ vals @ w) / math.pi


def kernel_step(
    kernel: KernelMatrix,
    sigma: ActivationSpec,
    c_w: float,
    n_nodes: int = 64,
    check_convergence: bool = True,
) -> KernelMatrix:
    """One recursion step ``K -> c_w E[sigma sigma]`` entry by entry.

    With ``check_convergence`` the step is re-evaluated at twice the node
    count and must agree to CONVERGENCE_TOL, else it raises.
    """
    if c_w <= 0:
        raise ValueError("c_w must be positive")
    kernel.validate()
    arr = kernel.array
    s = kernel.s

    def step_at(nodes: int) -> np.ndarray:
        out = np.empty((s, s), dtype=np.float64)
        for a in range(s):
            for b in range(a, s):
                minor = np.array(
                    [[arr[a, a], arr[a, b]], [arr[a, b], arr[b, b]]], dtype=np.float64
                )
                val = c_w * gaussian_expectation(minor, sigma, n_nodes=nodes)
                out[a, b] = val
                out[b, a] = val
        return out

    result = step_at(n_nodes)
    if check_convergence:
        finer = step_at(2 * n_nodes)
        gap = float(np.abs(result - finer).max())
        if gap > CONVERGENCE_TOL:
            raise QuadratureConvergenceError(
                f"kernel step unstable: doubling nodes moved an entry by {gap:.3e}"
            )
    return KernelMatrix(array=result, layer=kernel.layer + 1)


def kernel_recursion(
    config: NetworkConfig, chi: InputSet, n_nodes: int = 64
) -> list[KernelMatrix]:
    """All limit kernels K1..KL for a network configuration."""
    kernels = [base_kernel(chi, config.weight_specs[0].c_w)]
    for spec in config.weight_specs[1:]:
        kernels.append(
            kernel_step(kernels[-1], config.activation, spec.c_w, n_nodes=n_nodes)
        )
    return kernels


def relu_closed_form(k_aa: float, k_ab: float, k_bb: float) -> float:
    """Arc-cosine formula for E[relu(Z_a) relu(Z_b)] under a 2x2 Gaussian.

    Used as an independent cross-check of the quadrature path.
    """
    if k_aa < 0 or k_bb < 0:
        raise ValueError("diagonal entries must be nonnegative")
    denom = math.sqrt(k_aa * k_bb)
    if denom == 0.0:
        return 0.0
    rho = k_ab / denom
    if abs(rho) > 1.0 + 1e-8:
        raise ValueError(f"correlation {rho} outside [-1, 1]")
    rho = min(1.0, max(-1.0, rho))
    return denom / (2.0 * math.pi) * (
        math.sqrt(max(0.0, 1.0 - rho * rho)) + rho * (math.pi - math.acos(rho))
    )


def sample_gaussian_fdd(
    kernel: KernelMatrix, n_coords: int, n_replicates: int, seed: int, stream: int = 0
) -> FddSample:
    """Replicates of the limit law: rows i.i.d. N(0, K) per replicate.

    ``stream`` separates independent draws sharing one user seed (e.g. the
    two clouds of a bias-floor pair).
    """
    if n_coords < 1 or n_replicates < 1:
        raise ValueError("n_coords and n_replicates must be positive")
    kernel.validate()
    arr = (kernel.array + kernel.array.T) / 2.0
    eigvals, eigvecs = np.linalg.eigh(arr)
    root = eigvecs @ np.diag(np.sqrt(np.maximum(eigvals, 0.0)))
    g = substream(seed, PURPOSE_GAUSSIAN_FDD, stream)
    z = g.standard_normal((n_replicates, n_coords, kernel.s))
    data = z @ root.T
    return FddSample(
        data=data,
        layer=kernel.layer,
        provenance="gaussian_limit",
        meta={"seed": seed, "stream": stream},
    )
