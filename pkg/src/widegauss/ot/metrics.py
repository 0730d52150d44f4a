"""Empirical Wasserstein-1 distances between finite-dimensional samples.

Replicate matrices are flattened row-major into points of dimension n*s, so
the Euclidean point distance equals the Frobenius distance between output
matrices.  ``w1_matching`` is the exact empirical distance (assignment
problem); ``w1_exact_1d`` is the sorted coupling, the independent oracle in
dimension one; ``w1_sinkhorn`` is an opt-in entropic approximation and is
never used as ground truth.  ``matching_bias_baseline`` measures the
finite-sample floor: the matching distance between two independent draws of
the same limit law, which an estimate of a vanishing distance cannot beat.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import logsumexp

from ..kernel import KernelMatrix, sample_gaussian_fdd
from ..network import FddSample
from .lap import solve_assignment

__all__ = [
    "MATCHING_CAP",
    "PointCloud",
    "w1_exact_1d",
    "w1_matching",
    "w1_sinkhorn",
    "matching_bias_baseline",
]

# Largest matching size solved by default; quadratic memory above this hurts.
MATCHING_CAP = 4096


class CapacityError(ValueError):
    """Problem size exceeds the configured matching cap."""


class SinkhornConvergenceError(RuntimeError):
    """Sinkhorn iterations stopped before reaching the marginal tolerance."""

    def __init__(self, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"sinkhorn failed to converge: marginal residual {residual:.3e} "
            f"after {iterations} iterations"
        )


@dataclass(frozen=True)
class PointCloud:
    """N points in R^D with the originating (n, s) shape retained."""

    points: np.ndarray
    n_coords: int = 0
    s: int = 0

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError(f"points must form a nonempty N x D array, got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        object.__setattr__(self, "points", pts)
        if self.n_coords == 0:
            object.__setattr__(self, "n_coords", 1)
            object.__setattr__(self, "s", pts.shape[1])
        elif self.n_coords * self.s != pts.shape[1]:
            raise ValueError("n_coords * s must equal the point dimension")

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @classmethod
    def from_fdd(cls, sample: FddSample) -> "PointCloud":
        n, s = sample.n_coords, sample.s
        return cls(points=sample.data.reshape(sample.n_replicates, n * s), n_coords=n, s=s)


def w1_exact_1d(xs: np.ndarray, ys: np.ndarray) -> float:
    """Exact empirical W1 on the line: mean gap of the sorted samples."""
    xs = np.asarray(xs, dtype=np.float64).ravel()
    ys = np.asarray(ys, dtype=np.float64).ravel()
    if xs.size != ys.size or xs.size == 0:
        raise ValueError("both samples must be nonempty and equally sized")
    return float(np.mean(np.abs(np.sort(xs) - np.sort(ys))))


def _as_points(cloud) -> np.ndarray:
    if isinstance(cloud, PointCloud):
        return cloud.points
    if isinstance(cloud, FddSample):
        return PointCloud.from_fdd(cloud).points
    arr = np.asarray(cloud, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    return PointCloud(points=arr).points


def w1_matching(
    x,
    y,
    cap: int = MATCHING_CAP,
    backend: str | None = None,
) -> float:
    """Exact empirical W1 between equal-size clouds via optimal assignment.

    Inputs are canonically ordered before solving, so the result is exactly
    symmetric in its arguments.
    """
    xp = _as_points(x)
    yp = _as_points(y)
    if xp.shape != yp.shape:
        raise ValueError(f"clouds must share a shape, got {xp.shape} vs {yp.shape}")
    n = xp.shape[0]
    if n > cap:
        raise CapacityError(f"matching size {n} exceeds cap {cap}")
    if xp.tobytes() > yp.tobytes():
        xp, yp = yp, xp
    cost = cdist(xp, yp)
    col4row = solve_assignment(cost, backend=backend)
    return float(np.add.reduce(cost[np.arange(n), col4row]) / n)


def w1_sinkhorn(
    x,
    y,
    eps: float,
    max_iter: int = 5000,
    tol: float = 1e-9,
) -> float:
    """Entropic approximation of W1 (uniform marginals, log-domain updates).

    Returns the transport cost <P, C> of the converged plan.  This
    overestimates the exact matching distance and approaches it as eps
    shrinks; it is a speed/robustness trade-off, not a reference value.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    xp = _as_points(x)
    yp = _as_points(y)
    if xp.shape[1] != yp.shape[1]:
        raise ValueError("clouds must share a dimension")
    cost = cdist(xp, yp)
    n, m = cost.shape
    log_a = -math.log(n)
    log_b = -math.log(m)
    f = np.zeros(n)
    g = np.zeros(m)
    residual = np.inf
    for it in range(1, max_iter + 1):
        f = -eps * (logsumexp((g[None, :] - cost) / eps, axis=1) + log_b)
        g = -eps * (logsumexp((f[:, None] - cost) / eps, axis=0) + log_a)
        if it % 10 == 0 or it == max_iter:
            log_plan = (f[:, None] + g[None, :] - cost) / eps + log_a + log_b
            row_sums = np.exp(logsumexp(log_plan, axis=1))
            residual = float(np.abs(row_sums - 1.0 / n).sum())
            if residual < tol:
                plan = np.exp(log_plan)
                return float(np.sum(plan * cost))
    raise SinkhornConvergenceError(residual=residual, iterations=max_iter)


def matching_bias_baseline(
    kernel: KernelMatrix,
    n_coords: int,
    n_replicates: int,
    seeds,
    cap: int = MATCHING_CAP,
    backend: str | None = None,
) -> float:
    """Finite-sample floor of the matching estimator under the limit law.

    For each seed, two independent N-replicate draws of the same Gaussian
    limit are matched; the mean over seeds estimates the distance a perfect
    simulator would still report.
    """
    seeds = [int(s) for s in np.atleast_1d(seeds)]
    if not seeds:
        raise ValueError("need at least one seed")
    values = []
    for seed in seeds:
        first = sample_gaussian_fdd(kernel, n_coords, n_replicates, seed, stream=1)
        second = sample_gaussian_fdd(kernel, n_coords, n_replicates, seed, stream=2)
        values.append(w1_matching(first, second, cap=cap, backend=backend))
    return float(np.mean(values))
