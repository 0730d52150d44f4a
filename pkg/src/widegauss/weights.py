"""Weight-entry distributions and their exact absolute moments.

A layer with fan-in ``n`` draws i.i.d. entries with variance ``c_w / n``.
Every family is centered and symmetric.  ``moment_constant`` returns the
dimension-free constant ``c_k`` such that ``E|W_ij|^k = c_k * n**(-k/2)``;
these constants feed the explicit error bounds, so they are computed in
closed form rather than estimated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .streams import PURPOSE_WEIGHTS, substream

__all__ = ["FAMILIES", "WeightSpec", "sample_matrix", "moment_constant"]

FAMILIES = ("gaussian", "uniform", "rademacher", "student_t")


class InfiniteMomentError(ValueError):
    """Requested moment does not exist for the given family parameters."""


@dataclass(frozen=True)
class WeightSpec:
    """Entry distribution for one weight matrix.

    family : one of FAMILIES
    c_w    : variance scale; entries have variance c_w / fan_in
    nu     : degrees of freedom, required for (and only for) student_t
    """

    family: str
    c_w: float = 1.0
    nu: float | None = None

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown weight family {self.family!r}")
        if not (self.c_w > 0 and math.isfinite(self.c_w)):
            raise ValueError(f"c_w must be positive and finite, got {self.c_w}")
        if self.family == "student_t":
            if self.nu is None or not self.nu > 2:
                raise ValueError("student_t requires nu > 2 for a finite variance")
        elif self.nu is not None:
            raise ValueError(f"nu is only meaningful for student_t, got family {self.family!r}")

    def to_dict(self) -> dict:
        out = {"family": self.family, "c_w": self.c_w}
        if self.nu is not None:
            out["nu"] = self.nu
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "WeightSpec":
        known = {"family", "c_w", "nu"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown weight spec keys: {sorted(unknown)}")
        return cls(**data)


def sample_matrix(
    spec: WeightSpec,
    rows: int,
    cols: int,
    fan_in: int,
    seed: int,
    *,
    layer: int = 0,
    replicate: int = 0,
) -> np.ndarray:
    """Draw a ``rows x cols`` matrix with i.i.d. entries of variance c_w/fan_in.

    The stream is addressed by (seed, layer, replicate), so samples are
    reproducible independently of evaluation order.
    """
    if rows < 1 or cols < 1 or fan_in < 1:
        raise ValueError("rows, cols and fan_in must be positive")
    g = substream(seed, PURPOSE_WEIGHTS, layer, replicate)
    size = (rows, cols)
    if spec.family == "gaussian":
        return math.sqrt(spec.c_w / fan_in) * g.standard_normal(size)
    if spec.family == "uniform":
        half_width = math.sqrt(3.0 * spec.c_w / fan_in)
        return g.uniform(-half_width, half_width, size)
    if spec.family == "rademacher":
        signs = 2.0 * g.integers(0, 2, size=size).astype(np.float64) - 1.0
        return math.sqrt(spec.c_w / fan_in) * signs
    # student_t, rescaled so the variance is exactly c_w / fan_in
    scale = math.sqrt(spec.c_w * (spec.nu - 2.0) / (spec.nu * fan_in))
    return scale * g.standard_t(spec.nu, size=size)


def _gaussian_abs_moment(k: int) -> float:
    # E|Z|^k for Z ~ N(0,1); double factorial for even k is exact in floats
    if k % 2 == 0:
        out = 1.0
        for j in range(k - 1, 0, -2):
            out *= j
        return out
    return math.exp(0.5 * k * math.log(2.0) + math.lgamma((k + 1) / 2.0)) / math.sqrt(math.pi)


def moment_constant(spec: WeightSpec, k: int) -> float:
    """Exact c_k with ``E|W_ij|^k = c_k * fan_in**(-k/2)``.

    Closed forms per family; raises InfiniteMomentError when the moment
    does not exist (student_t with k >= nu).
    """
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValueError(f"moment order k must be a positive integer, got {k!r}")
    k = int(k)
    if spec.family == "gaussian":
        return spec.c_w ** (k / 2.0) * _gaussian_abs_moment(k)
    if spec.family == "rademacher":
        return spec.c_w ** (k / 2.0)
    if spec.family == "uniform":
        return (3.0 * spec.c_w) ** (k / 2.0) / (k + 1.0)
    # student_t: E|T|^k = nu^{k/2} Gamma((k+1)/2) Gamma((nu-k)/2) / (sqrt(pi) Gamma(nu/2))
    nu = float(spec.nu)
    if k >= nu:
        raise InfiniteMomentError(f"student_t with nu={nu} has no finite moment of order {k}")
    # scale^k * E|T|^k with scale = sqrt(c_w (nu-2)/nu); the nu^{k/2} factors cancel
    log_value = (
        0.5 * k * math.log(spec.c_w * (nu - 2.0))
        + math.lgamma((k + 1) / 2.0)
        + math.lgamma((nu - k) / 2.0)
        - 0.5 * math.log(math.pi)
        - math.lgamma(nu / 2.0)
    )
    return math.exp(log_value)
