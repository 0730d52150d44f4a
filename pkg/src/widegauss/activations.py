"""Elementwise nonlinearities with the Lipschitz data the bounds consume."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["ActivationSpec", "activation"]

_KINDS = ("relu", "tanh", "identity", "leaky_relu")


@dataclass(frozen=True)
class ActivationSpec:
    """A named activation together with its Lipschitz constant and value at 0.

    ``slope`` is only read by leaky_relu (the negative-side slope).
    """

    kind: str
    slope: float = 0.01

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown activation kind {self.kind!r}")
        if self.kind == "leaky_relu" and not math.isfinite(self.slope):
            raise ValueError("leaky_relu slope must be finite")

    @property
    def lip(self) -> float:
        if self.kind == "leaky_relu":
            return max(1.0, abs(self.slope))
        return 1.0

    @property
    def sigma0(self) -> float:
        """Value at the origin; enters the moment bounds as |sigma(0)|."""
        return 0.0

    @property
    def odd_even_split(self) -> tuple[float, float] | None:
        """(A, B) with sigma(x) = A*x + B*|x| when such a split exists.

        Piecewise-linear activations admit one; the kernel quadrature uses
        it to integrate the non-smooth part in closed coordinates.
        """
        if self.kind == "relu":
            return (0.5, 0.5)
        if self.kind == "identity":
            return (1.0, 0.0)
        if self.kind == "leaky_relu":
            return ((1.0 + self.slope) / 2.0, (1.0 - self.slope) / 2.0)
        return None

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "relu":
            return np.maximum(x, 0.0)
        if self.kind == "tanh":
            return np.tanh(x)
        if self.kind == "identity":
            return np.asarray(x, dtype=np.float64)
        return np.where(x >= 0.0, x, self.slope * x)

    def to_dict(self) -> dict:
        if self.kind == "leaky_relu":
            return {"kind": self.kind, "slope": self.slope}
        return {"kind": self.kind}

    @classmethod
    def from_dict(cls, data: dict) -> "ActivationSpec":
        known = {"kind", "slope"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown activation keys: {sorted(unknown)}")
        return cls(**data)


def activation(kind: str, slope: float = 0.01) -> ActivationSpec:
    """Convenience constructor, accepting either a kind name or a spec dict."""
    return ActivationSpec(kind=kind, slope=slope)
