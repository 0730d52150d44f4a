"""Assignment solver backend selection.

The compiled extension is preferred; the numpy implementation of the same
algorithm is the fallback when the extension is unavailable.  Both produce
identical assignments.  ``WIDEGAUSS_ASSIGNMENT_BACKEND`` (``compiled`` or
``python``) overrides the default, which the benchmark script uses to
compare the two.
"""

from __future__ import annotations

import os

import numpy as np

from . import _jv_fallback

try:  # pragma: no cover - depends on the build environment
    from . import _jv as _jv_compiled
except ImportError:  # pragma: no cover
    _jv_compiled = None

__all__ = ["available_backends", "default_backend", "solve_assignment"]

_ENV_VAR = "WIDEGAUSS_ASSIGNMENT_BACKEND"


def available_backends() -> tuple[str, ...]:
    if _jv_compiled is not None:
        return ("compiled", "python")
    return ("python",)


def default_backend() -> str:
    forced = os.environ.get(_ENV_VAR)
    if forced:
        if forced not in ("compiled", "python"):
            raise ValueError(f"{_ENV_VAR} must be 'compiled' or 'python', got {forced!r}")
        if forced == "compiled" and _jv_compiled is None:
            raise RuntimeError("compiled assignment backend requested but not built")
        return forced
    return "compiled" if _jv_compiled is not None else "python"


def solve_assignment(cost: np.ndarray, backend: str | None = None) -> np.ndarray:
    """Minimum-cost perfect matching of a square cost matrix.

    Returns ``col4row`` with ``col4row[i]`` the column matched to row ``i``.
    """
    backend = backend or default_backend()
    if backend == "compiled":
        if _jv_compiled is None:
            raise RuntimeError("compiled assignment backend is not built")
        return _jv_compiled.solve(np.ascontiguousarray(cost, dtype=np.float64))
    if backend == "python":
        return _jv_fallback.solve(cost)
    raise ValueError(f"unknown assignment backend {backend!r}")
