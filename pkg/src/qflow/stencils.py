"""Finite-difference stencils on uniform grids.

Interior points use centered stencils; the outermost points fall back to
one-sided stencils of the same order.  Weights are generated from the
Vandermonde system rather than hard-coded tables, so any (derivative,
order) pair stays consistent by construction.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import ValidationError

#: centered half-width per (derivative m, accuracy order p)
_HALF = {(1, 2): 1, (2, 2): 1, (3, 2): 2, (1, 4): 2, (2, 4): 2, (3, 4): 3}
#: one-sided stencil length per (m, p)
_EDGE = {(1, 2): 3, (2, 2): 4, (3, 2): 5, (1, 4): 5, (2, 4): 6, (3, 4): 7}


def fd_weights(offsets, m: int) -> np.ndarray:
    """Weights w such that sum(w * f(x0 + offsets*h)) ~ h^m f^(m)(x0)."""
    offsets = np.asarray(offsets, dtype=float)
    A = np.vander(offsets, increasing=True).T
    b = np.zeros(len(offsets))
    b[m] = math.factorial(m)
    return np.linalg.solve(A, b)


@lru_cache(maxsize=64)
def _stencil_table(m: int, order: int):
    if (m, order) not in _HALF:
        raise ValidationError(f"unsupported derivative/order pair ({m}, {order})")
    half = _HALF[(m, order)]
    edge = _EDGE[(m, order)]
    center = fd_weights(np.arange(-half, half + 1), m)
    rows = np.array([fd_weights(np.arange(edge) - i, m) for i in range(half)])
    return half, edge, center, rows


def derivative(f: np.ndarray, h: float, m: int = 1, order: int = 4) -> np.ndarray:
    """m-th derivative of samples ``f`` on a uniform grid of spacing ``h``."""
    f = np.asarray(f, dtype=float)
    n = f.shape[0]
    half, edge, center, edge_rows = _stencil_table(m, order)
    if n < edge:
        raise ValidationError(f"grid too short for stencils: {n} < {edge} points")
    out = np.empty_like(f)
    acc = center[0] * f[0:n - 2 * half]
    for j in range(1, 2 * half + 1):
        acc = acc + center[j] * f[j:n - 2 * half + j]
    out[half:n - half] = acc
    out[:half] = edge_rows @ f[:edge]
    # mirrored one-sided stencils; odd derivatives flip sign under reflection
    sign = -1.0 if m % 2 else 1.0
    out[n - half:] = (sign * (edge_rows @ f[: n - edge - 1: -1]))[::-1]
    return out / h**m


def grid_spacing(x: np.ndarray, rtol: float = 1e-9) -> float:
    """Spacing of a uniform grid; rejects non-uniform input."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValidationError("grid must be a 1-D array with at least 2 points")
    d = np.diff(x)
    h = d[0]
    if h <= 0 or not np.allclose(d, h, rtol=rtol, atol=rtol * max(abs(h), 1.0)):
        raise ValidationError("grid is not uniformly spaced")
    return float(h)


def trapezoid_weights(x: np.ndarray) -> np.ndarray:
    """Quadrature weights of the trapezoid rule on an arbitrary 1-D grid."""
    x = np.asarray(x, dtype=float)
    w = np.zeros_like(x)
    d = np.diff(x)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w
