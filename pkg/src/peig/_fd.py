"""Finite-difference stencils shared across modules.

Second-order central differences in the interior, second-order
one-sided at interval endpoints, periodic wrap on circles. Grids may
be non-uniform (3-point formulas stay exact for quadratics).
"""

from __future__ import annotations

import numpy as np


def deriv1(values: np.ndarray, grid: np.ndarray, periodic: bool = False,
           circumference: float | None = None) -> np.ndarray:
    """First derivative of nodal values.

    For a circle the last node is NOT a duplicate of the first; the
    wrap distance is circumference - (grid[-1] - grid[0]).
    """
    v = np.asarray(values, dtype=float)
    x = np.asarray(grid, dtype=float)
    if not periodic:
        return np.gradient(v, x, edge_order=2)
    if circumference is None:
        raise ValueError("periodic derivative needs the circumference")
    h = circumference / len(x)  # uniform circle mesh
    return (np.roll(v, -1) - np.roll(v, 1)) / (2.0 * h)


def deriv2(values: np.ndarray, grid: np.ndarray, periodic: bool = False,
           circumference: float | None = None) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    x = np.asarray(grid, dtype=float)
    n = len(v)
    if periodic:
        if circumference is None:
            raise ValueError("periodic derivative needs the circumference")
        h = circumference / n
        return (np.roll(v, -1) - 2.0 * v + np.roll(v, 1)) / h**2

    out = np.empty(n)
    # interior: 3-point formula valid on non-uniform grids
    dl = x[1:-1] - x[:-2]
    dr = x[2:] - x[1:-1]
    out[1:-1] = 2.0 * (v[:-2] * dr - v[1:-1] * (dl + dr) + v[2:] * dl) / (
        dl * dr * (dl + dr))
    # endpoints: cubic fit through the 4 nearest nodes, O(h^2).
    # polyfit is highest-degree-first; at the shifted origin p''(0) = 2 c1.
    for idx, sl in ((0, slice(0, 4)), (n - 1, slice(n - 4, n))):
        c = np.polyfit(x[sl] - x[idx], v[sl], 3)
        out[idx] = 2.0 * c[1]
    return out


def central_only_deriv1(values: np.ndarray, h: float) -> np.ndarray:
    """Central differences everywhere, one-sided 2nd-order at the ends,
    uniform spacing. Kept separate from deriv1 for hot loops."""
    v = np.asarray(values, dtype=float)
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
    out[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    return out
