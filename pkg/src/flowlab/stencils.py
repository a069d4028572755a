"""Periodic finite-difference stencils on uniform grids.

All fields live on an n-dimensional periodic grid with the grid axes
leading, i.e. an array of shape (N, ..., N, *component_shape).  Spatial
derivatives are 4th-order central differences; interpolation at off-grid
points uses 6-point tensor-product Lagrange polynomials (5th order).
"""

from __future__ import annotations

import numpy as np


def roll(field: np.ndarray, shift: int, axis: int) -> np.ndarray:
    # np.roll with positive shift moves data forward; sampling f(i+s) is roll(-s)
    return np.roll(field, -shift, axis=axis)


def d1(field: np.ndarray, dx: float, axis: int) -> np.ndarray:
    """4th-order first derivative along a periodic axis."""
    return (
        -roll(field, 2, axis)
        + 8.0 * roll(field, 1, axis)
        - 8.0 * roll(field, -1, axis)
        + roll(field, -2, axis)
    ) / (12.0 * dx)


def d2(field: np.ndarray, dx: float, axis: int) -> np.ndarray:
    """4th-order second derivative along a periodic axis."""
    return (
        -roll(field, 2, axis)
        + 16.0 * roll(field, 1, axis)
        - 30.0 * field
        + 16.0 * roll(field, -1, axis)
        - roll(field, -2, axis)
    ) / (12.0 * dx * dx)


def gradient(field: np.ndarray, dx: float, ndim: int) -> np.ndarray:
    """All first derivatives; returns shape (*grid, ndim, *components)."""
    return np.stack([d1(field, dx, ax) for ax in range(ndim)], axis=ndim)


def hessian(field: np.ndarray, dx: float, ndim: int) -> np.ndarray:
    """Symmetric matrix of chart second derivatives, shape (*grid, ndim, ndim).

    Mixed entries compose two first-derivative stencils, which keeps the
    whole Hessian 4th-order accurate.
    """
    out = np.empty(field.shape[:ndim] + (ndim, ndim), dtype=field.dtype)
    for a in range(ndim):
        out[..., a, a] = d2(field, dx, a)
        for b in range(a + 1, ndim):
            mixed = d1(d1(field, dx, a), dx, b)
            out[..., a, b] = mixed
            out[..., b, a] = mixed
    return out


def _lagrange_weights(frac: np.ndarray) -> np.ndarray:
    """Weights of 6-point Lagrange interpolation at offsets -2..3, shape (*frac.shape, 6)."""
    nodes = np.arange(-2.0, 4.0)
    t = frac[..., None]
    w = np.ones(frac.shape + (6,))
    for j in range(6):
        for m in range(6):
            if m != j:
                w[..., j] *= (t[..., 0] - nodes[m]) / (nodes[j] - nodes[m])
    return w


def interpolate_periodic(field: np.ndarray, points: np.ndarray, spacing: float, ndim: int) -> np.ndarray:
    """Evaluate a periodic grid field at arbitrary points.

    points has shape (P, ndim) in chart coordinates (period N*spacing per
    axis); field has shape (N,)*ndim + components.  Returns (P, *components).
    """
    grid_shape = field.shape[:ndim]
    comp_shape = field.shape[ndim:]
    n_axis = grid_shape[0]
    xi = points / spacing
    base = np.floor(xi).astype(np.int64)
    frac = xi - base

    weights = [_lagrange_weights(frac[:, ax]) for ax in range(ndim)]
    flat = field.reshape(grid_shape + (-1,))
    ncomp = flat.shape[-1]
    out = np.zeros((points.shape[0], ncomp))

    # accumulate the 6^ndim tensor-product corners; ndim <= 3 keeps this small
    offs = np.arange(-2, 4)
    if ndim == 1:
        for a, oa in enumerate(offs):
            idx = (base[:, 0] + oa) % n_axis
            out += weights[0][:, a, None] * flat[idx]
    elif ndim == 2:
        ia = [(base[:, 0] + o) % n_axis for o in offs]
        ib = [(base[:, 1] + o) % n_axis for o in offs]
        for a in range(6):
            wa = weights[0][:, a]
            for b in range(6):
                out += (wa * weights[1][:, b])[:, None] * flat[ia[a], ib[b]]
    elif ndim == 3:
        ia = [(base[:, 0] + o) % n_axis for o in offs]
        ib = [(base[:, 1] + o) % n_axis for o in offs]
        ic = [(base[:, 2] + o) % n_axis for o in offs]
        for a in range(6):
            for b in range(6):
                wab = weights[0][:, a] * weights[1][:, b]
                for c in range(6):
                    out += (wab * weights[2][:, c])[:, None] * flat[ia[a], ib[b], ic[c]]
    else:
        raise ValueError(f"unsupported dimension {ndim}")
    return out.reshape((points.shape[0],) + comp_shape)


def time_stencil_5pt(values: np.ndarray, dt: float) -> np.ndarray:
    """4th-order centered first derivative from 5 equispaced samples.

    values has shape (5, ...) ordered t-2dt .. t+2dt; returns d/dt at the center.
    """
    return (values[0] - 8.0 * values[1] + 8.0 * values[3] - values[4]) / (12.0 * dt)
