"""Tensor-product grids on [0, L] x [0, Y_max] and second-order difference calculus.

Fields are stored as arrays of shape (nx, ny) with f[i, j] = f(x_i, y_j).
All derivative operators are sparse 1D matrices acting along one axis, built
for arbitrary strictly increasing node sets (3-point interior stencils,
second-order one-sided rows at the ends).  Because x-operators act on axis 0
and y-operators on axis 1, mixed operators commute to machine precision, which
the stream-function solvers rely on for exact discrete incompressibility.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import sparse
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline


class Grid2D:
    """Tensor-product grid: strictly increasing x_nodes and y_nodes."""

    def __init__(self, x_nodes, y_nodes):
        x = np.asarray(x_nodes, dtype=float)
        y = np.asarray(y_nodes, dtype=float)
        if x.ndim != 1 or x.size < 4:
            raise ValueError("x_nodes must be 1D with at least 4 nodes")
        if y.ndim != 1 or y.size < 4:
            raise ValueError("y_nodes must be 1D with at least 4 nodes")
        if np.any(np.diff(x) <= 0) or np.any(np.diff(y) <= 0):
            raise ValueError("nodes must be strictly increasing")
        self.x = x
        self.y = y
        self.nx = x.size
        self.ny = y.size
        self.L = float(x[-1] - x[0])
        self.Y_max = float(y[-1] - y[0])
        self._ops = {}

    @property
    def shape(self):
        return (self.nx, self.ny)

    def mesh(self):
        X, Y = np.meshgrid(self.x, self.y, indexing="ij")
        return X, Y

    def op(self, axis, order):
        """Cached sparse derivative matrix along axis (0=x, 1=y), order 1 or 2."""
        key = (axis, order)
        if key not in self._ops:
            nodes = self.x if axis == 0 else self.y
            self._ops[key] = diff_matrix(nodes, order)
        return self._ops[key]

    def dx(self, f):
        return self.op(0, 1) @ f

    def dy(self, f):
        return (self.op(1, 1) @ f.T).T

    def dxx(self, f):
        return self.op(0, 2) @ f

    def dyy(self, f):
        return (self.op(1, 2) @ f.T).T

    def laplacian(self, f):
        return self.dxx(f) + self.dyy(f)

    def trapz_weights(self):
        """Outer product of 1D trapezoid weights, shape (nx, ny)."""
        return np.outer(trapz_weights_1d(self.x), trapz_weights_1d(self.y))


def diff_matrix(nodes, order):
    """Sparse derivative matrix on arbitrary strictly increasing nodes.

    Interior rows: 3-point stencils exact on quadratics.  End rows: one-sided
    3-point (order 1) or 4-point (order 2) stencils, also exact on quadratics
    resp. cubics, so every row is second-order on smoothly graded meshes.
    """
    x = np.asarray(nodes, dtype=float)
    n = x.size
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    rows, cols, data = [], [], []

    def add_row(i, support, weights):
        rows.extend([i] * len(support))
        cols.extend(support)
        data.extend(weights)

    for i in range(1, n - 1):
        hm = x[i] - x[i - 1]
        hp = x[i + 1] - x[i]
        if order == 1:
            w = (-hp / (hm * (hm + hp)),
                 (hp - hm) / (hm * hp),
                 hm / (hp * (hm + hp)))
        else:
            w = (2.0 / (hm * (hm + hp)),
                 -2.0 / (hm * hp),
                 2.0 / (hp * (hm + hp)))
        add_row(i, [i - 1, i, i + 1], w)

    add_row(0, list(range(min(4 if order == 2 else 3, n))),
            _onesided_weights(x, 0, order))
    add_row(n - 1, list(range(n - (4 if order == 2 else 3), n)),
            _onesided_weights(x, n - 1, order))
    return sparse.csr_matrix((data, (rows, cols)), shape=(n, n))


def _onesided_weights(x, i, order):
    """Fornberg weights for d^order/dx^order at x[i] over the nearest 3 or 4 nodes."""
    npts = 3 if order == 1 else 4
    if i == 0:
        support = x[:npts]
    else:
        support = x[-npts:]
    w = _fd_weights(support - x[i], order)
    return list(w)


def _fd_weights(dx, order):
    """Solve the Vandermonde system for FD weights at offset nodes dx."""
    n = dx.size
    A = np.vander(dx, n, increasing=True).T
    b = np.zeros(n)
    b[order] = math.factorial(order)
    return np.linalg.solve(A, b)


def trapz_weights_1d(x):
    x = np.asarray(x, dtype=float)
    w = np.zeros_like(x)
    d = np.diff(x)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w


def make_grid(nx, ny, L, Y_max, stretch=0.0):
    """Uniform x-grid, exponentially stretched y-grid.

    y_j = Y_max (e^{stretch j/(ny-1)} - 1)/(e^{stretch} - 1); stretch=0 gives
    the uniform limit.
    """
    if L <= 0 or Y_max <= 0:
        raise ValueError("L and Y_max must be positive")
    x = np.linspace(0.0, L, nx)
    t = np.linspace(0.0, 1.0, ny)
    if stretch == 0.0:
        y = Y_max * t
    else:
        y = Y_max * np.expm1(stretch * t) / np.expm1(stretch)
    y[0] = 0.0
    y[-1] = Y_max
    return Grid2D(x, y)


def stretch_for_first_spacing(ny, Y_max, dy0):
    """Stretch parameter giving first spacing ~ dy0 with ny nodes up to Y_max.

    Uses h(y) ~ dy0 + (sigma/(ny-1)) y for the exponential map, closed by
    e^sigma - 1 = Y_max sigma / ((ny-1) dy0).
    """
    from scipy.optimize import brentq
    m = ny - 1
    target = Y_max / (m * dy0)
    if target <= 1.0:
        return 0.0
    f = lambda s: np.expm1(s) / s - target
    return brentq(f, 1e-8, 60.0)


def make_bl_grid(nx, L, Y_max, eps, h0=0.04, slope=0.006, ny_min=48, ny_max=2400):
    """Boundary-layer resolving grid for viscosity eps.

    First spacing ~ sqrt(eps) h0 (so spacing in y = Y/sqrt(eps) units starts at
    h0 and grows with rate `slope` per unit y); node count follows from the
    closure sigma = ln(1 + Y_max slope/(sqrt(eps) h0)), ny = 1 + sigma/slope.
    Guarantees >= 8 nodes below Y = sqrt(eps).
    """
    se = np.sqrt(eps)
    sigma = np.log1p(Y_max * slope / (se * h0))
    ny = int(np.clip(np.ceil(sigma / slope) + 1, ny_min, ny_max))
    sigma = stretch_for_first_spacing(ny, Y_max, se * h0)
    g = make_grid(nx, ny, L, Y_max, sigma)
    below = np.count_nonzero(g.y < se)
    if below < 8:
        raise ValueError(f"grid resolves only {below} nodes below sqrt(eps)")
    return g


class ScalarField:
    """Values on a Grid2D, with a name for reports."""

    def __init__(self, grid, values, name=""):
        values = np.asarray(values, dtype=float)
        if values.shape != grid.shape:
            raise ValueError(f"field shape {values.shape} != grid shape {grid.shape}")
        self.grid = grid
        self.values = values
        self.name = name


class WeightSpec:
    """Separable weight w(x, y) = wx(x) * wy(y).

    x_kind: 'one' or 'omega' (omega = L - x).  y_kind: 'one' or 'rho'
    (rho = <y>^N with <y> = sqrt(1 + y^2); N may be negative).
    """

    def __init__(self, x_kind="one", y_kind="one", N=0):
        if x_kind not in ("one", "omega"):
            raise ValueError(f"unknown x_kind {x_kind!r}")
        if y_kind not in ("one", "rho"):
            raise ValueError(f"unknown y_kind {y_kind!r}")
        self.x_kind = x_kind
        self.y_kind = y_kind
        self.N = N

    def array(self, grid):
        wx = np.ones(grid.nx)
        if self.x_kind == "omega":
            wx = grid.x[-1] - grid.x
        wy = np.ones(grid.ny)
        if self.y_kind == "rho":
            wy = (1.0 + grid.y ** 2) ** (0.5 * self.N)
        return np.outer(wx, wy)


def weighted_l2(f, w=None, interior=0):
    """sqrt(trapezoid integral of f^2 w) over the grid, optionally on the
    sub-rectangle obtained by dropping `interior` cells from every side."""
    if isinstance(f, ScalarField):
        grid, vals = f.grid, f.values
    else:
        raise TypeError("weighted_l2 expects a ScalarField")
    warr = 1.0 if w is None else w.array(grid)
    return _l2_on(grid, vals * vals * warr, interior)


def l2_norm(grid, values, weight=None, interior=0):
    """Array-level weighted L2 norm (trapezoid quadrature)."""
    v2 = values * values
    if weight is not None:
        v2 = v2 * weight
    return _l2_on(grid, v2, interior)


def _l2_on(grid, integrand, interior):
    if interior:
        m = interior
        sub = Grid2D(grid.x[m:-m], grid.y[m:-m])
        return float(np.sqrt(np.sum(integrand[m:-m, m:-m] * sub.trapz_weights())))
    return float(np.sqrt(np.sum(integrand * grid.trapz_weights())))


def sup_norm(values):
    return float(np.max(np.abs(values)))


def cumint_y(grid_or_y, f):
    """Cumulative trapezoid integral along y from the wall, same shape as f."""
    y = grid_or_y.y if isinstance(grid_or_y, Grid2D) else np.asarray(grid_or_y)
    return cumulative_trapezoid(f, y, axis=-1, initial=0.0)


def tail_int_y(grid_or_y, f):
    """Integral from y to the top node along y (decayed-tail convention)."""
    full = cumint_y(grid_or_y, f)
    return full[..., -1:] - full


def integrate_gradient(grid, gx, gy, anchor="top-right"):
    """Reconstruct p with (p_x, p_y) ~ (gx, gy) by path integration.

    Integrates gx along the top row, then gy down each column; the anchor node
    is set to zero.  Exact for gradients of quadratics under trapezoid rule on
    the same path; curl defects show up as path dependence of the same size.
    """
    top = cumulative_trapezoid(gx[:, -1], grid.x, initial=0.0)
    colint = cumulative_trapezoid(gy, grid.y, axis=1, initial=0.0)
    p = top[:, None] - (colint[:, -1][:, None] - colint)
    if anchor == "top-right":
        p -= p[-1, -1]
    elif anchor == "origin":
        p -= p[0, 0]
    else:
        i, j = anchor
        p -= p[i, j]
    return p


def spline_columns(y_table, values, y_query, clamp=True):
    """Evaluate per-column cubic splines of values (nx, ny_tab) at y_query.

    A single C^2 spline batch over axis 1; queries beyond the table are clamped
    to the last node, i.e. extended by the far-field constant.
    """
    y_query = np.asarray(y_query, dtype=float)
    if clamp:
        y_query = np.clip(y_query, y_table[0], y_table[-1])
    cs = CubicSpline(y_table, values, axis=1)
    out = cs(y_query)
    return out


def divergence_centered(grid, u, v):
    """D_x u + D_y v with the centered operators."""
    return grid.dx(u) + grid.dy(v)


def divergence_staggered(grid, u, v):
    """Midpoint-form mass defect matched to cumulative-trapezoid v recovery.

    Returns an (nx, ny-1) array of (v[j+1]-v[j])/h_j + avg(D_x u)[j:j+1]; this
    is identically zero (machine precision) when v = -cumint_y(D_x u) + const.
    """
    ux = grid.dx(u)
    dv = np.diff(v, axis=1) / np.diff(grid.y)[None, :]
    return dv + 0.5 * (ux[:, 1:] + ux[:, :-1])
