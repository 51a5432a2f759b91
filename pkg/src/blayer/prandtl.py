"""Zeroth-order Prandtl profiles in boundary-layer variables (x, y).

Two constructions share one evaluation interface:

* SimilarityProfile: the Blasius family u = U0 f'(y sqrt(U0)/sqrt(x + x_v))
  for x-independent outer speed, with every needed partial derivative in
  closed form from the f-table (virtual origin x_v > 0 keeps the leading edge
  outside the domain).
* MarchedProfile: output of march_prandtl, the nonlinear Prandtl system
  marched in x through its stream function (phi_y phi_xy - phi_x phi_yy
  - phi_yyy + p_x = g), Newton-solved per station on a pentadiagonal stencil.

Evaluators return arrays of shape (nx, len(y)): values at all stored x-nodes
times a query vector of boundary-layer heights.  The boundary-layer part of
the velocity is u_b = u_p - u_e(x, 0); v_b = integral of u_bx from y to
infinity, reconstructed from v_p plus wall traces.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline
from scipy.sparse.linalg import splu

from .grid import diff_matrix, _fd_weights


class SeparationError(RuntimeError):
    """Raised when the marched wall shear changes sign (flow separation)."""


class SimilarityProfile:
    """Blasius-family profile evaluated at fixed x_nodes."""

    def __init__(self, bl, x_nodes, flow, x_virtual=1.0):
        if x_virtual <= 0:
            raise ValueError("x_virtual must be positive")
        wall = flow.wall_u(x_nodes)
        if np.max(np.abs(wall - wall[0])) > 1e-13 * max(1.0, abs(wall[0])):
            raise ValueError("similarity profile requires x-independent wall speed")
        self.bl = bl
        self.x = np.asarray(x_nodes, dtype=float)
        self.flow = flow
        self.x_virtual = float(x_virtual)
        self.U0 = float(wall[0])

    def _eta_s(self, y):
        y = np.asarray(y, dtype=float)
        s = np.sqrt(self.x + self.x_virtual)[:, None]
        eta = np.sqrt(self.U0) * y[None, :] / s
        return eta, s

    def u_p(self, y, dx=0, dy=0):
        eta, s = self._eta_s(y)
        U0, f = self.U0, self.bl.f
        if (dx, dy) == (0, 0):
            return U0 * f(eta, 1)
        if (dx, dy) == (1, 0):
            return -0.5 * U0 * f(eta, 2) * eta / s ** 2
        if (dx, dy) == (0, 1):
            return U0 ** 1.5 * f(eta, 2) / s
        if (dx, dy) == (0, 2):
            return U0 ** 2 * f(eta, 3) / s ** 2
        if (dx, dy) == (1, 1):
            return -0.5 * U0 ** 1.5 * (eta * f(eta, 3) + f(eta, 2)) / s ** 3
        if (dx, dy) == (2, 0):
            return U0 * (0.75 * eta * f(eta, 2) + 0.25 * eta ** 2 * f(eta, 3)) / s ** 4
        if (dx, dy) == (0, 3):
            return U0 ** 2.5 * f(eta, 4) / s ** 3
        raise ValueError(f"unsupported derivative ({dx},{dy})")

    def v_p(self, y, dx=0, dy=0):
        eta, s = self._eta_s(y)
        U0, f = self.U0, self.bl.f
        G = eta * f(eta, 1) - f(eta, 0)
        if (dx, dy) == (0, 0):
            return np.sqrt(U0) * G / (2.0 * s)
        if (dx, dy) == (1, 0):
            return -np.sqrt(U0) * (eta ** 2 * f(eta, 2) + G) / (4.0 * s ** 3)
        if (dx, dy) == (0, 1):
            return U0 * eta * f(eta, 2) / (2.0 * s ** 2)
        if (dx, dy) == (0, 2):
            return U0 ** 1.5 * (f(eta, 2) + eta * f(eta, 3)) / (2.0 * s ** 3)
        if (dx, dy) == (1, 1):
            return -U0 * (3.0 * eta * f(eta, 2) + eta ** 2 * f(eta, 3)) / (4.0 * s ** 4)
        raise ValueError(f"unsupported derivative ({dx},{dy})")

    def wall_vb(self, dx=0):
        """v_b(x, 0) = -sqrt(U0) beta / (2 s) and its x-derivatives."""
        s = np.sqrt(self.x + self.x_virtual)
        beta = self.bl.displacement / np.sqrt(self.U0)
        # G(inf) = eta f' - f -> beta_half in the scaled variable
        ginf = self.bl.displacement
        if dx == 0:
            return -np.sqrt(self.U0) * ginf / (2.0 * s)
        if dx == 1:
            return np.sqrt(self.U0) * ginf / (4.0 * s ** 3)
        if dx == 2:
            return -3.0 * np.sqrt(self.U0) * ginf / (8.0 * s ** 5)
        raise ValueError("dx must be 0..2")

    def p_px(self):
        return self.flow.pressure_gradient_wall(self.x)

    def v_b(self, y, dx=0, dy=0):
        # constant outer trace: u_ex(x,0)=0, so v_b = v_p + wall value
        if dy == 0:
            return self.v_p(y, dx, 0) + self.wall_vb(dx)[:, None]
        return self.v_p(y, dx, dy)

    def u_b(self, y, dx=0, dy=0):
        out = self.u_p(y, dx, dy)
        if dy == 0:
            out = out - self.flow.wall_u(self.x, dx=dx)[:, None]
        return out

    def inflow(self, y):
        return self.u_p(y)[0]


class MarchedProfile:
    """Nonlinear Prandtl solution tables on (x_nodes, y_nodes)."""

    def __init__(self, x_nodes, y_nodes, phi, flow, newton_iters):
        self.x = np.asarray(x_nodes, dtype=float)
        self.y = np.asarray(y_nodes, dtype=float)
        self.flow = flow
        self.phi = phi
        self.newton_iters = newton_iters
        self._Dx = diff_matrix(self.x, 1)
        self._Dxx = diff_matrix(self.x, 2)
        self._Dy = diff_matrix(self.y, 1)
        self._Dyy = diff_matrix(self.y, 2)
        self.u = (self._Dy @ phi.T).T
        self.v = -(self._Dx @ phi)
        self._cache = {}

    def _table(self, which, dx, dy):
        key = (which, dx, dy)
        if key in self._cache:
            return self._cache[key]
        base = self.u if which == "u" else self.v
        t = base
        if dx == 1:
            t = self._Dx @ t
        elif dx == 2:
            t = self._Dxx @ t
        if dy == 1:
            t = (self._Dy @ t.T).T
        elif dy == 2:
            t = (self._Dyy @ t.T).T
        elif dy == 3:
            t = (self._Dyy @ (self._Dy @ t.T)).T
        self._cache[key] = t
        return t

    def _eval(self, which, y, dx, dy):
        t = self._table(which, dx, dy)
        yq = np.clip(np.asarray(y, dtype=float), self.y[0], self.y[-1])
        return CubicSpline(self.y, t, axis=1)(yq)

    def u_p(self, y, dx=0, dy=0):
        return self._eval("u", y, dx, dy)

    def v_p(self, y, dx=0, dy=0):
        return self._eval("v", y, dx, dy)

    def p_px(self):
        return self.flow.pressure_gradient_wall(self.x)

    def wall_vb(self, dx=0):
        """v_b(x,0) = -lim_y [v_p + y u_ex(x,0)], converged by the top node."""
        ytop = self.y[-1]
        uex = self.flow.wall_u(self.x, dx=1)
        base = -(self.v[:, -1] + ytop * uex)
        if dx == 0:
            return base
        D = self._Dx if dx == 1 else self._Dxx
        return D @ base

    def u_b(self, y, dx=0, dy=0):
        out = self.u_p(y, dx, dy)
        if dy == 0:
            out = out - self.flow.wall_u(self.x, dx=dx)[:, None]
        return out

    def v_b(self, y, dx=0, dy=0):
        if dy != 0:
            return self.v_p(y, dx, dy)
        yq = np.asarray(y, dtype=float)
        uex = self.flow.wall_u(self.x, dx=dx + 1)
        return self.v_p(y, dx, 0) + yq[None, :] * uex[:, None] + self.wall_vb(dx)[:, None]


def _third_derivative_matrix(y):
    """Pentadiagonal-width matrix for d^3/dy^3 on a uniform or graded mesh."""
    n = y.size
    rows, cols, data = [], [], []
    for j in range(n):
        if j < 2:
            sup = list(range(0, 5))
        elif j > n - 3:
            sup = list(range(n - 5, n))
        else:
            sup = list(range(j - 2, j + 3))
        w = _fd_weights(y[sup] - y[j], 3)
        rows.extend([j] * len(sup))
        cols.extend(sup)
        data.extend(w)
    return sparse.csr_matrix((data, (rows, cols)), shape=(n, n))


def march_prandtl(flow, x_nodes, y_nodes, inflow_u, scheme="be", forcing=None,
                  newton_damping=0.5, newton_max=50, newton_tol=1e-11,
                  separation_tol=1e-10):
    """March the nonlinear Prandtl system in x; returns a MarchedProfile.

    inflow_u: u(0, y) on y_nodes.  scheme: 'be' (backward differencing, O(dx))
    or 'cn' (midpoint, O(dx^2), started with two 'be' steps).  forcing: test
    hook, array (nx, ny) added to the momentum balance.  Newton per station is
    damped (factor `newton_damping` when the residual does not decrease) and
    capped at newton_max iterations.
    """
    x = np.asarray(x_nodes, dtype=float)
    y = np.asarray(y_nodes, dtype=float)
    nx, ny = x.size, y.size
    u0 = np.asarray(inflow_u, dtype=float)
    if u0.shape != (ny,):
        raise ValueError("inflow_u must match y_nodes")
    if u0[0] != 0.0:
        raise ValueError("inflow must satisfy no-slip at the wall")

    Dy = diff_matrix(y, 1)
    Dyy = diff_matrix(y, 2)
    Dyyy = _third_derivative_matrix(y)
    I = sparse.identity(ny, format="csr")

    match = flow.wall_u(x)
    p_px = flow.pressure_gradient_wall(x)

    phi = np.zeros((nx, ny))
    phi[0] = cumulative_trapezoid(u0, y, initial=0.0)
    iters_used = []

    wall_row = np.zeros(ny)
    wall_row[:3] = _fd_weights(y[:3] - y[0], 1)
    top_row = np.zeros(ny)
    top_row[-3:] = _fd_weights(y[-3:] - y[-1], 1)

    for i in range(1, nx):
        dx = x[i] - x[i - 1]
        prev = phi[i - 1]
        use_cn = scheme == "cn" and i > 2
        th = 0.5 if use_cn else 1.0
        pgrad = p_px[i] if not use_cn else 0.5 * (p_px[i] + p_px[i - 1])
        target = match[i]
        g = None
        if forcing is not None:
            g = forcing[i] if not use_cn else 0.5 * (forcing[i] + forcing[i - 1])

        p = prev.copy()
        res_prev = None
        for it in range(newton_max):
            pb = th * p + (1.0 - th) * prev
            py = Dy @ pb
            pyy = Dyy @ pb
            pyyy = Dyyy @ pb
            px = (p - prev) / dx
            pxy = Dy @ px
            R = py * pxy - px * pyy - pyyy + pgrad
            if g is not None:
                R = R - g
            # boundary rows: phi(0)=0, phi_y(0)=0 is not imposed here (inflow
            # profiles carry their own wall slope); wall no-slip means u=0:
            R[0] = p[0]
            R[1] = wall_row @ p
            R[-1] = top_row @ p - target
            resn = float(np.max(np.abs(R)))
            if resn < newton_tol:
                break
            J = (sparse.diags(pxy) @ Dy * th
                 + sparse.diags(py) @ Dy / dx
                 - sparse.diags(pyy) / dx
                 - sparse.diags(px) @ Dyy * th
                 - Dyyy * th)
            J = J.tolil()
            J[0] = 0.0
            J[0, 0] = 1.0
            J[1] = 0.0
            J[1, :3] = wall_row[:3]
            J[-1] = 0.0
            J[-1, -3:] = top_row[-3:]
            step = splu(J.tocsc()).solve(R)
            lam = 1.0
            if res_prev is not None and resn > res_prev:
                lam = newton_damping
            p = p - lam * step
            res_prev = resn
        else:
            raise RuntimeError(f"Newton stalled at station {i}: residual {resn:.2e}")
        iters_used.append(it + 1)
        u_new = Dy @ p
        if np.min(u_new[1:-1]) < -separation_tol * max(1.0, float(match[i])):
            raise SeparationError(f"reverse flow at x = {x[i]:.4f}")
        phi[i] = p

    return MarchedProfile(x, y, phi, flow, iters_used)


def recover_v_inflow(U, y_nodes, p_px0, n_deriv_fallback=True):
    """Vertical velocity at inflow from the zeroth-order balance:
    v(0, y) = -U(y) * int_0^y (U'' - p_px0) / U^2.

    U may be a callable U(y, k) giving derivatives, or a table on y_nodes.
    The integrand's wall singularity is removable when the inflow is
    compatible (U'' - p_px0 ~ y^2); the y=0 value is set by quadratic
    extrapolation from the first interior nodes, which realizes the series
    limit without needing fourth derivatives of a table.
    """
    y = np.asarray(y_nodes, dtype=float)
    if y[0] != 0.0:
        raise ValueError("y_nodes must start at the wall")
    if callable(U):
        Uv = U(y, 0)
        Upp = U(y, 2)
    else:
        tab = np.asarray(U, dtype=float)
        cs = CubicSpline(y, tab)
        Uv = tab
        Upp = cs(y, 2)
    g = np.empty_like(y)
    with np.errstate(divide="ignore", invalid="ignore"):
        g[1:] = (Upp[1:] - p_px0) / Uv[1:] ** 2
    # quadratic extrapolation to the wall from nodes 1..3
    w = _fd_weights(y[1:4] - y[0], 0)
    g[0] = float(w @ g[1:4])
    integral = cumulative_trapezoid(g, y, initial=0.0)
    return -Uv * integral


def check_compatibility(wall_derivs, u_e_wall, u_ex_wall, tol=1e-8):
    """Corner compatibility residuals for an inflow profile.

    wall_derivs: U^(k)(0) for k = 0..6.  Conditions checked (scaled by the
    natural size of each bracket): no-slip U(0) = 0; wall balance
    U''(0) = p_px(0,0) with p_px = -u_e u_ex; U'''(0) = 0; the fifth-order
    relation U^(5)(0) = 2 u_ex(0,0)^2 U'(0); and the mixed sixth-order
    relation U'(0) U^(6)(0) - U''(0) U^(5)(0) + 2 U'''(0) U^(4)(0) = 0.
    Returns (report dict, all_pass bool).
    """
    d = list(wall_derivs)
    if len(d) < 7:
        raise ValueError("need wall derivatives up to order 6")
    p_px = -u_e_wall * u_ex_wall
    scale = max(1.0, abs(d[1]), abs(u_e_wall)) ** 2
    res = {
        "order0_noslip": d[0],
        "order0_wall_balance": d[2] - p_px,
        "order0_third": d[3],
        "order1": d[5] - 2.0 * u_ex_wall ** 2 * d[1],
        "order2": d[1] * d[6] - d[2] * d[5] + 2.0 * d[3] * d[4],
    }
    ok = all(abs(v) <= tol * scale for v in res.values())
    return res, ok


def decay_report(profile, y_nodes, M=2, K=3):
    """Weighted sup table sup_x,y <y>^M |d^(i,j) u_b| for i + j <= K."""
    y = np.asarray(y_nodes, dtype=float)
    w = (1.0 + y ** 2) ** (0.5 * M)
    out = {}
    for k in range(K + 1):
        for i in range(k + 1):
            j = k - i
            try:
                tab = profile.u_b(y, dx=i, dy=j)
            except ValueError:
                continue
            out[(i, j)] = float(np.max(np.abs(tab) * w[None, :]))
    return out
