"""Euler base flows on the half-plane strip, with closed-form derivatives.

Three built-in families:

* ``const``      u = U_inf, v = 0
* ``shear``      u = 1 + a e^{-Y}, v = 0 (exact shear Euler solution)
* ``perturbed``  u = 1 + a e^{-Y} + a b sin(pi X/L)(1 - 2Y) e^{-2Y},
                 v = -(a b pi/L) cos(pi X/L) Y e^{-2Y}

The perturbed family is incompressible by construction and its X-dependent
part carries zero net mass in Y, so v decays as Y grows and vanishes on the
wall.  It is an approximate Euler solution (momentum defect O(ab)), used to
exercise the non-shear code paths.

Every flow exposes u(X, Y, dx=, dy=), v(...), the stream function with
psi(X, 0) = 0, its Laplacian (the vorticity u_Y - v_X) and bi-Laplacian, all
in closed form so that downstream solvers never difference the base flow.
"""

from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicSpline


def _exp_poly_derivative(alpha, beta, rate, k):
    """k-th derivative coefficients of (alpha + beta Y) e^{-rate Y}."""
    a, b = float(alpha), float(beta)
    for _ in range(k):
        a, b = b - rate * a, -rate * b
    return a, b


class EulerBaseFlow:
    """Analytic base flow; kind in {'const', 'shear', 'perturbed'}."""

    def __init__(self, kind, L=1.0, U_inf=1.0, a=0.0, b=0.0):
        if kind not in ("const", "shear", "perturbed"):
            raise ValueError(f"unknown flow kind {kind!r}")
        if L <= 0:
            raise ValueError("L must be positive")
        self.kind = kind
        self.L = float(L)
        self.U_inf = float(U_inf)
        self.a = float(a)
        self.b = float(b)
        if kind == "perturbed" and (a == 0.0 or b == 0.0):
            raise ValueError("perturbed flow needs nonzero a and b")
        self.is_shear = kind in ("const", "shear")

    # -- velocity components -------------------------------------------------
    def u(self, X, Y, dx=0, dy=0):
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        out = np.zeros(np.broadcast(X, Y).shape)
        if self.kind == "const":
            if dx == 0 and dy == 0:
                out += self.U_inf
            return out
        if dx == 0:
            if dy == 0:
                out += 1.0 + self.a * np.exp(-Y)
            else:
                out += self.a * (-1.0) ** dy * np.exp(-Y)
        if self.kind == "perturbed":
            s = np.sin(np.pi * X / self.L + dx * np.pi / 2.0)
            al, be = _exp_poly_derivative(1.0, -2.0, 2.0, dy)
            out = out + (self.a * self.b * (np.pi / self.L) ** dx
                         * s * (al + be * Y) * np.exp(-2.0 * Y))
        return out

    def v(self, X, Y, dx=0, dy=0):
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        out = np.zeros(np.broadcast(X, Y).shape)
        if self.kind != "perturbed":
            return out
        c = np.cos(np.pi * X / self.L + dx * np.pi / 2.0)
        al, be = _exp_poly_derivative(0.0, 1.0, 2.0, dy)
        return (-self.a * self.b * (np.pi / self.L) ** (dx + 1)
                * c * (al + be * Y) * np.exp(-2.0 * Y))

    # -- stream function -----------------------------------------------------
    def psi(self, X, Y):
        """Stream function with psi(X, 0) = 0 (u = psi_Y, v = -psi_X)."""
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        out = np.zeros(np.broadcast(X, Y).shape)
        if self.kind == "const":
            return out + self.U_inf * Y
        out = out + Y + self.a * (1.0 - np.exp(-Y))
        if self.kind == "perturbed":
            out = out + (self.a * self.b * np.sin(np.pi * X / self.L)
                         * Y * np.exp(-2.0 * Y))
        return out

    def vorticity(self, X, Y):
        """Delta psi = u_Y - v_X."""
        return self.u(X, Y, dy=1) - self.v(X, Y, dx=1)

    def bilap_psi(self, X, Y):
        """Delta^2 psi, needed by the second-order corrector forcing."""
        return (self.u(X, Y, dx=2, dy=1) + self.u(X, Y, dy=3)
                - self.v(X, Y, dx=3) - self.v(X, Y, dx=1, dy=2))

    # -- wall traces ---------------------------------------------------------
    def wall_u(self, X, dx=0):
        return self.u(X, np.zeros_like(np.asarray(X, dtype=float)), dx=dx)

    def pressure_gradient_wall(self, X):
        """Bernoulli wall pressure gradient p^0_px = -u(X,0) u_X(X,0)."""
        return -self.wall_u(X) * self.wall_u(X, dx=1)


def make_base_flow(kind, L=1.0, U_inf=1.0, a=0.0, b=0.0):
    return EulerBaseFlow(kind, L=L, U_inf=U_inf, a=a, b=b)


class VorticityFunction:
    """F_e with Delta psi = F_e(psi), from per-column inversion of the flow.

    Built on one reference column (the flow's X = x_ref): psi(Y) is strictly
    increasing because u > 0, so (psi(Y_j), Delta psi(Y_j)) defines F_e on the
    range of psi.  F_e', F_e'' come from derivatives of the cubic-spline
    interpolant.  For non-shear flows (approximate Euler solutions) columns
    differ by the momentum defect; the spread across columns is reported by
    column_spread().
    """

    def __init__(self, flow, Y_max=12.0, n=1201, x_ref=0.0):
        self.flow = flow
        Y = np.linspace(0.0, Y_max, n)
        X = np.full_like(Y, x_ref)
        s = flow.psi(X, Y)
        if np.any(np.diff(s) <= 0):
            raise ValueError("stream function is not strictly increasing in Y")
        w = flow.vorticity(X, Y)
        self.s_min = float(s[0])
        self.s_max = float(s[-1])
        self._spline = CubicSpline(s, w)
        self._d1 = self._spline.derivative(1)
        self._d2 = self._spline.derivative(2)

    def _clamped(self, s):
        return np.clip(np.asarray(s, dtype=float), self.s_min, self.s_max)

    def F(self, s):
        return self._spline(self._clamped(s))

    def Fp(self, s):
        return self._d1(self._clamped(s))

    def Fpp(self, s):
        return self._d2(self._clamped(s))

    def column_spread(self, grid):
        """Max over the grid of |vorticity - F(psi)|: 0 for exact Euler flows."""
        X, Y = grid.mesh()
        return float(np.max(np.abs(self.flow.vorticity(X, Y) - self.F(self.flow.psi(X, Y)))))


def compute_F_e(flow, Y_max=12.0, n=1201, x_ref=0.0):
    return VorticityFunction(flow, Y_max=Y_max, n=n, x_ref=x_ref)


def validate_hypotheses(flow, grid, decay_orders=3, tol_positivity=1e-12):
    """Check the standing hypotheses on the Euler base flow over the grid.

    Returns a dict report: positivity bounds for u, wall values of v, decay
    envelopes sup <Y>^k |d^m v| and sup |d^m u|, the shear smallness measure
    ||v||_inf, and the Euler momentum defect measured through the curl of the
    advective acceleration (zero for exact steady Euler flows).
    """
    X, Y = grid.mesh()
    u = flow.u(X, Y)
    v = flow.v(X, Y)
    rep = {
        "kind": flow.kind,
        "u_min": float(np.min(u)),
        "u_max": float(np.max(u)),
        "positive": bool(np.min(u) > tol_positivity),
        "wall_v_max": float(np.max(np.abs(flow.v(grid.x, np.zeros_like(grid.x))))),
        "v_sup": float(np.max(np.abs(v))),
        "L": grid.L,
    }
    w = np.sqrt(1.0 + Y ** 2)
    decay = {}
    for m in range(decay_orders + 1):
        env_u, env_v = 0.0, 0.0
        for i in range(m + 1):
            j = m - i
            env_u = max(env_u, float(np.max(np.abs(flow.u(X, Y, dx=i, dy=j)))))
            env_v = max(env_v, float(np.max(np.abs(w ** 2 * flow.v(X, Y, dx=i, dy=j)))))
        decay[m] = {"sup_du": env_u, "sup_w2_dv": env_v}
    rep["decay"] = decay

    # curl of (u.grad)u must vanish for the advective force to be a gradient
    ax = u * flow.u(X, Y, dx=1) + v * flow.u(X, Y, dy=1)
    ay = u * flow.v(X, Y, dx=1) + v * flow.v(X, Y, dy=1)
    rep["euler_defect"] = float(np.max(np.abs(grid.dy(ax) - grid.dx(ay))))
    return rep
