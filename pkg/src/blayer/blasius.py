"""Blasius similarity profile: f''' + (1/2) f f'' = 0, f(0)=f'(0)=0, f'(inf)=1.

This is the flat-plate zeroth-order profile in the convention whose wall shear
is f''(0) ~ 0.4696.  solve_blasius shoots with an adaptive integrator and
returns spline-backed evaluators; the fixed-step RK4 shooting in
rk4_wall_shear is kept as an independent cross-check (the tests freeze its
output).
"""

from __future__ import annotations

import math
import time

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq


def _rhs(eta, z):
    f, fp, fpp = z
    return (fp, fpp, -0.5 * f * fpp)


class BlasiusSolution:
    """Table + spline evaluator for f and derivatives, clamped far field.

    Beyond eta_max the profile is replaced by its asymptote: f = eta - beta,
    f' = 1, all higher derivatives 0.
    """

    def __init__(self, eta, f, fp, fpp, runtime=0.0):
        self.eta = eta
        self.eta_max = float(eta[-1])
        self.wall_shear = float(fpp[0])
        self.displacement = float(eta[-1] - f[-1])
        self.runtime = runtime
        self._sf = CubicSpline(eta, f)
        self._sfp = CubicSpline(eta, fp)
        self._sfpp = CubicSpline(eta, fpp)

    def f(self, eta, k=0):
        """k-th derivative of f at eta (k <= 3; k=3 uses the ODE itself)."""
        eta = np.asarray(eta, dtype=float)
        inside = eta < self.eta_max
        e = np.where(inside, eta, self.eta_max)
        if k == 0:
            out = np.where(inside, self._sf(e), eta - self.displacement)
        elif k == 1:
            out = np.where(inside, self._sfp(e), 1.0)
        elif k == 2:
            out = np.where(inside, self._sfpp(e), 0.0)
        elif k == 3:
            out = np.where(inside, -0.5 * self._sf(e) * self._sfpp(e), 0.0)
        elif k == 4:
            f0, f1, f2 = self._sf(e), self._sfp(e), self._sfpp(e)
            out = np.where(inside, -0.5 * f1 * f2 + 0.25 * f0 * f0 * f2, 0.0)
        else:
            raise ValueError("k must be 0..4")
        return out

    def wall_derivs(self, n):
        """Exact wall Taylor coefficients f^(k)(0), k = 0..n, from the ODE.

        f'''=-(1/2) f f'' propagates the two zeros at the wall: the only
        nonzero low-order values are f''(0) and f^(5)(0) = -f''(0)^2/2.
        """
        a = self.wall_shear
        d = [0.0] * (n + 1)
        if n >= 2:
            d[2] = a
        for k in range(3, n + 1):
            m = k - 3
            s = 0.0
            for j in range(m + 1):
                s += math.comb(m, j) * d[j] * d[m - j + 2]
            d[k] = -0.5 * s
        return d


def solve_blasius(eta_max=20.0, n_table=4001, rtol=1e-11, atol=1e-13,
                  bracket=(0.2, 0.9)):
    """Shooting solve; returns a BlasiusSolution with runtime recorded."""
    t0 = time.perf_counter()

    def miss(alpha):
        sol = solve_ivp(_rhs, (0.0, eta_max), (0.0, 0.0, alpha),
                        rtol=rtol, atol=atol, dense_output=False)
        return sol.y[1, -1] - 1.0

    alpha = brentq(miss, *bracket, xtol=1e-13, rtol=8.9e-16)
    eta = np.linspace(0.0, eta_max, n_table)
    sol = solve_ivp(_rhs, (0.0, eta_max), (0.0, 0.0, alpha),
                    rtol=rtol, atol=atol, t_eval=eta)
    if not sol.success:
        raise RuntimeError(f"Blasius integration failed: {sol.message}")
    f, fp, fpp = sol.y
    return BlasiusSolution(eta, f, fp, fpp, runtime=time.perf_counter() - t0)


def rk4_wall_shear(h=1e-3, eta_max=20.0, tol=1e-12, max_iter=60):
    """Independent fixed-step RK4 shooting for f''(0); secant on the miss.

    Kept free of scipy on purpose: plain RK4 with step h over [0, eta_max],
    secant iteration on alpha until the far-field miss stalls below tol.
    """
    n = int(round(eta_max / h))

    def shoot(alpha):
        f, fp, fpp = 0.0, 0.0, alpha
        for _ in range(n):
            k1 = (fp, fpp, -0.5 * f * fpp)
            f1, g1, h1 = f + 0.5 * h * k1[0], fp + 0.5 * h * k1[1], fpp + 0.5 * h * k1[2]
            k2 = (g1, h1, -0.5 * f1 * h1)
            f2, g2, h2 = f + 0.5 * h * k2[0], fp + 0.5 * h * k2[1], fpp + 0.5 * h * k2[2]
            k3 = (g2, h2, -0.5 * f2 * h2)
            f3, g3, h3 = f + h * k3[0], fp + h * k3[1], fpp + h * k3[2]
            k4 = (g3, h3, -0.5 * f3 * h3)
            f += h * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]) / 6.0
            fp += h * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]) / 6.0
            fpp += h * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]) / 6.0
        return fp - 1.0

    a0, a1 = 0.4, 0.5
    m0, m1 = shoot(a0), shoot(a1)
    for _ in range(max_iter):
        if m1 == m0:
            break
        a2 = a1 - m1 * (a1 - a0) / (m1 - m0)
        a0, m0, a1 = a1, m1, a2
        m1 = shoot(a1)
        if abs(a1 - a0) < tol:
            break
    return a1
