"""Compiled inner loops for the fast layer and the coupled system.

These replicate ``fast_layer.fhn_rhs`` and ``plasticity.plasticity_rhs``
scalar by scalar; the test suite checks them against the pure-Python path.
"""

from __future__ import annotations

import math

import numba
import numpy as np


@numba.njit(cache=True)
def _coupled_rhs(u, v, t1, t2, a, b, eps, g, eta, k, rho0, omega, rho_eps):
    du = u - u * u * u / 3.0 - v + t1
    dv = eps * (u + a - b * v)
    rho = math.sqrt(t1 * t1 + t2 * t2)
    if rho < rho_eps:
        gx = 0.0
        gy = 0.0
    else:
        c = k * (rho - rho0) / rho
        gx = c * t1
        gy = c * t2
    d1 = g * (-eta * gx - omega * t2)
    d2 = g * (-eta * gy + omega * t1)
    return du, dv, d1, d2


@numba.njit(cache=True)
def advance_coupled(x, n_steps, dt, a, b, eps, g, eta, k, rho0, omega, rho_eps):
    """RK4-advance ``x = [u, v, theta1, theta2]`` in place with a held gate ``g``.

    ``omega`` is the effective rotation rate (0 for the gradient-only flow).
    Returns -1 on success or the index of the first non-finite step.
    """
    u, v, t1, t2 = x[0], x[1], x[2], x[3]
    h = 0.5 * dt
    for i in range(n_steps):
        a1, b1, c1, d1 = _coupled_rhs(u, v, t1, t2, a, b, eps, g, eta, k, rho0, omega, rho_eps)
        a2, b2, c2, d2 = _coupled_rhs(
            u + h * a1, v + h * b1, t1 + h * c1, t2 + h * d1,
            a, b, eps, g, eta, k, rho0, omega, rho_eps,
        )
        a3, b3, c3, d3 = _coupled_rhs(
            u + h * a2, v + h * b2, t1 + h * c2, t2 + h * d2,
            a, b, eps, g, eta, k, rho0, omega, rho_eps,
        )
        a4, b4, c4, d4 = _coupled_rhs(
            u + dt * a3, v + dt * b3, t1 + dt * c3, t2 + dt * d3,
            a, b, eps, g, eta, k, rho0, omega, rho_eps,
        )
        u = u + (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        v = v + (dt / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
        t1 = t1 + (dt / 6.0) * (c1 + 2.0 * c2 + 2.0 * c3 + c4)
        t2 = t2 + (dt / 6.0) * (d1 + 2.0 * d2 + 2.0 * d3 + d4)
        if not (math.isfinite(u) and math.isfinite(v) and math.isfinite(t1) and math.isfinite(t2)):
            x[0], x[1], x[2], x[3] = u, v, t1, t2
            return i
    x[0], x[1], x[2], x[3] = u, v, t1, t2
    return -1


@numba.njit(cache=True)
def fhn_amplitude(a, b, eps, theta1, u0, v0, dt, n_burn, n_meas):
    """Peak-to-peak ``u`` of the frozen-parameter fast layer after a burn-in."""
    x = np.array([u0, v0, theta1, 0.0])
    advance_coupled(x, n_burn, dt, a, b, eps, 0.0, 0.0, 1.0, 1.0, 0.0, 1e-9)
    lo = x[0]
    hi = x[0]
    for _ in range(n_meas):
        advance_coupled(x, 1, dt, a, b, eps, 0.0, 0.0, 1.0, 1.0, 0.0, 1e-9)
        if x[0] < lo:
            lo = x[0]
        if x[0] > hi:
            hi = x[0]
    return hi - lo


@numba.njit(cache=True)
def pop_var(x):
    n = x.size
    if n == 0:
        return 0.0
    m = 0.0
    for i in range(n):
        m += x[i]
    m /= n
    s = 0.0
    for i in range(n):
        d = x[i] - m
        s += d * d
    return s / n


@numba.njit(cache=True)
def mean_norm(dx, dy):
    n = dx.size
    s = 0.0
    for i in range(n):
        s += math.sqrt(dx[i] * dx[i] + dy[i] * dy[i])
    return s / n


@numba.njit(cache=True)
def peak_autocorr(x, lag_min, lag_max):
    """Max over lags of the overlap-normalised correlation of mean-removed ``x``."""
    n = x.size
    if lag_max > n - 1:
        lag_max = n - 1
    if lag_max < lag_min:
        return 0.0
    m = 0.0
    for i in range(n):
        m += x[i]
    m /= n
    y = np.empty(n)
    for i in range(n):
        y[i] = x[i] - m
    c2 = np.zeros(n + 1)
    for i in range(n):
        c2[i + 1] = c2[i] + y[i] * y[i]
    best = -np.inf
    for lag in range(lag_min, lag_max + 1):
        num = 0.0
        for i in range(n - lag):
            num += y[i] * y[i + lag]
        den = math.sqrt(c2[n - lag] * (c2[n] - c2[lag]))
        r = num / den if den > 0.0 else 0.0
        if r > best:
            best = r
    return best
