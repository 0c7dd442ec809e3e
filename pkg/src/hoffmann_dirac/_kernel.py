"""Compiled inner loops: profile interpolation and Prufer integration.

Profile coefficients live on a uniform grid in ``t = ln r``; values and exact
``t``-derivatives are interpolated by cubic Hermite polynomials.  The Prufer
system is integrated in ``t`` with an embedded Dormand-Prince 5(4) pair.

Angle convention: ``u = R (cos theta, -sin theta)`` for the channel system
``u1' = -p u1 + (lam + f + v) u2``, ``u2' = -(lam - f + v) u1 + p u2``
(prime = d/dx, p = f kappa / r), which makes theta increase with lam.
"""
import math

import numpy as np
from numba import njit

MODE_TABLE = 0
MODE_ANALYTIC = 1

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_MAXSTEPS = 2

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200,
                                 22 / 525, -1 / 40)

_MAX_DTHETA = 1.0  # rad per step, keeps the lift unambiguous
_MAX_STEP = 0.5    # in ln r


@njit(cache=True, nogil=True)
def hermite(t, t0, dt, y, dy):
    n = y.shape[0]
    u = (t - t0) / dt
    i = int(math.floor(u))
    if i < 0:
        i = 0
    elif i > n - 2:
        i = n - 2
    s = u - i
    s1 = 1.0 - s
    h00 = (1.0 + 2.0 * s) * s1 * s1
    h10 = s * s1 * s1
    h01 = s * s * (3.0 - 2.0 * s)
    h11 = s * s * (s - 1.0)
    return h00 * y[i] + h10 * dt * dy[i] + h01 * y[i + 1] + h11 * dt * dy[i + 1]


@njit(cache=True, nogil=True)
def hermite_array(t, t0, dt, y, dy):
    out = np.empty(t.shape[0])
    for k in range(t.shape[0]):
        out[k] = hermite(t[k], t0, dt, y, dy)
    return out


@njit(cache=True, nogil=True)
def eval_fv(r, mode, t0, dt, ftab, fder, vtab, vder, c1, c2, g):
    """Metric factor f and dimensionless potential v at radius r."""
    if mode == MODE_ANALYTIC:
        a = 1.0 - 2.0 * c1 / r + c2 / (r * r)
        return math.sqrt(a), g / r
    t = math.log(r)
    n = ftab.shape[0]
    t_end = t0 + (n - 1) * dt
    if t <= t_end:
        if t < t0:
            t = t0
        return hermite(t, t0, dt, ftab, fder), hermite(t, t0, dt, vtab, vder)
    # beyond the table: continue with the Coulomb / Schwarzschild-type tails
    r_end = math.exp(t_end)
    fe = ftab[n - 1]
    f2 = 1.0 - (1.0 - fe * fe) * r_end / r
    return math.sqrt(f2), vtab[n - 1] * r_end / r


@njit(cache=True, nogil=True)
def _rhs(t, theta, lam, kappa, mode, t0, dt, ftab, fder, vtab, vder, c1, c2, g):
    r = math.exp(t)
    f, v = eval_fv(r, mode, t0, dt, ftab, fder, vtab, vder, c1, c2, g)
    p = f * kappa / r
    c = math.cos(theta)
    s = math.sin(theta)
    scale = r / (f * f)
    dth = scale * ((lam - f + v) * c * c + 2.0 * p * s * c + (lam + f + v) * s * s)
    dlr = scale * (-p * (c * c - s * s) - 2.0 * f * s * c)
    return dth, dlr


@njit(cache=True, nogil=True)
def integrate(t_a, t_b, theta0, lam, kappa, mode, t0, dt, ftab, fder, vtab, vder,
              c1, c2, g, rtol, atol, record, max_steps):
    """Integrate (theta, log R) from ln r = t_a to t_b.

    Returns (status, t_reached, theta, logR, ts, thetas, logRs); the three
    arrays hold accepted steps when ``record`` is set, else only the end
    points.
    """
    direction = 1.0 if t_b >= t_a else -1.0
    span = abs(t_b - t_a)
    cap = 64 if not record else 1024
    ts = np.empty(cap)
    ths = np.empty(cap)
    lrs = np.empty(cap)
    ts[0] = t_a
    ths[0] = theta0
    lrs[0] = 0.0
    n = 1
    t = t_a
    y0 = theta0
    y1 = 0.0
    if span == 0.0:
        return STATUS_OK, t, y0, y1, ts[:1], ths[:1], lrs[:1]
    h = direction * min(1e-3, span)
    k1a, k1b = _rhs(t, y0, lam, kappa, mode, t0, dt, ftab, fder, vtab, vder, c1, c2, g)
    steps = 0
    while direction * (t_b - t) > 0.0:
        if steps >= max_steps:
            return STATUS_MAXSTEPS, t, y0, y1, ts[:n], ths[:n], lrs[:n]
        if abs(h) > _MAX_STEP:
            h = direction * _MAX_STEP
        if direction * (t + h - t_b) > 0.0:
            h = t_b - t
            if abs(h) < 1e-14 * max(1.0, abs(t)):
                t = t_b
                break
        if abs(h) < 1e-14 * max(1.0, abs(t)):
            return STATUS_UNDERFLOW, t, y0, y1, ts[:n], ths[:n], lrs[:n]
        k2a, k2b = _rhs(t + _C2 * h, y0 + h * _A21 * k1a, lam, kappa, mode, t0, dt,
                        ftab, fder, vtab, vder, c1, c2, g)
        k3a, k3b = _rhs(t + _C3 * h, y0 + h * (_A31 * k1a + _A32 * k2a), lam, kappa, mode,
                        t0, dt, ftab, fder, vtab, vder, c1, c2, g)
        k4a, k4b = _rhs(t + _C4 * h, y0 + h * (_A41 * k1a + _A42 * k2a + _A43 * k3a), lam,
                        kappa, mode, t0, dt, ftab, fder, vtab, vder, c1, c2, g)
        k5a, k5b = _rhs(t + _C5 * h,
                        y0 + h * (_A51 * k1a + _A52 * k2a + _A53 * k3a + _A54 * k4a),
                        lam, kappa, mode, t0, dt, ftab, fder, vtab, vder, c1, c2, g)
        k6a, k6b = _rhs(t + h,
                        y0 + h * (_A61 * k1a + _A62 * k2a + _A63 * k3a + _A64 * k4a
                                  + _A65 * k5a),
                        lam, kappa, mode, t0, dt, ftab, fder, vtab, vder, c1, c2, g)
        n0 = y0 + h * (_B1 * k1a + _B3 * k3a + _B4 * k4a + _B5 * k5a + _B6 * k6a)
        n1 = y1 + h * (_B1 * k1b + _B3 * k3b + _B4 * k4b + _B5 * k5b + _B6 * k6b)
        k7a, k7b = _rhs(t + h, n0, lam, kappa, mode, t0, dt, ftab, fder, vtab, vder,
                        c1, c2, g)
        e0 = h * (_E1 * k1a + _E3 * k3a + _E4 * k4a + _E5 * k5a + _E6 * k6a + _E7 * k7a)
        e1 = h * (_E1 * k1b + _E3 * k3b + _E4 * k4b + _E5 * k5b + _E6 * k6b + _E7 * k7b)
        sc0 = atol + rtol * max(abs(y0), abs(n0))
        sc1 = atol + rtol * max(abs(y1), abs(n1))
        err = max(abs(e0) / sc0, abs(e1) / sc1)
        steps += 1
        if err <= 1.0 and abs(n0 - y0) <= _MAX_DTHETA:
            t = t + h
            y0 = n0
            y1 = n1
            k1a, k1b = k7a, k7b
            if record:
                if n == ts.shape[0]:
                    ts = np.concatenate((ts, np.empty(n)))
                    ths = np.concatenate((ths, np.empty(n)))
                    lrs = np.concatenate((lrs, np.empty(n)))
                ts[n] = t
                ths[n] = y0
                lrs[n] = y1
                n += 1
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        elif err <= 1.0:
            fac = 0.5
        else:
            fac = max(0.1, 0.9 * err ** -0.2)
        h = h * fac
    if not record:
        ts[1] = t
        ths[1] = y0
        lrs[1] = y1
        n = 2
    return STATUS_OK, t, y0, y1, ts[:n], ths[:n], lrs[:n]
