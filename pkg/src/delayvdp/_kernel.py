"""Compiled RK4 step loop for the delayed van der Pol system.

Buffers hold grid nodes; ``g0`` is the global index of buffer slot 0 so
that delayed lookups with a negative global index fall back to the
constant history ``x_past``.
"""

import numba
import numpy as np

OVERFLOW = 1e6


@numba.njit(cache=True)
def _f(x, y, xd, J):
    return x - x * x * x / 3.0 + y + J * (x - xd)


@numba.njit(cache=True)
def rk4_delay(x, y, dx, dy, n0, n1, m, g0, h, J, a, eps, x_past, jump):
    """Advance nodes n0 -> n1 in place.

    m is the delay in steps (0: no delay, the J-term vanishes). When
    ``jump`` is set, x(0) differs from the history and node m carries a
    one-sided derivative; the left one is recomputed for interpolation.
    Returns the global index of the first node with |x| > OVERFLOW, or -1.
    """
    for n in range(n0, n1):
        xn = x[n]
        yn = y[n]
        if m == 0:
            xd0 = xn
        elif g0 + n - m < 0:
            xd0 = x_past
        else:
            xd0 = x[n - m]
        k1x = _f(xn, yn, xd0, J)
        k1y = eps * (a - xn)
        dx[n] = k1x
        dy[n] = k1y
        i = n - m
        if m == 0:
            x2 = xn + 0.5 * h * k1x
            y2 = yn + 0.5 * h * k1y
            k2x = _f(x2, y2, x2, J)
            k2y = eps * (a - x2)
            x3 = xn + 0.5 * h * k2x
            y3 = yn + 0.5 * h * k2y
            k3x = _f(x3, y3, x3, J)
            k3y = eps * (a - x3)
            x4 = xn + h * k3x
            y4 = yn + h * k3y
            k4x = _f(x4, y4, x4, J)
            k4y = eps * (a - x4)
        else:
            if g0 + i + 1 <= 0:
                dmid = x_past
                dend = x_past
            else:
                d_right = dx[i + 1]
                if jump and g0 + i + 1 == m:
                    d_right = _f(x[i + 1], y[i + 1], x_past, J)
                dmid = 0.5 * (x[i] + x[i + 1]) + h * (dx[i] - d_right) / 8.0
                dend = x[i + 1]
            x2 = xn + 0.5 * h * k1x
            y2 = yn + 0.5 * h * k1y
            k2x = _f(x2, y2, dmid, J)
            k2y = eps * (a - x2)
            x3 = xn + 0.5 * h * k2x
            y3 = yn + 0.5 * h * k2y
            k3x = _f(x3, y3, dmid, J)
            k3y = eps * (a - x3)
            x4 = xn + h * k3x
            y4 = yn + h * k3y
            k4x = _f(x4, y4, dend, J)
            k4y = eps * (a - x4)
        xn1 = xn + h * (k1x + 2.0 * k2x + 2.0 * k3x + k4x) / 6.0
        x[n + 1] = xn1
        y[n + 1] = yn + h * (k1y + 2.0 * k2y + 2.0 * k3y + k4y) / 6.0
        if not abs(xn1) <= OVERFLOW:
            dx[n + 1] = np.nan
            dy[n + 1] = np.nan
            return g0 + n + 1
    # derivative at the last node
    xn = x[n1]
    if m == 0:
        xd0 = xn
    elif g0 + n1 - m < 0:
        xd0 = x_past
    else:
        xd0 = x[n1 - m]
    dx[n1] = _f(xn, y[n1], xd0, J)
    dy[n1] = eps * (a - xn)
    return -1


@numba.njit(cache=True)
def rk4_ode(x, y, dx, dy, n, h, c, a, eps):
    """Plain RK4 for x' = c (x - x**3/3 + y), y' = eps (a - x).

    Returns the index of the first node with |x| > OVERFLOW, or -1.
    """
    for k in range(n):
        xn = x[k]
        yn = y[k]
        k1x = c * (xn - xn * xn * xn / 3.0 + yn)
        k1y = eps * (a - xn)
        dx[k] = k1x
        dy[k] = k1y
        x2 = xn + 0.5 * h * k1x
        y2 = yn + 0.5 * h * k1y
        k2x = c * (x2 - x2 * x2 * x2 / 3.0 + y2)
        k2y = eps * (a - x2)
        x3 = xn + 0.5 * h * k2x
        y3 = yn + 0.5 * h * k2y
        k3x = c * (x3 - x3 * x3 * x3 / 3.0 + y3)
        k3y = eps * (a - x3)
        x4 = xn + h * k3x
        y4 = yn + h * k3y
        k4x = c * (x4 - x4 * x4 * x4 / 3.0 + y4)
        k4y = eps * (a - x4)
        x[k + 1] = xn + h * (k1x + 2.0 * k2x + 2.0 * k3x + k4x) / 6.0
        y[k + 1] = yn + h * (k1y + 2.0 * k2y + 2.0 * k3y + k4y) / 6.0
        if not abs(x[k + 1]) <= OVERFLOW:
            return k + 1
    xn = x[n]
    dx[n] = c * (xn - xn * xn * xn / 3.0 + y[n])
    dy[n] = eps * (a - xn)
    return -1
