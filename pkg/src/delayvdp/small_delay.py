"""First-order small-delay reduction of the delayed van der Pol system.

Replacing x(t) - x(t - tau) by tau x'(t) gives (1 - J tau) x' = x - x**3/3 + y,
which in the rescaled time theta = t / (1 - J tau) is the classical van der
Pol system with slow timescale eps_tilde = eps (1 - J tau).
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernel
from .dde_core import Trajectory, VdpParams, default_step
from .errors import BlowUpError, BracketError, DomainError, StepSizeError

__all__ = [
    "NormalFormCoeffs",
    "GenericityItem",
    "TimeUnit",
    "coeffs",
    "tau_c_leading",
    "ode_simulate",
    "genericity_report",
]


@dataclass(frozen=True)
class NormalFormCoeffs:
    """Leading-order canard data of the reduced system.

    ``a_tilde_c`` is the canard value of the shifted parameter 1 - a,
    ``a1`` the linear coefficient a1 = J tau**2 / (2 (1 - J tau)) of the
    centre-manifold normal form.
    """

    eps_tilde: float
    a_tilde_c: float
    a_c: float
    a1: float


@dataclass(frozen=True)
class GenericityItem:
    condition: str
    location: str
    value: float
    expected: float
    passes: bool


class TimeUnit(str, enum.Enum):
    THETA = "theta"
    T = "t"


def _check_jt(J, tau):
    jt = J * tau
    if not jt < 1.0:
        raise DomainError(f"reduction requires J*tau < 1 (coefficients blow up at tau = 1/J), got {jt}")
    return jt


def coeffs(J, tau, eps):
    if eps < 0:
        raise DomainError(f"eps must be >= 0, got {eps}")
    jt = _check_jt(J, tau)
    eps_t = eps * (1.0 - jt)
    return NormalFormCoeffs(
        eps_tilde=eps_t,
        a_tilde_c=eps_t / 8.0,
        a_c=1.0 - eps_t / 8.0,
        a1=J * tau * tau / (2.0 * (1.0 - jt)),
    )


def tau_c_leading(J, eps, a):
    """Delay at which the leading-order canard value eps_tilde/8 reaches 1 - a.

    Requires 0 <= 1 - a < eps/8, the window where the zero-delay system
    shows small cycles and a delay-induced explosion exists.
    """
    at = 1.0 - a
    if not (eps > 0 and J != 0 and 0.0 <= at < eps / 8.0):
        raise BracketError(
            f"no canard crossing: need J != 0 and 0 <= 1 - a < eps/8 (1 - a = {at}, eps/8 = {eps / 8.0})"
        )
    return (1.0 - 8.0 * at / eps) / J


def ode_simulate(p, init, t_end, h=None, time=TimeUnit.THETA):
    """Integrate the reduced ODE with RK4.

    Parameters
    ----------
    p : VdpParams
    init : (x0, y0)
    t_end : float
        Final time in the chosen unit.
    h : float, optional
        Step in the chosen unit; default min(1e-3, eps_tilde/50) in theta.
    time : {"theta", "t"}
        "theta" integrates dx/dtheta = x - x**3/3 + y, dy/dtheta = eps_tilde (a - x);
        "t" integrates (1 - J tau) dx/dt = x - x**3/3 + y, dy/dt = eps (a - x).
    """
    jt = _check_jt(p.J, p.tau)
    time = TimeUnit(time)
    if not t_end > 0:
        raise DomainError(f"t_end must be positive, got {t_end}")
    scale = 1.0 - jt
    if h is None:
        h = default_step(0.0, p.eps * scale)
        if time is TimeUnit.T:
            h *= scale
    if not h > 0:
        raise StepSizeError(f"step must be positive, got h={h}")
    n = int(round(t_end / h))
    if n < 1:
        raise StepSizeError(f"t_end={t_end} shorter than one step h={h}")
    if time is TimeUnit.THETA:
        c, eps = 1.0, p.eps * scale
    else:
        c, eps = 1.0 / scale, p.eps
    x = np.empty(n + 1)
    y = np.empty(n + 1)
    dx = np.empty(n + 1)
    dy = np.empty(n + 1)
    x[0], y[0] = init
    bad = _kernel.rk4_ode(x, y, dx, dy, n, h, c, p.a, eps)
    if bad >= 0:
        raise BlowUpError(f"|x| exceeded {_kernel.OVERFLOW:g} at {time.value}={bad * h:.6g}", bad * h)
    return Trajectory(
        h, np.arange(n + 1) * h, np.column_stack([x, y]), np.column_stack([dx, dy]),
        {"J": p.J, "tau": p.tau, "a": p.a, "eps": p.eps, "h": h, "time": time.value},
    )


def genericity_report(J, tau, a=1.0, fd_step=1e-4, tol=1e-6):
    """Finite-difference check of the fold and canard-point conditions.

    Works with f(x, y) = x - x**3/3 + y, g(x, a) = a - x and the canard
    parameter a_tilde = 1 - a. Each item compares a central difference with
    its analytic value.
    """
    _check_jt(J, tau)
    hs = fd_step

    def f(x, y):
        return x - x**3 / 3.0 + y

    def g(x, at):
        return (1.0 - at) - x

    def phi(x):
        # critical manifold as a graph y = phi(x)
        return x**3 / 3.0 - x

    items = []

    def add(cond, loc, value, expected, nonzero_only=False):
        ok = value != 0.0 and math.isfinite(value) if nonzero_only else abs(value - expected) <= tol
        items.append(GenericityItem(cond, loc, float(value), float(expected), bool(ok)))

    for xs, loc in ((1.0, "canard fold x=1"), (-1.0, "plain fold x=-1")):
        ys = phi(xs)
        add("A1 phi'' (non-degenerate extremum)", loc,
            (phi(xs + hs) - 2 * phi(xs) + phi(xs - hs)) / hs**2, 2.0 * xs)
        add("A3 d2f/dx2", loc,
            (f(xs + hs, ys) - 2 * f(xs, ys) + f(xs - hs, ys)) / hs**2, -2.0 * xs)
        add("A3 df/dy", loc, (f(xs, ys + hs) - f(xs, ys - hs)) / (2 * hs), 1.0)
    for xs, loc, expected in ((-2.0, "lower branch x=-2", -3.0), (0.0, "middle branch x=0", 1.0),
                              (2.0, "upper branch x=2", -3.0)):
        ys = phi(xs)
        add("A2 df/dx (attracting < 0 < repelling)", loc,
            (f(xs + hs, ys) - f(xs - hs, ys)) / (2 * hs), expected)
    add("A3 g at plain fold", "plain fold x=-1", g(-1.0, 0.0), 2.0)
    add("A3 dg/dx", "canard fold x=1", (g(1.0 + hs, 0.0) - g(1.0 - hs, 0.0)) / (2 * hs), -1.0)
    add("A3 dg/da_tilde", "canard fold x=1", (g(1.0, hs) - g(1.0, -hs)) / (2 * hs), -1.0,
        nonzero_only=True)
    # slow flow x' = g / phi' on the manifold at the canard value a = 1;
    # it is -1/(1 + x), regular through the canard fold
    for xs, loc in ((-2.0, "lower branch x=-2"), (0.0, "middle branch x=0"),
                    (1.0 + hs, "canard fold x=1+"), (2.0, "upper branch x=2")):
        dphi = xs * xs - 1.0
        add("A4 slow flow g/phi'", loc, g(xs, 0.0) / dphi, -1.0 / (1.0 + xs))
    return items
