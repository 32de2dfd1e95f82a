"""Real branches of the Lambert W function.

``w0`` is the principal branch on [-1/e, inf), ``wm1`` the lower branch on
[-1/e, 0). Both use Halley iteration from a series seed near the branch
point and a log-asymptotic seed elsewhere.
"""

import enum
import math

from .errors import ConvergenceError, DomainError

__all__ = ["WBranch", "BRANCH_POINT", "w0", "wm1", "lambertw"]

BRANCH_POINT = -math.exp(-1.0)

_CLAMP = 1e-14  # arguments this far below -1/e are clamped onto it
_SERIES_ZONE = 1e-8  # within this of -1/e the series is returned directly
_MAX_ITER = 50


class WBranch(enum.IntEnum):
    PRINCIPAL = 0
    LOWER = -1


def _branch_series(p):
    # w = -1 + p - p^2/3 + 11/72 p^3 - 43/540 p^4, p = +-sqrt(2(e x + 1))
    return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 - p * 43.0 / 540.0)))


def _halley(x, w):
    for _ in range(_MAX_ITER):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            return w
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w_new = w - step
        # near the branch point the residual is only known to ~eps*|x|,
        # which limits the attainable accuracy in w by 1/|1 + w|
        tol = max(1e-15 * (1.0 + abs(w_new)), 1e-15 * abs(x) / (ew * abs(wp1)))
        if abs(step) <= tol:
            return w_new
        w = w_new
    ew = math.exp(w)
    raise ConvergenceError(f"Halley iteration did not converge for x={x!r}", abs(w * ew - x))


def _check_low(x):
    if math.isnan(x):
        raise DomainError("Lambert W of NaN")
    if x < BRANCH_POINT - _CLAMP:
        raise DomainError(f"x={x!r} is below the branch point -1/e")
    return max(x, BRANCH_POINT)


def w0(x):
    """Principal branch W_0(x), x >= -1/e.

    Returns the real w >= -1 with w * exp(w) == x.
    """
    x = _check_low(float(x))
    if x == 0.0:
        return 0.0
    if x == BRANCH_POINT:
        return -1.0
    q = 2.0 * (math.e * x + 1.0)
    if q < 2.0 * math.e * _SERIES_ZONE:
        return _branch_series(math.sqrt(q))
    if q < 1.0:
        w = _branch_series(math.sqrt(q))
    else:
        # Winitzki's uniform approximation, a few percent off everywhere
        L = math.log1p(x)
        w = L * (1.0 - math.log1p(L) / (2.0 + L))
    return _halley(x, w)


def wm1(x):
    """Lower branch W_{-1}(x), -1/e <= x < 0.

    Returns the real w <= -1 with w * exp(w) == x.
    """
    x = float(x)
    if not x < 0.0:
        raise DomainError(f"W_-1 is undefined for x={x!r} >= 0")
    x = _check_low(x)
    if x == BRANCH_POINT:
        return -1.0
    q = 2.0 * (math.e * x + 1.0)
    if q < 2.0 * math.e * _SERIES_ZONE:
        return _branch_series(-math.sqrt(q))
    if q < 1.0:
        w = _branch_series(-math.sqrt(q))
    else:
        L1 = math.log(-x)
        L2 = math.log(-L1)
        w = L1 - L2 + L2 / L1
    return _halley(x, w)


def lambertw(x, branch=WBranch.PRINCIPAL):
    """Dispatch to :func:`w0` or :func:`wm1` by branch index (0 or -1)."""
    branch = WBranch(branch)
    return w0(x) if branch is WBranch.PRINCIPAL else wm1(x)
