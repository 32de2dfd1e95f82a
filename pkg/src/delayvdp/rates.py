"""Contraction and expansion rates along the slow branches.

For a slow point (x, y) on a branch of the critical manifold the rate is
lambda(x) / g(x), with g = a - x the slow flow. Integrals over y are
evaluated in the branch coordinate x, where dy = (x**2 - 1) dx removes the
square-root behaviour at the folds; for a = 1 the 0/0 integrand at the
lower fold turns into the smooth factor -(x + 1).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .critical_manifold import Y_FOLD, BranchId, branch_x
from .errors import BracketError, DomainError, RegimeError
from .spectral import leading_root

__all__ = [
    "RateProfile",
    "H4Result",
    "lambda_on_branch",
    "lambda_at",
    "fold_limit",
    "rate_integrals",
    "rate_profile",
    "h4_check",
    "tau_star",
]

Y_MIN, Y_MAX = -Y_FOLD, Y_FOLD
EPS_REL = 1e-8
_EPS_ABS = 1e-14
FOLD_OFFSET = 1e-6


@dataclass(frozen=True)
class RateProfile:
    """R_np, R_nm and R_p sampled on a grid of y_star values."""

    y_grid: np.ndarray
    R_np: np.ndarray
    R_nm: np.ndarray
    R_p: np.ndarray
    params: dict = field(default_factory=dict)

    @property
    def margin(self):
        """R_np - R_p; positive everywhere when the stability condition holds."""
        return self.R_np - self.R_p

    @property
    def with_head_margin(self):
        """R_nm(y*) + R_np(y_M) - R_p(y*), the canards-with-head comparison."""
        return self.R_nm + self.params["R_np_full"] - self.R_p

    def to_csv(self, path_or_buf):
        """Write ``y_star,R_np,R_nm,R_p`` preceded by ``# key=value`` metadata."""
        lines = [f"# {k}={v!r}" for k, v in self.params.items()]
        lines.append("y_star,R_np,R_nm,R_p")
        for row in zip(self.y_grid, self.R_np, self.R_nm, self.R_p):
            lines.append(",".join(f"{v:.17g}" for v in row))
        text = "\n".join(lines) + "\n"
        if hasattr(path_or_buf, "write"):
            path_or_buf.write(text)
        else:
            with open(path_or_buf, "w") as fh:
                fh.write(text)


@dataclass(frozen=True)
class H4Result:
    """Outcome of the R_np > R_p comparison on a y_star grid.

    ``violation`` brackets the failing region by the neighbouring passing
    grid points (or the fold values when the failure reaches the ends).
    """

    holds: bool
    violation: tuple | None
    min_margin: float
    y_at_min: float


def _check_jt(J, tau):
    if J * tau >= 1.0:
        raise RegimeError(f"rates need J*tau < 1 (outer branches lose stability), got {J * tau}")


def lambda_at(J, tau, x):
    """Real part of the rightmost characteristic root at the slow point x.

    On the outer branches away from the folds the rightmost roots can be a
    complex pair; their common real part is the contraction rate.
    """
    return leading_root(J, tau, x).value.real


def lambda_on_branch(J, tau, branch, y):
    """Rate on a branch: lambda_p on the middle one, lambda_{n,+/-} on the outer ones."""
    _check_jt(J, tau)
    branch = BranchId(branch)
    lo, hi = {
        BranchId.MIDDLE: (Y_MIN, Y_MAX),
        BranchId.UPPER: (Y_MIN, math.inf),
        BranchId.LOWER: (-math.inf, Y_MAX),
    }[branch]
    if not lo < y < hi:
        raise DomainError(f"y={y} not strictly inside the {branch.value} branch")
    return lambda_at(J, tau, branch_x(branch, y))


def _x_integrand(J, tau, a):
    """lambda(x) (x**2 - 1) / (a - x), with the a = +/-1 fold cancellation done exactly."""
    if a == 1.0:
        return lambda x: -lambda_at(J, tau, x) * (x + 1.0)
    if a == -1.0:
        return lambda x: lambda_at(J, tau, x) * (1.0 - x)
    return lambda x: lambda_at(J, tau, x) * (x * x - 1.0) / (a - x)


def _check_regular(a, x0, x1, what):
    lo, hi = min(x0, x1), max(x0, x1)
    if abs(a) == 1.0 and a in (x0, x1):
        return  # removable singularity at a fold endpoint
    if lo <= a <= hi:
        raise DomainError(f"g = a - x vanishes on the {what} integration path (a={a})")


def _quad(f, x0, x1):
    if x0 == x1:
        return 0.0
    val, _ = quad(f, x0, x1, epsrel=EPS_REL, epsabs=_EPS_ABS, limit=200)
    return val


def fold_limit(J, tau, a, branch, delta=FOLD_OFFSET):
    """Integrand lambda/g at the fold end of a branch by extrapolation.

    The integrand is sampled at y offsets delta, 2 delta and 3 delta from the
    fold and extrapolated with a quadratic in the branch coordinate x, in
    which it is smooth (in y it behaves like sqrt(y - y_fold)). For a = 1 at
    the lower fold the exact limit is 2 / (1 - J tau).
    """
    _check_jt(J, tau)
    branch = BranchId(branch)
    if branch is BranchId.LOWER:
        y_f, sgn = Y_MAX, -1.0
    else:
        y_f, sgn = Y_MIN, 1.0
    xs = np.array([branch_x(branch, y_f + k * sgn * delta) for k in (1, 2, 3)])
    fs = np.array([lambda_at(J, tau, x) / (a - x) for x in xs])
    x_f = branch_x(branch, y_f)
    return float(np.polyval(np.polyfit(xs - x_f, fs, 2), 0.0))


def rate_integrals(J, tau, a, y_star):
    """(R_np, R_nm, R_p) at a single y_star in (-2/3, 2/3).

    R_np and R_p integrate from the lower-left fold value y_m = -2/3 up to
    y_star along the upper and middle branches; R_nm integrates from y_star
    to y_M = 2/3 along the lower branch.
    """
    _check_jt(J, tau)
    if not Y_MIN < y_star < Y_MAX:
        raise DomainError(f"y_star must lie in (-2/3, 2/3), got {y_star}")
    f = _x_integrand(J, tau, a)
    xp = branch_x(BranchId.UPPER, y_star)
    xr = branch_x(BranchId.MIDDLE, y_star)
    xm = branch_x(BranchId.LOWER, y_star)
    _check_regular(a, 1.0, xp, "upper")
    _check_regular(a, 1.0, xr, "middle")
    _check_regular(a, xm, -1.0, "lower")
    return _quad(f, 1.0, xp), _quad(f, xm, -1.0), _quad(f, 1.0, xr)


def default_grid(n):
    """n interior points of (-2/3, 2/3), equally spaced."""
    return np.linspace(Y_MIN, Y_MAX, n + 2)[1:-1]


def rate_profile(J, tau, a=1.0, y_grid=None, n=50):
    """Rates on a y_star grid, built from cumulative integrals between grid nodes."""
    _check_jt(J, tau)
    ys = default_grid(n) if y_grid is None else np.asarray(y_grid, dtype=float)
    if ys.ndim != 1 or ys.size == 0 or np.any(np.diff(ys) <= 0):
        raise DomainError("y_grid must be a non-empty ascending 1-d array")
    if ys[0] <= Y_MIN or ys[-1] >= Y_MAX:
        raise DomainError("y_grid must lie inside (-2/3, 2/3)")
    f = _x_integrand(J, tau, a)
    xp = np.array([branch_x(BranchId.UPPER, y) for y in ys])
    xr = np.array([branch_x(BranchId.MIDDLE, y) for y in ys])
    xm = np.array([branch_x(BranchId.LOWER, y) for y in ys])
    _check_regular(a, 1.0, xp[-1], "upper")
    _check_regular(a, 1.0, xr[-1], "middle")
    _check_regular(a, xm[0], -1.0, "lower")

    def cumulative(start, nodes):
        pts = np.concatenate([[start], nodes])
        return np.cumsum([_quad(f, pts[i], pts[i + 1]) for i in range(len(nodes))])

    R_np = cumulative(1.0, xp)
    R_p = cumulative(1.0, xr)
    # lower branch: integrate from each node up to the fold at x = -1
    R_nm = cumulative(-1.0, xm[::-1])[::-1] * -1.0
    _check_regular(a, 1.0, 2.0, "upper")
    params = {"J": J, "tau": tau, "a": a, "R_np_full": R_np[-1] + _quad(f, xp[-1], 2.0)}
    return RateProfile(ys, R_np, R_nm, R_p, params)


def h4_check(J, tau, a=1.0, grid_n=50):
    """Check R_np > R_p at every point of an interior y_star grid."""
    prof = rate_profile(J, tau, a, n=grid_n)
    m = prof.margin
    i_min = int(np.argmin(m))
    bad = np.flatnonzero(m <= 0)
    violation = None
    if bad.size:
        ys = prof.y_grid
        lo = ys[bad[0] - 1] if bad[0] > 0 else Y_MIN
        hi = ys[bad[-1] + 1] if bad[-1] + 1 < ys.size else Y_MAX
        violation = (float(lo), float(hi))
    return H4Result(not bad.size, violation, float(m[i_min]), float(prof.y_grid[i_min]))


def tau_star(J, a=1.0, bracket=(0.30, 0.40), grid_n=50, tol=1e-3):
    """Smallest delay at which the R_np > R_p condition fails, by bisection.

    Returns the midpoint of the final bracket, whose width is <= tol.
    """
    lo, hi = map(float, bracket)
    if not lo < hi:
        raise BracketError(f"bracket must satisfy lo < hi, got {bracket}", bracket)
    ok_lo = h4_check(J, lo, a, grid_n).holds
    ok_hi = h4_check(J, hi, a, grid_n).holds
    if ok_lo == ok_hi or not ok_lo:
        raise BracketError(
            f"condition must hold at lo and fail at hi (got {ok_lo} at {lo}, {ok_hi} at {hi})",
            bracket,
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if h4_check(J, mid, a, grid_n).holds:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
