"""Characteristic roots of the linearised fast subsystem.

Linearising x' = x - x**3/3 + y + J (x - x(t - tau)) about a fast
equilibrium x* gives the dispersion relation

    Delta(lam) = lam - A + J exp(-lam tau),   A = 1 - x*^2 + J,

whose roots are A + W_k(-tau J exp(-tau A)) / tau over the Lambert W
branches. The two real branches come from :mod:`delayvdp.lambert_w`;
complex roots are obtained by Newton iteration on Delta.
"""

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .critical_manifold import BranchId, branch_domain, branch_x
from .errors import ConvergenceError, DomainError, RegimeError
from .lambert_w import BRANCH_POINT, w0, wm1

__all__ = [
    "NEWTON_BRANCH",
    "CharRoot",
    "HopfPoint",
    "Stability",
    "delta",
    "delta_prime",
    "leading_root",
    "rightmost_roots",
    "hopf_frequency",
    "bt_residuals",
    "branch_stability",
]

NEWTON_BRANCH = -999  # branch_index of roots found by Newton iteration
RESIDUAL_TOL = 1e-10
_NEWTON_TOL = 1e-13
_NEWTON_MAX = 100


@dataclass(frozen=True)
class CharRoot:
    """One root of the dispersion relation.

    ``paired`` is True for a complex root whose conjugate is also a root and
    was not listed separately.
    """

    value: complex
    branch_index: int
    residual: float
    paired: bool = False

    @property
    def real(self):
        return self.value.real


@dataclass(frozen=True)
class HopfPoint:
    zeta: float


class Stability(enum.Enum):
    ATTRACTING = "attracting"
    SADDLE_1D = "saddle_1d"
    OSCILLATORY_UNSTABLE = "oscillatory_unstable"


def delta(J, tau, x_star, lam):
    """Dispersion function lam - (1 - x*^2 + J) + J exp(-lam tau)."""
    return lam - (1.0 - x_star * x_star + J) + J * cmath.exp(-lam * tau)


def delta_prime(J, tau, lam):
    return 1.0 - J * tau * cmath.exp(-lam * tau)


def _residual(J, tau, x_star, lam):
    return abs(delta(J, tau, x_star, lam))


def _newton(J, tau, x_star, lam, real=False):
    """Newton on Delta from ``lam``; returns the root or raises."""
    lam = float(lam.real) if real else complex(lam)
    exp = math.exp if real else cmath.exp
    A = 1.0 - x_star * x_star + J
    res = math.inf
    for _ in range(_NEWTON_MAX):
        e = exp(-lam * tau)
        f = lam - A + J * e
        res = abs(f)
        if res <= _NEWTON_TOL:
            return lam
        fp = 1.0 - J * tau * e
        if fp == 0:
            break
        step = f / fp
        lam = lam - step
        if abs(step) <= 1e-15 * (1.0 + abs(lam)):
            return lam
    raise ConvergenceError(
        f"Newton on Delta failed (J={J}, tau={tau}, x*={x_star}), |Delta|={res:.3e}", res
    )


def _lambert_arg(J, tau, x_star):
    A = 1.0 - x_star * x_star + J
    return A, -tau * J * math.exp(-tau * A)


def _real_roots(J, tau, x_star):
    """Roots from the two real Lambert branches (empty if the argument < -1/e)."""
    A, z = _lambert_arg(J, tau, x_star)
    if tau * (abs(A) + J) < 1e-10:
        # tiny delay: the W_0 root is a perturbation of the delay-free root
        # and the W_-1 root sits near log(tau)/tau, far to the left
        lam = _newton(J, tau, x_star, A - J, real=True)
        return [CharRoot(complex(lam, 0.0), 0, _residual(J, tau, x_star, lam))]
    if z < BRANCH_POINT - 1e-14:
        return []
    out = [(A + w0(z) / tau, 0)]
    if z < 0.0:
        out.append((A + wm1(z) / tau, -1))
    roots = []
    for lam, k in out:
        # one or two Newton polishes, the Lambert form loses digits to cancellation
        try:
            lam = _newton(J, tau, x_star, lam, real=True)
        except ConvergenceError:
            pass
        roots.append(CharRoot(complex(lam, 0.0), k, _residual(J, tau, x_star, lam)))
    return roots


def _complex_seed(J, tau, x_star, k):
    """Asymptotic seed for the k-th root family in the upper half plane."""
    A, z = _lambert_arg(J, tau, x_star)
    if k == 0:
        q = 2.0 * (math.e * z + 1.0)
        if q > -1.0:
            # near the branch point: W ~ -1 + p - p^2/3, p imaginary
            p = 1j * math.sqrt(max(-q, 0.0))
            w = -1.0 + p - p * p / 3.0
            return A + w / tau
    L1 = cmath.log(complex(z)) + 2j * math.pi * k
    w = L1 - cmath.log(L1)
    return A + w / tau


def _complex_root(J, tau, x_star, k):
    lam = _newton(J, tau, x_star, _complex_seed(J, tau, x_star, k))
    if lam.imag < 0:
        lam = lam.conjugate()
    return lam


def _check_args(J, tau):
    if tau < 0:
        raise DomainError(f"delay must be nonnegative, got tau={tau}")
    if J < 0:
        raise DomainError(f"coupling must be nonnegative, got J={J}")


def _finalize(J, tau, x_star, lam, k, paired=False):
    res = _residual(J, tau, x_star, lam)
    if res > RESIDUAL_TOL:
        raise ConvergenceError(f"root {lam} has residual {res:.3e}", res)
    return CharRoot(complex(lam), k, res, paired)


def leading_root(J, tau, x_star):
    """Characteristic root with the largest real part.

    In the complex-pair regime (Lambert argument below -1/e) the member with
    positive imaginary part is returned.
    """
    J, tau, x_star = float(J), float(tau), float(x_star)
    _check_args(J, tau)
    if tau == 0.0 or J == 0.0:
        lam = 1.0 - x_star * x_star
        return CharRoot(complex(lam, 0.0), 0, _residual(J, tau, x_star, lam))
    real = _real_roots(J, tau, x_star)
    if real:
        best = max(real, key=lambda r: r.value.real)
        return _finalize(J, tau, x_star, best.value.real, best.branch_index)
    lam = _complex_root(J, tau, x_star, 0)
    return _finalize(J, tau, x_star, lam, NEWTON_BRANCH, paired=True)


def rightmost_roots(J, tau, x_star, n):
    """The ``n`` roots with largest real part, sorted by descending real part.

    Conjugate pairs are listed once (positive imaginary part, ``paired``
    set). With J == 0 the relation is linear and only one root exists.
    """
    J, tau, x_star = float(J), float(tau), float(x_star)
    _check_args(J, tau)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if tau == 0.0:
        raise DomainError("rightmost_roots needs tau > 0")
    if J == 0.0:
        return [leading_root(J, tau, x_star)]
    found = [_finalize(J, tau, x_star, r.value.real, r.branch_index) for r in _real_roots(J, tau, x_star)]
    # complex families: k = 0 only exists when the real pair has merged
    k = 0 if not found else 1
    while True:
        lam = _complex_root(J, tau, x_star, k)
        if all(abs(lam - r.value) > 1e-8 * (1.0 + abs(lam)) for r in found):
            found.append(_finalize(J, tau, x_star, lam, NEWTON_BRANCH, paired=True))
        k += 1
        found.sort(key=lambda r: (-r.value.real, -r.value.imag))
        # the k-th family lies left of all earlier ones, so stop once it is
        # beyond the n-th best root
        if len(found) >= n and lam.real < found[n - 1].value.real:
            break
        if k > n + 50:
            raise ConvergenceError(f"could not isolate {n} roots", None)
    return found[:n]


def hopf_frequency(J, tau):
    """Smallest zeta > 0 with zeta = J sin(zeta tau), or None if J tau <= 1."""
    J, tau = float(J), float(tau)
    if J <= 0:
        raise DomainError(f"hopf_frequency needs J > 0, got {J}")
    _check_args(J, tau)
    jt = J * tau
    if jt <= 1.0:
        return None
    # u = zeta tau solves u = jt sin u on (0, pi); jt sin u - u > 0 for
    # small u as long as u^2 < 6 (jt - 1) / jt
    lo = min(1e-3, math.sqrt(3.0 * (jt - 1.0) / jt))
    u = brentq(lambda u: jt * math.sin(u) - u, lo, math.pi, xtol=1e-16, maxiter=200)
    return HopfPoint(u / tau)


def bt_residuals(J, tau):
    """(|Delta(0)|, Delta'(0)) at the fold x* = 1; both vanish at J tau = 1."""
    J, tau = float(J), float(tau)
    return abs(delta(J, tau, 1.0, 0.0)), float(delta_prime(J, tau, 0.0).real)


def branch_stability(J, tau, branch, y, n=8):
    """Classify a fast equilibrium on ``branch`` at height ``y``."""
    branch = BranchId(branch)
    lo, hi = branch_domain(branch)
    if not lo < y < hi:
        raise DomainError(f"y={y} is not strictly inside the {branch.value} branch")
    x = branch_x(branch, y)
    if tau == 0.0 or J == 0.0:
        roots = [leading_root(J, tau, x)]
    else:
        roots = rightmost_roots(J, tau, x, n)
    if any(r.paired and r.value.real > 0 for r in roots):
        return Stability.OSCILLATORY_UNSTABLE
    n_pos = sum(1 for r in roots if r.value.real > 0)
    if n_pos == 0:
        return Stability.ATTRACTING
    if n_pos == 1:
        return Stability.SADDLE_1D
    raise RegimeError(f"{n_pos} real unstable directions at y={y} on the {branch.value} branch")
