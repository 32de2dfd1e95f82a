"""Saddle-to-sink connections of the frozen-y fast system.

In coordinates z = x - beta centred on the upper sink beta = x_+(y), the
fast vector field becomes psi(z) = -((beta**2 - 1) z + beta z**2 + z**3/3)
and the delayed fast system reads z' = psi(z) + J (z - z(t - tau)).
"""

import csv
import enum
import math
from dataclasses import dataclass

import numpy as np

from .critical_manifold import Y_FOLD, BranchId, branch_x
from .dde_core import HistorySpec, simulate_fast
from .errors import DomainError

__all__ = [
    "Side",
    "Target",
    "TrapRegion",
    "ConnectionReport",
    "LyapunovSeries",
    "psi",
    "potential",
    "trap_region",
    "verify_connection",
    "lyapunov_monitor",
    "connection_grid",
    "write_connection_csv",
]

KICK = 0.01
DEFAULT_TOL = 1e-6
DEFAULT_T_MAX = 200.0


class Side(str, enum.Enum):
    PLUS = "plus"
    MINUS = "minus"


class Target(str, enum.Enum):
    UPPER = "upper"
    LOWER = "lower"
    NONE = "none"


@dataclass(frozen=True)
class TrapRegion:
    beta: float
    z_max: float
    psi_max: float
    rho: float

    def contains(self, z):
        """Membership in {z_max < z < -z_max, |psi(z)| < psi_max rho}."""
        z = np.asarray(z, dtype=float)
        return (z > self.z_max) & (z < -self.z_max) & (np.abs(psi(self.beta, z)) < self.psi_max * self.rho)


@dataclass(frozen=True)
class ConnectionReport:
    target: Target
    hit_time: float
    final_distance: float


@dataclass(frozen=True)
class LyapunovSeries:
    """Potential along an orbit and trap membership per sample."""

    times: np.ndarray
    V: np.ndarray
    in_trap: np.ndarray
    first_entry: float | None
    absorbing: bool


def psi(beta, z):
    """Fast vector field in coordinates centred on x = beta."""
    return -((beta * beta - 1.0) * z + beta * z * z + z**3 / 3.0)


def potential(beta, z):
    """V(z) = -int_0^z psi, so that dV/dz = -psi."""
    return (beta * beta - 1.0) * z * z / 2.0 + beta * z**3 / 3.0 + z**4 / 12.0


def trap_region(J, tau, y):
    """Trapping region around the upper sink, valid for 0 <= J tau < 1/2."""
    jt = J * tau
    if not 0 <= jt < 0.5:
        raise DomainError(f"trapping region requires 0 <= J*tau < 1/2, got {jt}")
    if not abs(y) < Y_FOLD:
        raise DomainError(f"|y| must be < 2/3, got {y}")
    beta = branch_x(BranchId.UPPER, y)
    return TrapRegion(
        beta=beta,
        z_max=1.0 - beta,
        psi_max=(beta - 1.0) ** 2 * (beta + 2.0) / 3.0,
        rho=jt / (1.0 - jt),
    )


def verify_connection(J, tau, y, side=Side.PLUS, t_max=DEFAULT_T_MAX, tol=DEFAULT_TOL,
                      kick=KICK, h=None):
    """Follow the unstable manifold of the saddle x_0(y) and report its sink.

    The history is the saddle value, x(0) is offset by +kick (side plus) or
    -kick (side minus). ``t_max`` is rounded to the integration grid.
    """
    if not abs(y) < Y_FOLD:
        raise DomainError(f"|y| must be < 2/3, got {y}")
    side = Side(side)
    x0 = branch_x(BranchId.MIDDLE, y)
    start = x0 + kick if side is Side.PLUS else x0 - kick
    traj = simulate_fast(J, tau, y, HistorySpec(x0, start, y), t_max, h)
    x = traj.x
    for tgt, xb in ((Target.UPPER, branch_x(BranchId.UPPER, y)),
                    (Target.LOWER, branch_x(BranchId.LOWER, y))):
        d = np.abs(x - xb)
        if d[-1] <= tol:
            return ConnectionReport(tgt, float(traj.times[int(np.argmax(d <= tol))]), float(d[-1]))
    xp = branch_x(BranchId.UPPER, y)
    xm = branch_x(BranchId.LOWER, y)
    return ConnectionReport(Target.NONE, math.nan, float(min(abs(x[-1] - xp), abs(x[-1] - xm))))


def lyapunov_monitor(traj, beta, trap):
    """Potential and trap membership along a fast trajectory.

    ``traj`` holds untranslated x; the translation z = x - beta is applied
    here. Refuses regions with rho >= 1 (J tau >= 1/2), where the trapping
    argument does not hold.
    """
    if not trap.rho < 1.0:
        raise DomainError(f"trapping argument needs rho < 1, got {trap.rho}")
    z = np.asarray(traj.x) - beta
    inside = trap.contains(z)
    idx = np.flatnonzero(inside)
    first = float(traj.times[idx[0]]) if idx.size else None
    absorbing = bool(idx.size and inside[idx[0]:].all())
    return LyapunovSeries(np.asarray(traj.times), potential(beta, z), inside, first, absorbing)


def connection_grid(J, taus, ys, sides=(Side.PLUS, Side.MINUS), **kwargs):
    """Run :func:`verify_connection` over a (tau, y, side) grid.

    Returns rows ``(J, tau, y, side, report)``.
    """
    rows = []
    for tau in taus:
        for y in ys:
            for side in sides:
                side = Side(side)
                rows.append((J, tau, y, side, verify_connection(J, tau, y, side, **kwargs)))
    return rows


def write_connection_csv(rows, path_or_buf):
    """CSV with header ``J,tau,y,side,target,hit_time``."""
    own = not hasattr(path_or_buf, "write")
    fh = open(path_or_buf, "w", newline="") if own else path_or_buf
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["J", "tau", "y", "side", "target", "hit_time"])
        for J, tau, y, side, rep in rows:
            w.writerow([f"{J:.17g}", f"{tau:.17g}", f"{y:.17g}", Side(side).value,
                        rep.target.value, f"{rep.hit_time:.17g}"])
    finally:
        if own:
            fh.close()
