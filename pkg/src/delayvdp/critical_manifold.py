"""The cubic critical manifold x - x**3/3 + y = 0 and its three branches."""

import enum
import math

import numpy as np
from dataclasses import dataclass

from .errors import DomainError

__all__ = [
    "BranchId",
    "FoldKind",
    "FoldPoint",
    "Y_FOLD",
    "manifold_residual",
    "cardano_roots",
    "branch_x",
    "branch_domain",
    "fold_points",
    "slow_flow",
]

Y_FOLD = 2.0 / 3.0
_FOLD_SLACK = 1e-12
_ACOS_SLACK = 1e-14


class BranchId(enum.Enum):
    LOWER = "lower"  # x <= -1, y <= 2/3
    MIDDLE = "middle"  # |x| <= 1, |y| <= 2/3
    UPPER = "upper"  # x >= 1, y >= -2/3


class FoldKind(enum.Enum):
    CANARD_SIDE = "canard_side"
    PLAIN_SIDE = "plain_side"


@dataclass(frozen=True)
class FoldPoint:
    x: float
    y: float
    kind: FoldKind


def manifold_residual(x, y):
    return x - x**3 / 3.0 + y


def _polish(x, y):
    # one Newton step on x - x^3/3 + y, skipped at the double roots
    d = 1.0 - x * x
    if abs(d) > 1e-6:
        x = x - manifold_residual(x, y) / d
    return x


def cardano_roots(y):
    """Real roots of x - x**3/3 + y = 0 in ascending order.

    Returns a list of ``(root, multiplicity)`` pairs: three simple roots for
    |y| < 2/3, a double and a simple root at |y| = 2/3, one simple root
    otherwise.
    """
    y = float(y)
    ay = abs(y)
    if ay == Y_FOLD:
        s = 1.0 if y > 0 else -1.0
        return sorted([(-s, 2), (2.0 * s, 1)])
    if ay > Y_FOLD:
        # x^3 - 3x - 3y = 0, one real root
        disc = math.sqrt(9.0 * y * y - 4.0)
        root = float(np.cbrt((3.0 * y + disc) / 2.0) + np.cbrt((3.0 * y - disc) / 2.0))
        return [(_polish(root, y), 1)]
    c = max(-1.0, min(1.0, 1.5 * y))
    base = math.acos(c) / 3.0
    roots = sorted(_polish(2.0 * math.cos(base + 2.0 * k * math.pi / 3.0), y) for k in range(3))
    return [(r, 1) for r in roots]


def branch_domain(branch):
    """Closed y-interval on which ``branch`` exists."""
    branch = BranchId(branch)
    if branch is BranchId.LOWER:
        return (-math.inf, Y_FOLD)
    if branch is BranchId.UPPER:
        return (-Y_FOLD, math.inf)
    return (-Y_FOLD, Y_FOLD)


def branch_x(branch, y):
    """x-coordinate of ``branch`` at height ``y``.

    Raises
    ------
    DomainError
        If ``y`` is outside the branch domain by more than 1e-12.
    """
    branch = BranchId(branch)
    y = float(y)
    lo, hi = branch_domain(branch)
    if y < lo - _FOLD_SLACK or y > hi + _FOLD_SLACK:
        raise DomainError(f"branch {branch.value!r} is undefined at y={y!r}")
    y = min(max(y, lo), hi)
    if branch is BranchId.MIDDLE:
        if abs(y) == Y_FOLD:
            return -1.0 if y > 0 else 1.0
        c = max(-1.0, min(1.0, 1.5 * y))
        # cos(acos(c)/3 + 4pi/3) is the root in [-1, 1]
        return _polish(2.0 * math.cos(math.acos(c) / 3.0 + 4.0 * math.pi / 3.0), y)
    if branch is BranchId.LOWER:
        # mirror of the upper branch, keeps the odd symmetry exact
        return -branch_x(BranchId.UPPER, -y)
    if y == -Y_FOLD:
        return 1.0
    return cardano_roots(y)[-1][0]


def fold_points():
    """The canard-side fold (1, -2/3) and the plain fold (-1, 2/3)."""
    return (
        FoldPoint(1.0, -Y_FOLD, FoldKind.CANARD_SIDE),
        FoldPoint(-1.0, Y_FOLD, FoldKind.PLAIN_SIDE),
    )


def slow_flow(a, branch, y):
    """Reduced slow vector field a - x on the given branch (per unit eps)."""
    return a - branch_x(branch, y)
