"""Fixed-step RK4 integration of the delayed van der Pol system.

    x' = x - x**3/3 + y + J (x - x(t - tau))
    y' = eps (a - x)

The delay is kept commensurate with the step (tau = m h), so the delayed
value at the start and end of each step is a stored node and the midpoint
stages use cubic Hermite interpolation on the known past.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernel
from .errors import BlowUpError, DomainError, StepSizeError

__all__ = [
    "VdpParams",
    "HistorySpec",
    "Trajectory",
    "default_step",
    "delay_steps",
    "simulate",
    "simulate_fast",
    "equilibrium",
    "rhs",
    "hermite",
]

H_MAX = 1e-3
_CHUNK = 1 << 20


@dataclass(frozen=True)
class VdpParams:
    J: float
    tau: float
    a: float
    eps: float

    def __post_init__(self):
        for name in ("J", "tau", "a", "eps"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite, got {v!r}")
        if self.tau < 0:
            raise DomainError(f"tau must be >= 0, got {self.tau}")
        if self.eps < 0:
            raise DomainError(f"eps must be >= 0, got {self.eps}")

    def replace(self, **changes):
        d = dict(J=self.J, tau=self.tau, a=self.a, eps=self.eps)
        d.update(changes)
        return VdpParams(**d)


@dataclass(frozen=True)
class HistorySpec:
    """Constant history ``x_past`` on [-tau, 0) and the state at t = 0."""

    x_past: float
    x_at_zero: float
    y_at_zero: float = 0.0

    @classmethod
    def constant(cls, x, y=0.0):
        return cls(x, x, y)


def _readonly(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Trajectory:
    """Uniform-grid samples of (x, y) and their derivatives.

    ``derivs`` are the right-hand side values at the nodes, which makes the
    piecewise cubic Hermite interpolant available as dense output.
    """

    step: float
    times: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "times", _readonly(self.times))
        object.__setattr__(self, "states", _readonly(self.states))
        object.__setattr__(self, "derivs", _readonly(self.derivs))
        n = len(self.times)
        if n < 2 or self.states.shape != (n, 2) or self.derivs.shape != (n, 2):
            raise ValueError("trajectory needs >= 2 samples with (n, 2) states and derivs")

    @property
    def x(self):
        return self.states[:, 0]

    @property
    def y(self):
        return self.states[:, 1]

    @property
    def t0(self):
        return float(self.times[0])

    @property
    def t_end(self):
        return float(self.times[-1])

    def __len__(self):
        return len(self.times)

    def interpolate(self, t):
        """Hermite dense output at time(s) ``t``; returns array (..., 2)."""
        t = np.asarray(t, dtype=float)
        if np.any(t < self.times[0] - 1e-12) or np.any(t > self.times[-1] + 1e-12):
            raise DomainError("interpolation time outside the trajectory")
        s = (t - self.times[0]) / self.step
        i = np.clip(np.floor(s).astype(int), 0, len(self.times) - 2)
        theta = s - i
        return hermite(
            theta[..., None], self.step,
            self.states[i], self.states[i + 1], self.derivs[i], self.derivs[i + 1],
        )

    def window(self, t_from):
        """Sub-trajectory starting at the first node with t >= t_from."""
        k = int(np.searchsorted(self.times, t_from - 1e-9 * self.step))
        if len(self.times) - k < 2:
            raise DomainError(f"window from t={t_from} leaves fewer than 2 samples")
        return Trajectory(self.step, self.times[k:], self.states[k:], self.derivs[k:], dict(self.meta))

    def to_csv(self, path_or_buf, comments=()):
        """Write ``t,x,y`` rows at 17 significant digits.

        ``comments`` are emitted first, each prefixed by ``#``.
        """
        lines = [f"# {c}" for c in comments]
        lines.append("t,x,y")
        body = np.column_stack([self.times, self.states])
        lines.extend(f"{t:.17g},{x:.17g},{y:.17g}" for t, x, y in body)
        text = "\n".join(lines) + "\n"
        if hasattr(path_or_buf, "write"):
            path_or_buf.write(text)
        else:
            with open(path_or_buf, "w") as fh:
                fh.write(text)

    @classmethod
    def from_csv(cls, path):
        """Read a ``t,x,y`` CSV back; derivatives are estimated by central differences."""
        with open(path) as fh:
            rows = [ln for ln in fh if ln.strip() and not ln.startswith(("#", "t,"))]
        arr = np.loadtxt(rows, delimiter=",", ndmin=2)
        t, xy = arr[:, 0], arr[:, 1:3]
        d = np.gradient(xy, t, axis=0)
        return cls(float(t[1] - t[0]), t, xy, d)


def hermite(theta, h, p0, p1, d0, d1):
    """Cubic Hermite interpolant on a step of length h at fraction theta."""
    t2 = theta * theta
    t3 = t2 * theta
    h00 = 2 * t3 - 3 * t2 + 1
    h10 = t3 - 2 * t2 + theta
    h01 = -2 * t3 + 3 * t2
    h11 = t3 - t2
    return h00 * p0 + h10 * h * d0 + h01 * p1 + h11 * h * d1


def rhs(p, x, y, x_delayed):
    """Vector field of the delayed system at a point."""
    return (x - x**3 / 3.0 + y + p.J * (x - x_delayed), p.eps * (p.a - x))


def equilibrium(p):
    """The unique equilibrium (a, a**3/3 - a)."""
    return p.a, p.a**3 / 3.0 - p.a


def default_step(tau, eps=0.0, h_max=H_MAX):
    """Largest step <= min(tau/8, eps/50, h_max) that divides tau."""
    cap = min(h_max, eps / 50.0) if eps > 0 else h_max
    if tau == 0:
        return cap
    m = max(8, math.ceil(tau / cap - 1e-9))
    return tau / m


def delay_steps(tau, h):
    """Delay in steps; validates h <= tau/4 and tau/h integral to 1e-9."""
    if not h > 0:
        raise StepSizeError(f"step must be positive, got h={h}")
    if tau == 0:
        return 0
    if h > tau / 4.0 * (1 + 1e-12):
        raise StepSizeError(f"step h={h} exceeds tau/4={tau / 4.0}")
    r = tau / h
    m = round(r)
    if abs(r - m) > 1e-9 * max(1.0, r):
        raise StepSizeError(f"tau/h={r!r} is not an integer; use default_step(tau)")
    return int(m)


def _integrate(J, a, eps, tau, init, t_end, h, t_record):
    m = delay_steps(tau, h)
    n_total = int(round(t_end / h))
    if n_total < 1 or abs(n_total * h - t_end) > 1e-9 * max(1.0, t_end) + 0.5 * h:
        raise StepSizeError(f"t_end={t_end} is not reachable with h={h}")
    k_rec = max(0, min(n_total - 1, int(math.ceil(t_record / h - 1e-9)))) if t_record > 0 else 0
    jump = bool(m > 0 and init.x_at_zero != init.x_past)
    keep = max(m, 1)
    buf = min(n_total, max(_CHUNK, 2 * keep)) + keep + 1

    x = np.empty(buf)
    y = np.empty(buf)
    dx = np.empty(buf)
    dy = np.empty(buf)
    x[0] = init.x_at_zero
    y[0] = init.y_at_zero
    g0 = 0  # global index of slot 0
    pos = 0  # local index of the last computed node

    # transient: advance in chunks, keeping only the last `keep` nodes
    while g0 + pos < k_rec:
        n1 = min(buf - 1, pos + (k_rec - g0 - pos))
        bad = _kernel.rk4_delay(x, y, dx, dy, pos, n1, m, g0, h, J, a, eps, init.x_past, jump)
        if bad >= 0:
            raise BlowUpError(f"|x| exceeded {_kernel.OVERFLOW:g} at t={bad * h:.6g}", bad * h)
        pos = n1
        s = max(0, pos - keep)
        for arr in (x, y, dx, dy):
            arr[:pos - s + 1] = arr[s:pos + 1]
        g0 += s
        pos -= s

    n_rec = n_total - k_rec
    xs = np.empty(pos + n_rec + 1)
    ys = np.empty_like(xs)
    dxs = np.empty_like(xs)
    dys = np.empty_like(xs)
    xs[:pos + 1] = x[:pos + 1]
    ys[:pos + 1] = y[:pos + 1]
    dxs[:pos + 1] = dx[:pos + 1]
    dys[:pos + 1] = dy[:pos + 1]
    bad = _kernel.rk4_delay(xs, ys, dxs, dys, pos, pos + n_rec, m, g0, h, J, a, eps, init.x_past, jump)
    if bad >= 0:
        raise BlowUpError(f"|x| exceeded {_kernel.OVERFLOW:g} at t={bad * h:.6g}", bad * h)
    sl = slice(pos, pos + n_rec + 1)
    times = (k_rec + np.arange(n_rec + 1)) * h
    return Trajectory(
        h, times,
        np.column_stack([xs[sl], ys[sl]]),
        np.column_stack([dxs[sl], dys[sl]]),
    )


def simulate(p, init, t_end, h=None, t_record=0.0):
    """Integrate the delayed system from a constant history.

    Parameters
    ----------
    p : VdpParams
    init : HistorySpec
        Constant history on [-tau, 0) and the state at t = 0 (a jump at 0 is
        allowed).
    t_end : float
        Final time; must be a multiple of ``h``.
    h : float, optional
        Step; defaults to :func:`default_step`. Must divide tau and satisfy
        h <= tau/4.
    t_record : float
        Only nodes with t >= t_record are returned; the transient is
        integrated in bounded memory.

    Raises
    ------
    StepSizeError, BlowUpError
    """
    if not t_end > 0:
        raise DomainError(f"t_end must be positive, got {t_end}")
    if h is None:
        h = default_step(p.tau, p.eps)
    traj = _integrate(p.J, p.a, p.eps, p.tau, init, t_end, h, t_record)
    object.__setattr__(traj, "meta", {"J": p.J, "tau": p.tau, "a": p.a, "eps": p.eps, "h": h})
    return traj


def simulate_fast(J, tau, y, init, t_end, h=None, t_record=0.0):
    """Fast subsystem with frozen ``y`` (eps = 0).

    ``init`` may be a :class:`HistorySpec` (its y is ignored) or a pair
    ``(x_past, x_at_zero)``.
    """
    if not isinstance(init, HistorySpec):
        x_past, x0 = init
        init = HistorySpec(x_past, x0, y)
    else:
        init = HistorySpec(init.x_past, init.x_at_zero, y)
    return simulate(VdpParams(J, tau, 0.0, 0.0), init, t_end, h, t_record)
