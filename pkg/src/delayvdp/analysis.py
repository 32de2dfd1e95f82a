"""Poincare sections, return maps, period detection and regime labels."""

import enum
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .dde_core import hermite
from .errors import DomainError, InsufficientDataError

__all__ = [
    "Variable",
    "Direction",
    "SectionDef",
    "RegimeLabel",
    "CycleStats",
    "Classification",
    "ClassifierConfig",
    "poincare_crossings",
    "section_values",
    "return_map",
    "write_return_map_csv",
    "detect_period",
    "cluster_count",
    "cycle_stats",
    "burst_epochs",
    "classify",
]

_BISECT_ITERS = 60


class Variable(str, enum.Enum):
    X = "x"
    Y = "y"

    @property
    def column(self):
        return 0 if self is Variable.X else 1


class Direction(str, enum.Enum):
    UP = "up"
    DOWN = "down"
    BOTH = "both"


@dataclass(frozen=True)
class SectionDef:
    variable: Variable = Variable.Y
    level: float = 0.0
    direction: Direction = Direction.UP

    def __post_init__(self):
        object.__setattr__(self, "variable", Variable(self.variable))
        object.__setattr__(self, "direction", Direction(self.direction))


class RegimeLabel(str, enum.Enum):
    EQUILIBRIUM = "equilibrium"
    SMALL_CYCLE = "small_cycle"
    CANARD = "canard"
    RELAXATION = "relaxation"
    MMO = "mmo"
    BURST = "burst"
    CHAOTIC = "chaotic"


@dataclass(frozen=True)
class CycleStats:
    """Steady-state summary of an orbit.

    ``amplitude`` is max x - min x over the measured window, ``period`` the
    mean return time to the x-midrange section (None if not periodic).
    """

    amplitude: float
    period: float | None
    maxima_values: np.ndarray
    maxima_count_per_period: int | None
    crossings: int = 0
    crossing_period: int | None = None
    last_crossing: float | None = None

    def __post_init__(self):
        if not self.amplitude >= 0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")
        if self.period is not None and not self.period > 0:
            raise ValueError(f"period must be > 0, got {self.period}")


@dataclass(frozen=True)
class ClassifierConfig:
    """Thresholds of the regime decision tree.

    Spikes are local maxima of x with prominence >= ``spike_prominence``
    times the amplitude; small maxima are those with prominence in
    [``small_prominence``, ``spike_prominence``) times the amplitude.
    """

    equilibrium_amp: float = 1e-3
    small_amp: float = 1.0
    large_amp: float = 3.0
    spike_prominence: float = 0.5
    small_prominence: float = 0.01
    burst_min_spikes: int = 3
    quiescence_factor: float = 3.0
    period_tol: float = 1e-4
    max_period: int = 16
    chaos_min_crossings: int = 50


@dataclass(frozen=True)
class Classification:
    label: RegimeLabel
    stats: CycleStats
    assumptions: tuple = ()

    def to_json(self):
        s = self.stats
        return json.dumps({
            "label": self.label.value,
            "amplitude": float(f"{s.amplitude:.17g}"),
            "period": None if s.period is None else float(f"{s.period:.17g}"),
            "maxima_count": s.maxima_count_per_period,
            "assumptions": list(self.assumptions),
        }, indent=2)


def _discard_index(traj, discard):
    if discard < 0:
        raise DomainError(f"discard must be >= 0, got {discard}")
    k = int(np.searchsorted(traj.times, traj.times[0] + discard - 1e-9 * traj.step))
    if k >= len(traj.times) - 1:
        raise DomainError(f"discard={discard} leaves fewer than 2 samples")
    return k


def poincare_crossings(traj, s, discard=0.0):
    """Crossings of a section, located by Hermite root refinement.

    Returns an array of shape (k, 3) with columns (t, x, y), t increasing.
    An upward crossing is a step with v - level < 0 at its start and >= 0
    at its end.
    """
    k0 = _discard_index(traj, discard)
    c = s.variable.column
    v = traj.states[k0:, c] - s.level
    a, b = v[:-1], v[1:]
    up = (a < 0) & (b >= 0)
    down = (a > 0) & (b <= 0)
    mask = {Direction.UP: up, Direction.DOWN: down, Direction.BOTH: up | down}[s.direction]
    idx = np.flatnonzero(mask) + k0
    if idx.size == 0:
        return np.empty((0, 3))
    h = traj.step
    p0, p1 = traj.states[idx], traj.states[idx + 1]
    d0, d1 = traj.derivs[idx], traj.derivs[idx + 1]
    rising = traj.states[idx + 1, c] > traj.states[idx, c]
    lo = np.zeros(idx.size)
    hi = np.ones(idx.size)
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        val = hermite(mid, h, p0[:, c], p1[:, c], d0[:, c], d1[:, c]) - s.level
        go_right = (val < 0) == rising
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
    theta = np.where(
        np.abs(hermite(hi, h, p0[:, c], p1[:, c], d0[:, c], d1[:, c]) - s.level)
        <= np.abs(hermite(lo, h, p0[:, c], p1[:, c], d0[:, c], d1[:, c]) - s.level), hi, lo)
    pts = hermite(theta[:, None], h, p0, p1, d0, d1)
    t = traj.times[idx] + theta * h
    return np.column_stack([t, pts])


def section_values(crossings, s):
    """Coordinate transverse to the section (x for a y-section and vice versa)."""
    crossings = np.asarray(crossings, dtype=float).reshape(-1, 3)
    return crossings[:, 2 if s.variable is Variable.X else 1]


def return_map(values):
    """Consecutive pairs (s_n, s_{n+1}) of section values."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size < 2:
        raise InsufficientDataError(f"return map needs >= 2 crossings, got {v.size}")
    return np.column_stack([v[:-1], v[1:]])


def write_return_map_csv(pairs, path_or_buf, comments=()):
    lines = [f"# {c}" for c in comments] + ["s_n,s_np1"]
    lines += [f"{p:.17g},{q:.17g}" for p, q in pairs]
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_buf, "write"):
        path_or_buf.write(text)
    else:
        with open(path_or_buf, "w") as fh:
            fh.write(text)


def detect_period(values, tol=1e-5, max_period=16):
    """Smallest p <= max_period with |s_{n+p} - s_n| <= tol over the tail.

    The tail is the last 3 * max_period values. Returns None if no such p.
    """
    v = np.asarray(values, dtype=float).ravel()
    if max_period < 1:
        raise DomainError(f"max_period must be >= 1, got {max_period}")
    need = 3 * max_period
    if v.size < need:
        raise InsufficientDataError(f"need >= {need} crossings for max_period={max_period}, got {v.size}")
    tail = v[-need:]
    for p in range(1, max_period + 1):
        if np.all(np.abs(tail[p:] - tail[:-p]) <= tol):
            return p
    return None


def cluster_count(values, tol):
    """Number of groups after merging sorted values closer than ``tol``."""
    v = np.sort(np.asarray(values, dtype=float).ravel())
    if v.size == 0:
        return 0
    return int(np.count_nonzero(np.diff(v) > tol) + 1)


def _maxima(x):
    # plateau-safe local maxima with their prominences
    idx, props = find_peaks(x, prominence=0.0)
    return idx, props["prominences"]


def cycle_stats(traj, discard=0.0, period_tol=None, max_period=16):
    """Amplitude, period and maxima of the orbit after ``discard`` time units.

    The period is measured on upward crossings of the x-midrange: the
    crossing pattern (y values at the crossings) must repeat with some
    p <= max_period, and the period is the mean return time over p crossings.
    """
    k0 = _discard_index(traj, discard)
    x = traj.states[k0:, 0]
    amp = float(x.max() - x.min())
    tol = 1e-4 * max(1.0, amp) if period_tol is None else period_tol
    sec = SectionDef(Variable.X, 0.5 * (x.max() + x.min()), Direction.UP)
    cr = poincare_crossings(traj, sec, discard) if amp > 0 else np.empty((0, 3))
    period = p = None
    n = len(cr)
    if n >= 3:
        mp = min(max_period, n // 3)
        p = detect_period(cr[:, 2], tol, mp)
        if p is not None:
            t = cr[:, 0]
            period = float((t[-1] - t[-1 - p * ((n - 1) // p)]) / ((n - 1) // p))
    idx, _ = _maxima(x)
    maxima = x[idx]
    per_period = None
    if period is not None:
        t = traj.times[k0:][idx]
        t_end = cr[-1, 0]
        per_period = int(np.count_nonzero((t >= t_end - period) & (t < t_end)))
    return CycleStats(amp, period, maxima, per_period, n, p, float(cr[-1, 0]) if n else None)


def burst_epochs(traj, discard=0.0, config=ClassifierConfig()):
    """Group spikes into epochs separated by quiescent gaps.

    Spikes are maxima of x with prominence >= spike_prominence * amplitude;
    a gap longer than quiescence_factor times the mean inter-spike
    interval ends an epoch. Returns a list of arrays of spike times.
    """
    k0 = _discard_index(traj, discard)
    x = traj.states[k0:, 0]
    amp = x.max() - x.min()
    if amp <= 0:
        return []
    idx, prom = _maxima(x)
    t = traj.times[k0:][idx[prom >= config.spike_prominence * amp]]
    if t.size < 2:
        return [t] if t.size else []
    isi = np.diff(t)
    cut = np.flatnonzero(isi > config.quiescence_factor * isi.mean())
    return np.split(t, cut + 1)


def _is_burst(epochs, config):
    if len(epochs) < 3:
        return False
    # the first and last epochs may be clipped by the window
    inner = epochs[1:-1]
    return all(len(e) >= config.burst_min_spikes for e in inner)


def _maxima_last_period(traj, k0, stats, config):
    """(small, large) maxima counts inside the last full period.

    Prominences are taken over the whole window, so peaks near the window
    start (whose bases are cut off) do not enter the count.
    """
    x = traj.states[k0:, 0]
    t = traj.times[k0:]
    amp = stats.amplitude
    idx, prom = _maxima(x)
    t_end = stats.last_crossing
    sel = (t[idx] >= t_end - stats.period) & (t[idx] < t_end)
    prom = prom[sel]
    small = (prom >= config.small_prominence * amp) & (prom < config.spike_prominence * amp)
    large = prom >= config.spike_prominence * amp
    return int(small.sum()), int(large.sum())


def classify(traj, discard=0.0, config=ClassifierConfig(), assumptions=()):
    """Label the regime of a trajectory after ``discard`` time units.

    Decision order: equilibrium (amplitude below ``equilibrium_amp``), burst,
    then on a periodic orbit small_cycle / canard / mmo / relaxation by
    amplitude and the presence of small maxima, and chaotic for a
    non-periodic orbit with at least ``chaos_min_crossings`` crossings.
    Raises InsufficientDataError when none of these can be decided.
    """
    k0 = _discard_index(traj, discard)
    stats = cycle_stats(traj, discard, config.period_tol * max(1.0, np.ptp(traj.states[k0:, 0])),
                        config.max_period)
    amp = stats.amplitude
    notes = tuple(assumptions) + (
        f"small/large amplitude thresholds {config.small_amp}/{config.large_amp}",
        f"spikes: prominence >= {config.spike_prominence} * amplitude",
        f"burst: >= {config.burst_min_spikes} spikes per epoch, quiescence >= "
        f"{config.quiescence_factor} * mean inter-spike interval",
    )

    def out(label):
        return Classification(label, stats, notes)

    if amp < config.equilibrium_amp:
        return out(RegimeLabel.EQUILIBRIUM)
    if amp > config.small_amp and _is_burst(burst_epochs(traj, discard, config), config):
        return out(RegimeLabel.BURST)
    periodic = stats.period is not None
    if periodic:
        if amp < config.small_amp:
            return out(RegimeLabel.SMALL_CYCLE)
        if amp <= config.large_amp:
            return out(RegimeLabel.CANARD)
        n_small, n_large = _maxima_last_period(traj, k0, stats, config)
        if n_small and n_large:
            return out(RegimeLabel.MMO)
        return out(RegimeLabel.RELAXATION)
    if stats.crossings >= config.chaos_min_crossings:
        return out(RegimeLabel.CHAOTIC)
    raise InsufficientDataError(
        f"orbit is not periodic within tolerance and has only {stats.crossings} "
        f"crossings (< {config.chaos_min_crossings}); extend the trajectory"
    )
