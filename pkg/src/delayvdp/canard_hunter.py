"""Locate canard explosions from the steady-state cycle amplitude."""

import enum
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .analysis import ClassifierConfig, CycleStats, classify, cycle_stats
from .dde_core import HistorySpec, VdpParams, equilibrium, simulate
from .errors import BracketError, ConvergenceError, DelayVdpError, DomainError, InsufficientDataError
from .small_delay import ode_simulate

__all__ = [
    "Param",
    "Model",
    "CycleStats",
    "ExplosionBracket",
    "SweepPoint",
    "steady_trajectory",
    "steady_cycle",
    "bisect_explosion",
    "sweep",
    "write_sweep_csv",
]

SMALL_AMP = 1.0
LARGE_AMP = 3.0
KICK = 0.1
MAX_ITER = 200


class Param(str, enum.Enum):
    TAU = "tau"
    A = "a"


class Model(str, enum.Enum):
    DDE = "dde"
    ODE = "ode"


@dataclass(frozen=True)
class ExplosionBracket:
    """Parameter interval across which the amplitude jumps.

    ``lo < hi`` always; ``small_side`` says which end carries the small
    amplitude ("lo" for tau, typically "hi" for a). ``converged`` is False
    when amplitudes between the thresholds occupy more than ``width_goal``.
    """

    param_name: Param
    lo: float
    hi: float
    amp_lo: float
    amp_hi: float
    iterations: int
    small_side: str = "lo"
    converged: bool = True
    params: dict = field(default_factory=dict)

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def center(self):
        return 0.5 * (self.lo + self.hi)

    def to_json(self):
        d = asdict(self)
        d["param_name"] = self.param_name.value
        d["width"] = self.width
        d["center"] = self.center
        return json.dumps(_round17(d), indent=2)


@dataclass(frozen=True)
class SweepPoint:
    value: float
    stats: CycleStats | None
    label: str
    error: str | None = None


def _round17(obj):
    if isinstance(obj, float):
        return float(f"{obj:.17g}")
    if isinstance(obj, dict):
        return {k: _round17(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round17(v) for v in obj]
    return obj


def default_times(p, model=Model.DDE):
    """Transient 50/eps and window 20/eps in the model's time unit."""
    eps = p.eps
    if Model(model) is Model.ODE:
        eps = p.eps * (1.0 - p.J * p.tau)
    if not eps > 0:
        raise DomainError("default transient needs eps > 0; pass transient and window explicitly")
    return 50.0 / eps, 20.0 / eps


def steady_trajectory(p, transient=None, window=None, h=None, model=Model.DDE, kick=KICK):
    """Post-transient trajectory started from the equilibrium with x kicked by ``kick``."""
    model = Model(model)
    dt, dw = default_times(p, model) if transient is None or window is None else (None, None)
    transient = dt if transient is None else transient
    window = dw if window is None else window
    if transient < 0 or not window > 0:
        raise DomainError(f"need transient >= 0 and window > 0, got {transient}, {window}")
    xe, ye = equilibrium(p)
    t_end = transient + window
    if model is Model.DDE:
        return simulate(p, HistorySpec(xe, xe + kick, ye), t_end, h, t_record=transient)
    return ode_simulate(p, (xe + kick, ye), t_end, h).window(transient)


def steady_cycle(p, transient=None, window=None, h=None, model=Model.DDE, kick=KICK):
    """CycleStats over the measurement window after the transient."""
    return cycle_stats(steady_trajectory(p, transient, window, h, model, kick))


def _probe(base, param, value, **kw):
    return steady_cycle(base.replace(**{param.value: value}), **kw).amplitude


def bisect_explosion(base, param, lo, hi, small_amp=SMALL_AMP, large_amp=LARGE_AMP,
                     width_goal=1e-9, max_iter=MAX_ITER, **kw):
    """Bisect the control parameter across the small-to-large amplitude jump.

    Probes with amplitude between the thresholds are sent to the large side
    first, which locates the point where the amplitude leaves the small
    range. If the amplitude there has not yet reached ``large_amp``, a second
    bisection (intermediate probes to the small side) locates where it
    reaches the large range, so the returned bracket always satisfies
    amp(small end) <= small_amp and amp(large end) >= large_amp.

    Extra keyword arguments go to :func:`steady_cycle`.
    """
    param = Param(param)
    lo, hi = float(lo), float(hi)
    if not lo < hi:
        raise BracketError(f"need lo < hi, got {lo}, {hi}", (lo, hi))
    if not width_goal > 0:
        raise DomainError(f"width_goal must be positive, got {width_goal}")
    if not small_amp < large_amp:
        raise DomainError("need small_amp < large_amp")
    a_lo = _probe(base, param, lo, **kw)
    a_hi = _probe(base, param, hi, **kw)
    if a_lo <= small_amp and a_hi >= large_amp:
        small_side = "lo"
        s, l, a_s, a_l = lo, hi, a_lo, a_hi
    elif a_hi <= small_amp and a_lo >= large_amp:
        small_side = "hi"
        s, l, a_s, a_l = hi, lo, a_hi, a_lo
    else:
        raise BracketError(
            f"amplitudes {a_lo:.6g} at {lo} and {a_hi:.6g} at {hi} do not straddle "
            f"[{small_amp}, {large_amp}]", (lo, hi))

    it = 0
    # phase 1: boundary of the small range
    l1, a_l1 = l, a_l
    while abs(l1 - s) > width_goal and it < max_iter:
        mid = 0.5 * (s + l1)
        if mid in (s, l1):
            break
        am = _probe(base, param, mid, **kw)
        it += 1
        if am <= small_amp:
            s, a_s = mid, am
        else:
            l1, a_l1 = mid, am
    # phase 2: boundary of the large range, between l1 and the original large end
    l2, a_l2 = l, a_l
    if a_l1 >= large_amp:
        l2, a_l2 = l1, a_l1
    else:
        m1 = l1
        while abs(l2 - m1) > width_goal and it < max_iter:
            mid = 0.5 * (m1 + l2)
            if mid in (m1, l2):
                break
            am = _probe(base, param, mid, **kw)
            it += 1
            if am >= large_amp:
                l2, a_l2 = mid, am
            else:
                m1 = mid
    if small_side == "lo":
        out_lo, out_hi, amp_lo, amp_hi = s, l2, a_s, a_l2
    else:
        out_lo, out_hi, amp_lo, amp_hi = l2, s, a_l2, a_s
    params = {"J": base.J, "tau": base.tau, "a": base.a, "eps": base.eps}
    params[param.value] = None  # the bisected parameter
    params.update({"search_lo": lo, "search_hi": hi, "small_amp": small_amp,
                   "large_amp": large_amp, "width_goal": width_goal, "inner": l1})
    params.update({k: (v.value if isinstance(v, enum.Enum) else v) for k, v in kw.items()})
    br = ExplosionBracket(param, out_lo, out_hi, amp_lo, amp_hi, it, small_side,
                          out_hi - out_lo <= width_goal, params)
    if it >= max_iter and not br.converged:
        err = ConvergenceError(f"iteration cap {max_iter} reached; best bracket [{out_lo}, {out_hi}]")
        err.bracket = br
        raise err
    return br


def _sweep_one(args):
    base, param, value, kw, config = args
    try:
        p = base.replace(**{param.value: value})
        traj = steady_trajectory(p, **kw)
        stats = cycle_stats(traj)
        try:
            label = classify(traj, config=config).label.value
        except InsufficientDataError:
            label = "unclassified"
        return SweepPoint(value, stats, label)
    except DelayVdpError as exc:
        return SweepPoint(value, None, "error", f"{type(exc).__name__}: {exc}")


def sweep(base, param, values, jobs=1, config=ClassifierConfig(), **kw):
    """One steady_cycle (plus a regime label) per parameter value.

    Points are independent; errors are recorded per point and the sweep
    continues. ``jobs > 1`` evaluates points in worker processes.
    """
    param = Param(param)
    tasks = [(base, param, float(v), kw, config) for v in np.asarray(values, dtype=float).ravel()]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_sweep_one, tasks))
    return [_sweep_one(t) for t in tasks]


def write_sweep_csv(points, path_or_buf, comments=()):
    """CSV with header ``param_value,amplitude,period,label``."""
    lines = [f"# {c}" for c in comments] + ["param_value,amplitude,period,label"]
    for pt in points:
        amp = "nan" if pt.stats is None else f"{pt.stats.amplitude:.17g}"
        per = "nan" if pt.stats is None or pt.stats.period is None else f"{pt.stats.period:.17g}"
        lines.append(f"{pt.value:.17g},{amp},{per},{pt.label}")
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_buf, "write"):
        path_or_buf.write(text)
    else:
        with open(path_or_buf, "w") as fh:
            fh.write(text)
