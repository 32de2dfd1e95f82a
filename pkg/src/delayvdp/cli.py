"""Command-line front end: ``delayvdp <command> [options]``.

Exit codes: 0 success, 1 usage error, 2 numerical or domain failure.
Options may also come from ``--config FILE`` holding ``key = value`` lines
(keys spelled like the long options, with or without leading dashes);
command-line flags take precedence over the file, which takes precedence
over the built-in defaults.
"""

import argparse
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .analysis import SectionDef, classify, poincare_crossings, return_map, section_values
from .canard_hunter import (
    Model,
    Param,
    bisect_explosion,
    steady_trajectory,
    sweep,
    write_sweep_csv,
)
from .connections import Side, connection_grid, write_connection_csv
from .critical_manifold import BranchId, branch_x
from .dde_core import HistorySpec, Trajectory, VdpParams, equilibrium, simulate, simulate_fast
from .errors import DelayVdpError
from .rates import rate_profile, tau_star
from .small_delay import coeffs, genericity_report, ode_simulate, tau_c_leading
from .spectral import bt_residuals, hopf_frequency, rightmost_roots

__all__ = ["run", "main", "build_parser"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _floats(text):
    try:
        return [float(v) for v in str(text).replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.17g}"
    if isinstance(v, list):
        return ",".join(_fmt(u) for u in v)
    return str(v)


def _provenance(args):
    """Comment lines that reproduce the invocation from the resolved options."""
    opts = []
    for k, v in sorted(vars(args).items()):
        if k in ("command", "func", "config", "out") or v is None:
            continue
        flag = "--" + k.replace("_", "-")
        opts.append(f"{flag} {_fmt(v)}")
    return [f"delayvdp {__version__}", f"command: {args.command} " + " ".join(opts)]


def _emit(args, text, summary):
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
        print(summary)
    else:
        sys.stdout.write(text)


def _csv_text(writer, *a, **kw):
    buf = io.StringIO()
    writer(*a, buf, **kw)
    return buf.getvalue()


def _params(args):
    return VdpParams(args.J, args.tau, args.a, args.eps)


def _json(obj):
    def conv(o):
        if isinstance(o, float):
            if not math.isfinite(o):
                return None
            return float(f"{o:.17g}")
        if isinstance(o, dict):
            return {k: conv(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [conv(v) for v in o]
        return o
    return json.dumps(conv(obj), indent=2) + "\n"


# ---- commands ---------------------------------------------------------------

def cmd_simulate(args):
    p = _params(args)
    xe, ye = equilibrium(p)
    x_past = xe if args.x_past is None else args.x_past
    x0 = (xe + args.kick) if args.x0 is None else args.x0
    y0 = ye if args.y0 is None else args.y0
    tr = simulate(p, HistorySpec(x_past, x0, y0), args.t_end, args.h, args.t_record)
    tr = _stride(tr, args.stride)
    text = _csv_text(lambda t, f: t.to_csv(f, _provenance(args)), tr)
    _emit(args, text, f"simulate: {len(tr)} samples, x(t_end)={tr.x[-1]:.17g}")
    return 0


def _stride(tr, k):
    if k <= 1:
        return tr
    return Trajectory(tr.step * k, tr.times[::k], tr.states[::k], tr.derivs[::k], dict(tr.meta))


def cmd_fast_sim(args):
    tr = simulate_fast(args.J, args.tau, args.y, (args.x_past, args.x0), args.t_end, args.h)
    tr = _stride(tr, args.stride)
    text = _csv_text(lambda t, f: t.to_csv(f, _provenance(args)), tr)
    _emit(args, text, f"fast-sim: {len(tr)} samples, x(t_end)={tr.x[-1]:.17g}")
    return 0


def cmd_roots(args):
    if args.x_star is None:
        if args.y is None:
            raise UsageError("roots: give --x-star or --y with --branch")
        x_star = branch_x(BranchId(args.branch), args.y)
    else:
        x_star = args.x_star
    roots = rightmost_roots(args.J, args.tau, x_star, args.n)
    zeta = hopf_frequency(args.J, args.tau)
    d0, dp = bt_residuals(args.J, args.tau)
    lines = [f"# {c}" for c in _provenance(args)]
    lines.append(f"# x_star={x_star:.17g}")
    lines.append(f"# hopf_zeta={'none' if zeta is None else f'{zeta.zeta:.17g}'}")
    lines.append(f"# bt_delta0={d0:.17g} bt_delta_prime0={dp:.17g}")
    lines.append("re,im,branch_index,residual")
    for r in roots:
        lines.append(f"{r.value.real:.17g},{r.value.imag:.17g},{r.branch_index},{r.residual:.17g}")
    lead = roots[0].value
    _emit(args, "\n".join(lines) + "\n", f"roots: leading {lead.real:.17g}{lead.imag:+.17g}j")
    return 0


def cmd_rates(args):
    prof = rate_profile(args.J, args.tau, args.a, n=args.n)
    buf = io.StringIO()
    for c in _provenance(args):
        buf.write(f"# {c}\n")
    prof.to_csv(buf)
    m = prof.margin
    _emit(args, buf.getvalue(),
          f"rates: min(R_np - R_p) = {m.min():.6g} at y* = {prof.y_grid[int(np.argmin(m))]:.6g}")
    return 0


def cmd_tau_star(args):
    ts = tau_star(args.J, args.a, (args.lo, args.hi), args.grid_n, args.tol)
    out = {"tau_star": ts, "J": args.J, "a": args.a, "bracket": [args.lo, args.hi],
           "grid_n": args.grid_n, "tol": args.tol, "provenance": _provenance(args)}
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(_json(out))
    print(f"{ts:.17g}")
    return 0


def cmd_connection(args):
    rows = connection_grid(args.J, args.tau, args.y, [Side(s) for s in args.sides.split(",")],
                           t_max=args.t_max, tol=args.tol, kick=args.kick)
    text = _csv_text(write_connection_csv, rows)
    text = "".join(f"# {c}\n" for c in _provenance(args)) + text
    n_ok = sum(r[-1].target.value != "none" for r in rows)
    _emit(args, text, f"connection: {n_ok}/{len(rows)} runs reached an outer branch")
    return 0


def _hunter_kw(args):
    return {"model": Model(args.model), "transient": args.transient, "window": args.window,
            "h": args.h, "kick": args.kick}


def cmd_bisect(args):
    base = _params(args)
    br = bisect_explosion(base, Param(args.param), args.lo, args.hi, args.small_amp,
                          args.large_amp, args.width, **_hunter_kw(args))
    d = json.loads(br.to_json())
    d["provenance"] = _provenance(args)
    _emit(args, _json(d), f"bisect-canard: [{br.lo:.17g}, {br.hi:.17g}] width {br.width:.3g}")
    return 0


def cmd_sweep(args):
    base = _params(args)
    if args.values is not None:
        values = args.values
    else:
        values = np.linspace(args.start, args.stop, args.num).tolist()
    pts = sweep(base, Param(args.param), values, jobs=args.jobs, **_hunter_kw(args))
    text = _csv_text(write_sweep_csv, pts, comments=_provenance(args))
    n_err = sum(p.error is not None for p in pts)
    for p in pts:
        if p.error:
            print(f"sweep: {args.param}={p.value:.17g}: {p.error}", file=sys.stderr)
    _emit(args, text, f"sweep: {len(pts)} points, {n_err} errors")
    return 0


def cmd_ode_approx(args):
    p = _params(args)
    xe, ye = equilibrium(p)
    x0 = (xe + args.kick) if args.x0 is None else args.x0
    y0 = ye if args.y0 is None else args.y0
    tr = _stride(ode_simulate(p, (x0, y0), args.t_end, args.h, args.time), args.stride)
    text = _csv_text(lambda t, f: t.to_csv(f, _provenance(args)), tr)
    _emit(args, text, f"ode-approx: {len(tr)} samples, x(end)={tr.x[-1]:.17g}")
    return 0


def cmd_classify(args):
    p = _params(args)
    eps = p.eps if p.eps > 0 else 1.0
    transient = args.transient if args.transient is not None else 75.0 / eps
    window = args.window if args.window is not None else 75.0 / eps
    tr = steady_trajectory(p, transient, window, args.h, Model.DDE, args.kick)
    assumptions = [f"eps={p.eps!r} as supplied"]
    c = classify(tr, assumptions=assumptions)
    d = json.loads(c.to_json())
    if args.section_level is not None:
        sec = SectionDef("y", args.section_level, "up")
        v = section_values(poincare_crossings(tr, sec), sec)
        d["section_values"] = v.tolist()
        if v.size >= 2:
            d["return_map"] = return_map(v).tolist()
    d["provenance"] = _provenance(args)
    _emit(args, _json(d), f"classify: {c.label.value} (amplitude {c.stats.amplitude:.6g})")
    return 0


def cmd_coeffs(args):
    c = coeffs(args.J, args.tau, args.eps)
    d = {"eps_tilde": c.eps_tilde, "a_tilde_c": c.a_tilde_c, "a_c": c.a_c, "a1": c.a1}
    if args.a is not None:
        try:
            d["tau_c_leading"] = tau_c_leading(args.J, args.eps, args.a)
        except DelayVdpError as exc:
            d["tau_c_leading"] = None
            d["tau_c_leading_error"] = str(exc)
    d["genericity"] = [
        {"condition": g.condition, "location": g.location, "value": g.value,
         "expected": g.expected, "passes": g.passes}
        for g in genericity_report(args.J, args.tau)
    ]
    d["provenance"] = _provenance(args)
    _emit(args, _json(d), f"coeffs: a_c={c.a_c:.17g} a1={c.a1:.17g}")
    return 0


# ---- parser -------------------------------------------------------------------

def _common(sp, out=True):
    sp.add_argument("--config", help="key = value file with defaults for this command")
    if out:
        sp.add_argument("--out", help="output file (default: stdout)")


def _vdp(sp, tau=0.3, a=1.0, eps=0.05):
    sp.add_argument("--J", type=float, default=2.0, help="coupling (default 2)")
    sp.add_argument("--tau", type=float, default=tau, help=f"delay (default {tau})")
    sp.add_argument("--a", type=float, default=a, help=f"input (default {a})")
    sp.add_argument("--eps", type=float, default=eps, help=f"timescale ratio (default {eps})")


def _hunter_opts(sp):
    sp.add_argument("--model", choices=[m.value for m in Model], default="dde")
    sp.add_argument("--transient", type=float, default=None, help="default 50/eps")
    sp.add_argument("--window", type=float, default=None, help="default 20/eps")
    sp.add_argument("--h", type=float, default=None, help="step (default min(tau/8, eps/50, 1e-3))")
    sp.add_argument("--kick", type=float, default=0.1, help="x offset from equilibrium at t=0")


def build_parser():
    p = _Parser(prog="delayvdp", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"delayvdp {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    sp = sub.add_parser("simulate", help="integrate the delayed system, CSV t,x,y")
    _common(sp)
    _vdp(sp)
    sp.add_argument("--t-end", type=float, default=200.0)
    sp.add_argument("--h", type=float, default=None, help="step (default min(tau/8, eps/50, 1e-3))")
    sp.add_argument("--t-record", type=float, default=0.0, help="drop samples before this time")
    sp.add_argument("--x-past", type=float, default=None, help="history value (default equilibrium)")
    sp.add_argument("--x0", type=float, default=None, help="x(0) (default equilibrium + kick)")
    sp.add_argument("--y0", type=float, default=None, help="y(0) (default equilibrium)")
    sp.add_argument("--kick", type=float, default=0.0)
    sp.add_argument("--stride", type=int, default=1, help="write every k-th sample")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("fast-sim", help="fast subsystem with frozen y, CSV t,x,y")
    _common(sp)
    sp.add_argument("--J", type=float, default=2.0)
    sp.add_argument("--tau", type=float, default=0.3)
    sp.add_argument("--y", type=float, default=0.0)
    sp.add_argument("--x-past", type=float, default=0.0)
    sp.add_argument("--x0", type=float, default=0.01)
    sp.add_argument("--t-end", type=float, default=50.0)
    sp.add_argument("--h", type=float, default=None)
    sp.add_argument("--stride", type=int, default=1)
    sp.set_defaults(func=cmd_fast_sim)

    sp = sub.add_parser("roots", help="rightmost characteristic roots at a fast equilibrium")
    _common(sp)
    sp.add_argument("--J", type=float, default=2.0)
    sp.add_argument("--tau", type=float, default=0.3)
    sp.add_argument("--x-star", type=float, default=None)
    sp.add_argument("--y", type=float, default=None, help="slow value (with --branch)")
    sp.add_argument("--branch", choices=[b.value for b in BranchId], default="upper")
    sp.add_argument("--n", type=int, default=6, help="number of roots")
    sp.set_defaults(func=cmd_roots)

    sp = sub.add_parser("rates", help="rate integrals on a y* grid, CSV y_star,R_np,R_nm,R_p")
    _common(sp)
    sp.add_argument("--J", type=float, default=2.0)
    sp.add_argument("--tau", type=float, default=0.3)
    sp.add_argument("--a", type=float, default=1.0)
    sp.add_argument("--n", type=int, default=50, help="interior grid points")
    sp.set_defaults(func=cmd_rates)

    sp = sub.add_parser("tau-star", help="delay where R_np > R_p first fails")
    _common(sp)
    sp.add_argument("--J", type=float, default=2.0)
    sp.add_argument("--a", type=float, default=1.0)
    sp.add_argument("--lo", type=float, default=0.30)
    sp.add_argument("--hi", type=float, default=0.40)
    sp.add_argument("--grid-n", type=int, default=50)
    sp.add_argument("--tol", type=float, default=1e-3)
    sp.set_defaults(func=cmd_tau_star)

    sp = sub.add_parser("connection", help="saddle-to-sink connections on a (tau, y) grid")
    _common(sp)
    sp.add_argument("--J", type=float, default=2.0)
    sp.add_argument("--tau", type=_floats, default="0.3", help="comma-separated delays")
    sp.add_argument("--y", type=_floats, default="0", help="comma-separated slow values")
    sp.add_argument("--sides", default="plus,minus")
    sp.add_argument("--t-max", type=float, default=200.0)
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--kick", type=float, default=0.01)
    sp.set_defaults(func=cmd_connection)

    sp = sub.add_parser("bisect-canard", help="bracket the canard explosion, JSON")
    _common(sp)
    _vdp(sp, tau=0.0, a=0.995)
    sp.add_argument("--param", choices=[q.value for q in Param], default="tau")
    sp.add_argument("--lo", type=float, required=False, default=0.01)
    sp.add_argument("--hi", type=float, required=False, default=0.12)
    sp.add_argument("--width", type=float, default=1e-9)
    sp.add_argument("--small-amp", type=float, default=1.0)
    sp.add_argument("--large-amp", type=float, default=3.0)
    _hunter_opts(sp)
    sp.set_defaults(func=cmd_bisect)

    sp = sub.add_parser("sweep", help="steady-cycle amplitude over parameter values, CSV")
    _common(sp)
    _vdp(sp, tau=0.0, a=0.995)
    sp.add_argument("--param", choices=[q.value for q in Param], default="tau")
    sp.add_argument("--values", type=_floats, default=None, help="comma-separated values")
    sp.add_argument("--start", type=float, default=0.01)
    sp.add_argument("--stop", type=float, default=0.12)
    sp.add_argument("--num", type=int, default=12)
    sp.add_argument("--jobs", type=int, default=1)
    _hunter_opts(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("ode-approx", help="small-delay ODE reduction, CSV t,x,y")
    _common(sp)
    _vdp(sp, tau=0.1, a=0.995)
    sp.add_argument("--t-end", type=float, default=1000.0)
    sp.add_argument("--h", type=float, default=None)
    sp.add_argument("--time", choices=["theta", "t"], default="theta")
    sp.add_argument("--x0", type=float, default=None)
    sp.add_argument("--y0", type=float, default=None)
    sp.add_argument("--kick", type=float, default=0.1)
    sp.add_argument("--stride", type=int, default=1)
    sp.set_defaults(func=cmd_ode_approx)

    sp = sub.add_parser("classify", help="regime label of the steady orbit, JSON")
    _common(sp)
    _vdp(sp, tau=0.4, a=1.0)
    sp.add_argument("--transient", type=float, default=None, help="default 75/eps")
    sp.add_argument("--window", type=float, default=None, help="default 75/eps")
    sp.add_argument("--h", type=float, default=None)
    sp.add_argument("--kick", type=float, default=0.1)
    sp.add_argument("--section-level", type=float, default=None,
                    help="also report upward crossings of y = level and their return map")
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("coeffs", help="small-delay canard coefficients and genericity checks, JSON")
    _common(sp)
    sp.add_argument("--J", type=float, default=2.0)
    sp.add_argument("--tau", type=float, default=0.25)
    sp.add_argument("--eps", type=float, default=0.05)
    sp.add_argument("--a", type=float, default=None, help="also solve for the leading-order canard delay")
    sp.set_defaults(func=cmd_coeffs)
    return p


def _read_config(path):
    out = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key = value")
            k, v = (s.strip() for s in line.split("=", 1))
            out[k.lstrip("-").replace("-", "_")] = v
    return out


def _apply_config(parser, argv):
    """Install config-file values as parser defaults for the chosen subcommand."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    cfg = _read_config(known.config)
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    cmd = next((a for a in argv if a in subparsers.choices), None)
    if cmd is None:
        return
    sp = subparsers.choices[cmd]
    dests = {a.dest: a for a in sp._actions}
    for k, v in cfg.items():
        if k not in dests or k in ("config", "help"):
            raise UsageError(f"config key {k!r} is not an option of {cmd}")
        act = dests[k]
        sp.set_defaults(**{k: act.type(v) if act.type else v})


def run(argv=None):
    """Run the CLI; returns the exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"usage error: cannot read config: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (DelayVdpError, ValueError, ArithmeticError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())
