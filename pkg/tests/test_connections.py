import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from delayvdp.connections import (
    Side,
    Target,
    connection_grid,
    lyapunov_monitor,
    potential,
    psi,
    trap_region,
    verify_connection,
    write_connection_csv,
)
from delayvdp.critical_manifold import BranchId, branch_x
from delayvdp.dde_core import simulate_fast
from delayvdp.errors import DomainError


def test_psi_values():
    assert psi(1.5, 0.0) == 0.0
    assert psi(2.0, -1.0) == pytest.approx(4 / 3, rel=1e-15)
    for beta in (1.1, 1.5, 1.9, 2.0):
        zm = 1 - beta
        d = (psi(beta, zm + 1e-6) - psi(beta, zm - 1e-6)) / 2e-6
        assert abs(d) <= 1e-8
        assert psi(beta, zm) == pytest.approx((beta - 1) ** 2 * (beta + 2) / 3, rel=1e-13)


def test_potential():
    assert potential(1.7, 0.0) == 0.0
    zs = np.linspace(-2, 2, 100)
    for beta in (1.2, 1.8):
        dv = (potential(beta, zs + 1e-6) - potential(beta, zs - 1e-6)) / 2e-6
        np.testing.assert_allclose(dv, -psi(beta, zs), atol=1e-8)
    num, _ = quad(lambda z: -psi(2.0, z), 0.0, -1.0, epsabs=1e-14)
    assert potential(2.0, -1.0) == pytest.approx(num, abs=1e-10)


@given(st.floats(-0.66, 0.66), st.floats(-3, 3))
def test_psi_is_translated_fast_field(y, x):
    beta = branch_x(BranchId.UPPER, y)
    assert psi(beta, x - beta) == pytest.approx(x - x**3 / 3 + y, abs=1e-12)


def test_trap_region():
    t = trap_region(2, 0.2, 0.0)
    assert t.rho == pytest.approx(2 / 3)
    assert t.beta == pytest.approx(math.sqrt(3))
    near_top = trap_region(2, 0.2, 2 / 3 - 1e-12)
    assert near_top.beta == pytest.approx(2.0, abs=1e-5)
    assert near_top.z_max == pytest.approx(-1.0, abs=1e-5)
    assert near_top.psi_max == pytest.approx(4 / 3, abs=1e-5)
    near_fold = trap_region(2, 0.2, -2 / 3 + 1e-12)
    assert near_fold.beta == pytest.approx(1.0, abs=1e-5)
    assert near_fold.psi_max == pytest.approx(0.0, abs=1e-10)
    with pytest.raises(DomainError):
        trap_region(2, 0.25, 0.0)
    with pytest.raises(DomainError):
        trap_region(2, 0.2, 0.7)


@pytest.mark.parametrize(
    "J,tau,y,side,target",
    [(2, 0.3, 0.0, "plus", Target.UPPER), (2, 0.3, 0.6, "plus", Target.UPPER),
     (2, 0.0, 0.0, "minus", Target.LOWER), (2, 0.3, -0.5, "minus", Target.LOWER)],
)
def test_verify_connection_examples(J, tau, y, side, target):
    rep = verify_connection(J, tau, y, side)
    assert rep.target is target
    assert rep.final_distance <= 1e-6
    assert 0 < rep.hit_time < 200


def test_connection_timeout():
    rep = verify_connection(2, 0.3, 0.0, Side.PLUS, t_max=1.0)
    assert rep.target is Target.NONE
    assert math.isnan(rep.hit_time)


def test_conjectured_regime_still_reports():
    # J tau in [1/2, 1): outside the proved range, reported empirically
    rep = verify_connection(2, 0.4, 0.2, Side.PLUS)
    assert rep.target is Target.UPPER


def test_connection_symmetry():
    a = verify_connection(2, 0.2, 0.3, Side.PLUS)
    b = verify_connection(2, 0.2, -0.3, Side.MINUS)
    assert a.target is Target.UPPER and b.target is Target.LOWER
    assert a.hit_time == b.hit_time


def test_lyapunov_monitor_trap():
    y = 0.0
    trap = trap_region(2, 0.2, y)
    x0 = branch_x(BranchId.MIDDLE, y)
    tr = simulate_fast(2, 0.2, y, (x0, x0 + 0.01), 200.0)
    mon = lyapunov_monitor(tr, trap.beta, trap)
    assert mon.first_entry is not None and mon.first_entry > 0
    assert mon.absorbing
    assert abs(tr.x[-1] - trap.beta) <= 1e-6


def test_lyapunov_monitor_starting_inside():
    trap = trap_region(2, 0.2, 0.2)
    start = trap.beta + 0.05
    assert trap.contains(0.05)
    tr = simulate_fast(2, 0.2, 0.2, (start, start), 50.0)
    mon = lyapunov_monitor(tr, trap.beta, trap)
    assert mon.first_entry == 0.0 and mon.absorbing


def test_potential_decreases_without_delay():
    y = 0.1
    trap = trap_region(2, 0.0, y)
    x0 = branch_x(BranchId.MIDDLE, y)
    tr = simulate_fast(2, 0.0, y, (x0, x0 + 0.01), 30.0)
    mon = lyapunov_monitor(tr, trap.beta, trap)
    moving = np.abs(tr.x[:-1] - trap.beta) > 1e-6
    assert np.all(np.diff(mon.V)[moving] < 0)


def test_lyapunov_monitor_refuses_invalid_rho():
    from delayvdp.connections import TrapRegion

    bad = TrapRegion(1.7, -0.7, 0.6, 1.5)
    tr = simulate_fast(2, 0.3, 0.0, (0.0, 0.01), 1.0)
    with pytest.raises(DomainError):
        lyapunov_monitor(tr, 1.7, bad)


def test_grid_and_csv():
    rows = connection_grid(2, [0.1, 0.2], [0.0, 0.3], sides=("plus", "minus"))
    assert len(rows) == 8
    buf = io.StringIO()
    write_connection_csv(rows, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "J,tau,y,side,target,hit_time"
    assert lines[1].startswith("2,0.10000000000000001,0,plus,upper,")


def test_trap_is_empty_without_delay():
    # rho = 0 makes the strict condition |psi| < psi_max * rho unsatisfiable;
    # the orbit still converges, the region just carries no information
    y = 0.0
    trap = trap_region(2, 0.0, y)
    assert trap.rho == 0.0
    x0 = branch_x(BranchId.MIDDLE, y)
    tr = simulate_fast(2, 0.0, y, (x0, x0 + 0.01), 200.0)
    mon = lyapunov_monitor(tr, trap.beta, trap)
    assert mon.first_entry is None and not mon.in_trap.any()
    assert abs(tr.x[-1] - trap.beta) <= 1e-6
