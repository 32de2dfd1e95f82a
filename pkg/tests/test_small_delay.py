import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from delayvdp.dde_core import HistorySpec, VdpParams, simulate
from delayvdp.errors import BracketError, DomainError
from delayvdp.small_delay import coeffs, genericity_report, ode_simulate, tau_c_leading


def test_coeffs_examples():
    c = coeffs(2, 0.0, 0.05)
    assert c.eps_tilde == 0.05 and c.a_c == pytest.approx(0.99375) and c.a1 == 0.0
    assert coeffs(2, 0.25, 0.05).a1 == pytest.approx(0.125)
    near = coeffs(2, 0.5 - 1e-9, 0.05)
    assert near.a_tilde_c < 1e-9 and near.a1 > 1e7
    with pytest.raises(DomainError):
        coeffs(2, 0.5, 0.05)
    with pytest.raises(DomainError):
        coeffs(2, 0.1, -1.0)


@given(st.floats(0.1, 5.0), st.floats(0.0, 0.999), st.floats(0.0, 1.0))
def test_coeffs_invariants(J, u, eps):
    tau = u / J
    c = coeffs(J, tau, eps)
    assert c.a1 >= 0
    assert c.eps_tilde <= eps
    assert c.a_c == pytest.approx(1 - c.eps_tilde / 8)


def test_a1_increasing():
    taus = np.linspace(0, 0.4999, 200)
    a1 = [coeffs(2, t, 0.05).a1 for t in taus]
    assert np.all(np.diff(a1) > 0)


def test_tau_c_leading():
    assert tau_c_leading(2, 0.05, 0.995) == pytest.approx(0.1)
    assert tau_c_leading(2, 0.05, 1 - 0.05 / 8) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(BracketError):
        tau_c_leading(2, 0.05, 1.0 - 0.01)
    with pytest.raises(BracketError):
        tau_c_leading(2, 0.05, 1.001)


def test_tau_c_leading_at_a_one_is_bt_point():
    # a -> 1 drives the leading-order canard delay to 1/J
    assert tau_c_leading(2, 0.05, 1.0) == pytest.approx(0.5)


def test_zero_delay_matches_dde():
    p = VdpParams(2, 0.0, 0.9, 0.05)
    a = ode_simulate(p, (0.5, -0.5), 50.0, h=0.01)
    b = simulate(p, HistorySpec(0.5, 0.5, -0.5), 50.0, h=0.01)
    np.testing.assert_array_equal(a.times, b.times)
    assert np.abs(a.states - b.states).max() <= 1e-12


def test_equilibrium_constant():
    p = VdpParams(2, 0.2, 0.7, 0.05)
    tr = ode_simulate(p, (0.7, 0.7**3 / 3 - 0.7), 100.0)
    assert np.abs(tr.states - tr.states[0]).max() <= 1e-12


def test_time_rescale_equivalence():
    J, tau, eps = 2.0, 0.3, 0.05
    s = 1 - J * tau
    p = VdpParams(J, tau, 0.99, eps)
    theta = ode_simulate(p, (0.5, -0.5), 100.0, h=0.01)
    t = ode_simulate(p, (0.5, -0.5), 100.0 * s, h=0.01 * s, time="t")
    ref = ode_simulate(VdpParams(0.0, 0.0, 0.99, eps * s), (0.5, -0.5), 100.0, h=0.01)
    np.testing.assert_allclose(t.times / s, theta.times, rtol=1e-12)
    assert np.abs(t.states - ref.states).max() <= 1e-10
    assert np.abs(theta.states - ref.states).max() <= 1e-10


def test_ode_order_four():
    p = VdpParams(2, 0.2, 0.9, 0.1)
    run = lambda h: ode_simulate(p, (1.5, -0.3), 10.0, h=h).x[-1]
    a, b, c = run(0.02), run(0.01), run(0.005)
    assert 12 <= (a - b) / (b - c) <= 20


def test_ode_domain():
    with pytest.raises(DomainError):
        ode_simulate(VdpParams(2, 0.5, 1, 0.05), (0, 0), 10.0)


def test_genericity_report():
    items = genericity_report(2, 0.3)
    assert all(i.passes for i in items)
    by = {(i.condition, i.location): i for i in items}
    assert by[("A3 d2f/dx2", "canard fold x=1")].value == pytest.approx(-2.0, abs=1e-6)
    assert by[("A3 df/dy", "plain fold x=-1")].value == pytest.approx(1.0, abs=1e-6)
    assert by[("A3 dg/dx", "canard fold x=1")].value == pytest.approx(-1.0, abs=1e-6)
    assert {i.condition.split()[0] for i in items} == {"A1", "A2", "A3", "A4"}
    with pytest.raises(DomainError):
        genericity_report(2, 0.5)
