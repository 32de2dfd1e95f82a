import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from delayvdp.analysis import (
    ClassifierConfig,
    Direction,
    RegimeLabel,
    SectionDef,
    burst_epochs,
    classify,
    cluster_count,
    cycle_stats,
    detect_period,
    poincare_crossings,
    return_map,
    section_values,
    write_return_map_csv,
)
from delayvdp.dde_core import Trajectory
from delayvdp.errors import DomainError, InsufficientDataError


def circle(t_end=60.0, h=0.01, r=1.0):
    t = np.arange(0.0, t_end + h / 2, h)
    st_ = np.column_stack([r * np.cos(t), r * np.sin(t)])
    d = np.column_stack([-r * np.sin(t), r * np.cos(t)])
    return Trajectory(h, t, st_, d, {})


def test_crossings_on_circle():
    tr = circle()
    sec = SectionDef("y", 0.3, "up")
    cr = poincare_crossings(tr, sec)
    t0 = math.asin(0.3)
    expect = t0 + 2 * math.pi * np.arange(len(cr))
    assert len(cr) == 10
    np.testing.assert_allclose(cr[:, 0], expect, atol=1e-9)
    np.testing.assert_allclose(cr[:, 2], 0.3, atol=1e-9)
    np.testing.assert_allclose(section_values(cr, sec), math.sqrt(0.91), atol=1e-9)


def test_crossing_residual_against_dense_output():
    tr = circle(h=0.05)
    for sec in (SectionDef("x", -0.2, "down"), SectionDef("y", 0.5, "both")):
        cr = poincare_crossings(tr, sec)
        col = 1 if sec.variable.value == "x" else 2
        resid = np.array([tr.interpolate(t)[col - 1] for t in cr[:, 0]]) - sec.level
        assert np.abs(resid).max() <= 1e-9
        assert np.all(np.diff(cr[:, 0]) > 0)


def test_directions():
    tr = circle()
    up = poincare_crossings(tr, SectionDef("y", 0.0, "up"))
    down = poincare_crossings(tr, SectionDef("y", 0.0, "down"))
    both = poincare_crossings(tr, SectionDef("y", 0.0, Direction.BOTH))
    assert len(both) == len(up) + len(down)
    assert np.all(up[:, 1] > 0) and np.all(down[:, 1] < 0)


def test_no_crossings_for_constant():
    t = np.arange(0, 10.0, 0.1)
    tr = Trajectory(0.1, t, np.full((t.size, 2), 0.5), np.zeros((t.size, 2)), {})
    assert poincare_crossings(tr, SectionDef("y", 0.0, "up")).shape == (0, 3)


def test_discard():
    tr = circle()
    sec = SectionDef("y", 0.3, "up")
    cr = poincare_crossings(tr, sec, discard=30.0)
    assert np.all(cr[:, 0] >= 30.0) and len(cr) == 5
    with pytest.raises(DomainError):
        poincare_crossings(tr, sec, discard=1e3)


def test_section_def_validation():
    with pytest.raises(ValueError):
        SectionDef("z", 0.0, "up")
    with pytest.raises(ValueError):
        SectionDef("y", 0.0, "sideways")


def test_return_map_and_csv():
    v = np.array([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(return_map(v), [[1, 2], [2, 3]])
    with pytest.raises(InsufficientDataError):
        return_map([1.0])
    buf = io.StringIO()
    write_return_map_csv(return_map(v), buf, comments=["run"])
    assert buf.getvalue().splitlines()[:2] == ["# run", "s_n,s_np1"]


@given(st.integers(1, 16), st.lists(st.floats(-5, 5), min_size=16, max_size=16, unique=True))
def test_detect_period_minimal(p, pattern):
    # spread the pattern values so distinct entries differ by more than tol
    base = np.round(np.array(pattern[:p]), 3) + np.arange(p) * 1e-2
    if np.unique(base).size < p:
        return
    seq = np.tile(base, 200 // p + 1)[:100]
    seq = seq + 1e-7 * np.sin(np.arange(seq.size))
    assert detect_period(seq, tol=1e-5) == p


def test_detect_period_none_and_errors():
    rng = np.random.default_rng(0)
    assert detect_period(rng.random(100)) is None
    with pytest.raises(InsufficientDataError):
        detect_period(np.ones(10))
    with pytest.raises(DomainError):
        detect_period(np.ones(10), max_period=0)


def test_cluster_count():
    assert cluster_count([], 1e-3) == 0
    assert cluster_count([1.0, 1.0 + 1e-5, 2.0, 3.0], 1e-3) == 3
    rng = np.random.default_rng(1)
    assert cluster_count(rng.random(200), 1e-9) == 200


def test_cycle_stats_circle():
    cs = cycle_stats(circle(t_end=200.0))
    assert cs.amplitude == pytest.approx(2.0, abs=1e-6)
    assert cs.period == pytest.approx(2 * math.pi, abs=1e-9)
    assert cs.maxima_count_per_period == 1


def test_classify_equilibrium_and_relaxation(run_cache):
    eq = run_cache(2, 0.2, 1.2, 0.05, 3000.0, t_record=1500.0)
    assert classify(eq).label is RegimeLabel.EQUILIBRIUM
    rel = run_cache(2, 0.2, 0.9, 0.05, 3000.0, t_record=1500.0)
    c = classify(rel)
    assert c.label is RegimeLabel.RELAXATION
    assert c.stats.amplitude > 3
    assert c.to_json().startswith("{")


def test_classify_deterministic_and_window_stable(run_cache):
    short = run_cache(2, 0.2, 0.9, 0.05, 3000.0, t_record=1500.0)
    long = run_cache(2, 0.2, 0.9, 0.05, 4500.0, t_record=1500.0)
    a, b = classify(short), classify(short)
    assert a.to_json() == b.to_json()
    np.testing.assert_array_equal(a.stats.maxima_values, b.stats.maxima_values)
    assert classify(long).label is a.label


def test_classify_burst(run_cache):
    tr = run_cache(2, 1.0, 1.0, 0.05, 3000.0, t_record=1500.0)
    assert classify(tr).label is RegimeLabel.BURST
    assert len(burst_epochs(tr)) >= 3


def test_classify_needs_data():
    tr = circle(t_end=10.0)
    cfg = ClassifierConfig()
    with pytest.raises(InsufficientDataError):
        classify(Trajectory(tr.step, tr.times, tr.states * 0.5 + np.array([0.0, 0.0]),
                            tr.derivs * 0.5, {}), config=cfg)
