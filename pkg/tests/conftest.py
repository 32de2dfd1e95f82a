import numpy as np
import pytest
from hypothesis import settings

from delayvdp.dde_core import HistorySpec, VdpParams, equilibrium, simulate

settings.register_profile("ci", max_examples=60, deadline=None)
settings.load_profile("ci")


def kicked_run(J, tau, a, eps, t_end, kick=0.1, t_record=0.0, h=None):
    """Equilibrium history with x(0) offset by ``kick``."""
    p = VdpParams(J, tau, a, eps)
    xe, ye = equilibrium(p)
    return simulate(p, HistorySpec(xe, xe + kick, ye), t_end, h, t_record)


@pytest.fixture(scope="session")
def run_cache():
    cache = {}

    def get(*args, **kw):
        key = (args, tuple(sorted(kw.items())))
        if key not in cache:
            cache[key] = kicked_run(*args, **kw)
        return cache[key]

    return get


_ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(n, ok, detail)`` then assert."""

    def record(n, ok, detail):
        line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE[n] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[n])
