import numpy as np
import pytest

from phaseholo import _backend


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["numpy", "cython"])
def kernels(request, monkeypatch):
    """Run a test against each available kernel backend."""
    try:
        mod = _backend.get(request.param)
    except ImportError:
        pytest.skip("compiled kernels not built")
    import phaseholo.field as field
    import phaseholo.grad as grad
    monkeypatch.setattr(field, "kernels", mod)
    monkeypatch.setattr(grad, "kernels", mod)
    return mod


def random_layout(rng, m):
    """``m`` transducers scattered on z=0 facing +z, with slightly varied radii."""
    from phaseholo.geometry import ArrayLayout

    pos = np.column_stack([rng.uniform(-0.05, 0.05, (m, 2)), np.zeros(m)])
    nrm = np.tile([0.0, 0.0, 1.0], (m, 1))
    return ArrayLayout(pos, nrm, radii=rng.uniform(0.004, 0.006, m), p_ref=1.98)


def random_points(rng, c):
    return np.column_stack([rng.uniform(-0.05, 0.05, (c, 2)), rng.uniform(0.05, 0.15, c)])


_ACCEPTANCE = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Collects one status line per acceptance criterion for the terminal summary."""
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
