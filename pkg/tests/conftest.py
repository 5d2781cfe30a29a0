import numpy as np
import pytest

from hopflift.fields import VectorField


def field(*texts, constants=()):
    return VectorField.parse(texts, constants)


def rel_close(a, b, tol, floor=1e-300):
    a, b = np.asarray(a), np.asarray(b)
    scale = np.maximum(np.abs(b), floor)
    return bool(np.all(np.abs(a - b) <= tol * np.maximum(scale, 1.0)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def octant_points(rng):
    return 0.3 + 1.4 * rng.random((100, 3))


def registry_fields():
    """(label, field, constants) for every seed and transcribed fixed point."""
    from hopflift.seeds import SEEDS
    out = []
    for s in SEEDS:
        out.append((f"{s.name}:seed", s.field(), s.constants))
        if s.has_expected:
            out.append((f"{s.name}:fixed", s.expected_field(), s.constants))
    return out


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
