import numpy as np
import pytest

from tsspam.spline_basis import GroupedDesign


def make_design(Z, q):
    Z = np.asarray(Z, dtype=float)
    p = Z.shape[1] // q
    return GroupedDesign(Z=Z, p=p, q=q, bases=(None,) * p)


def random_instance(seed, n=40, p=4, q=3, active=2, noise=0.1):
    """Gaussian design with ``active`` nonzero leading groups."""
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, p * q))
    beta = np.zeros(p * q)
    beta[: active * q] = rng.standard_normal(active * q)
    y = Z @ beta + noise * rng.standard_normal(n)
    return make_design(Z, q), y, beta


@pytest.fixture
def small_instance():
    return random_instance(0)


ACCEPTANCE_LINES = {}


def record(criterion, passed, detail):
    """Store a one-line verdict for the terminal summary, then assert."""
    ACCEPTANCE_LINES[criterion] = f"criterion {criterion:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    assert passed, detail


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
