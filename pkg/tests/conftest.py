import numpy as np
import pytest

from hopfbrick import build_tensors, zoo
from hopfbrick.mpo import MPSState


@pytest.fixture(scope="session")
def fib_ts():
    return build_tensors(zoo.model("fibonacci"))


@pytest.fixture(scope="session")
def d3_ts():
    return build_tensors(zoo.model("dihedral-3"))


@pytest.fixture(scope="session")
def fib_state():
    return MPSState.product([0, 0, 1], [0, 0, 1])


@pytest.fixture(scope="session")
def d3_state():
    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    return MPSState.product(plus, plus)


def random_unitary(d, rng):
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(A)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the acceptance pass/fail lines into the run summary."""
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
