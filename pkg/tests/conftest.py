import numpy as np
import pytest

from wishart_outage import presets
from wishart_outage.maxeig_cdf import WishartParams, params_from_gaussian


@pytest.fixture(scope="session")
def ref_params():
    """Parameters of the reference (Upsilon, Psi) pair."""
    return params_from_gaussian(presets.UPSILON_REF, presets.PSI_REF)


@pytest.fixture(scope="session")
def symmetric_params():
    return WishartParams(0.5, 2.0, 1.0, 1.0, 0.5, 0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_herm2(rng, psd=True):
    from wishart_outage import cmatrix2 as cm

    g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    a = g @ g.conj().T if psd else g + g.conj().T
    return cm.Herm2.from_array(0.5 * (a + a.conj().T))


ACCEPTANCE_LINES = []


def record_criterion(number, title, passed, detail):
    """Print and keep one PASS/FAIL line for an acceptance criterion."""
    line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
