import pytest

from teichlab import flatsurf


@pytest.fixture
def torus():
    return flatsurf.square_torus()


@pytest.fixture
def octagon():
    return flatsurf.regular_octagon()


@pytest.fixture
def l_shape():
    return flatsurf.l_shaped()


@pytest.fixture
def strip():
    return flatsurf.five_square_strip()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for num in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[num])
