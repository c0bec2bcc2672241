import pytest

from pfpoint import kernels, model


@pytest.fixture(scope="session")
def params():
    return model.PhysicalParams()


@pytest.fixture(scope="session")
def spectral(params):
    return model.spectrum(params)


@pytest.fixture(params=sorted(kernels.available_backends()))
def backend(request):
    return kernels.available_backends()[request.param]


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
