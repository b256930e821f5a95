import numpy as np
import pytest

from rkhsmercer import KernelSpec

BUILTINS = {
    "gaussian": KernelSpec.gaussian(1.0),
    "gaussian_narrow": KernelSpec.gaussian(0.1),
    "laplace": KernelSpec.laplace(0.5),
    "brownian": KernelSpec.brownian(),
    "constant": KernelSpec.constant(1.0),
    "block": KernelSpec.block([3.0, 2.0, 1.0]),
}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(params=sorted(BUILTINS))
def builtin(request):
    return BUILTINS[request.param]


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
