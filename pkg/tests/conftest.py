import sys

import numpy as np
import pytest

from nctwist import models


@pytest.fixture(scope="session")
def toy1():
    return models.build_toy(models.ToyParams(1.0, 1.0))


@pytest.fixture(scope="session")
def toy0():
    return models.build_toy(models.ToyParams(1.0, 0.0))


@pytest.fixture(scope="session")
def toy0_even():
    return models.build_toy(models.ToyParams(1.0, 0.0), gamma=models.toy_gamma())


@pytest.fixture(scope="session")
def toy0_signed():
    # involutive, self-adjoint, regular twist compatible with D at k_y = 0
    nu = models.toy_signed_twist([1, -1, -1, 1])
    return models.build_toy(models.ToyParams(1.0, 0.0), [nu])


@pytest.fixture(scope="session")
def lr():
    return models.load_fixture("lr_one_generation")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def rand_c(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(lines):
        terminalreporter.write_line(lines[k])
