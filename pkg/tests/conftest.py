import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sbfilc.config import load_config
from sbfilc.lifted import closed_loop_operators

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=300)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def default_cfg():
    """Shipped default plant/controller with the E4 method."""
    return load_config(preset="E4")


@pytest.fixture(scope="session")
def default_ops(default_cfg):
    return closed_loop_operators(default_cfg.plant, default_cfg.controller, default_cfg.N)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
