import numpy as np
import pytest
from hypothesis import HealthCheck, settings

# derandomized so the property suites are reproducible run to run
settings.register_profile(
    "repro",
    derandomize=True,
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repro")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, config):
    if config.acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in config.acceptance_lines:
            terminalreporter.write_line(line)
