import os

import pytest
from hypothesis import HealthCheck, settings

from heats.calibration import default_cluster, motivating_cluster
from heats.predictor import probe_and_train

settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("dev", max_examples=40, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "dev"))


@pytest.fixture(scope="session")
def cluster():
    return default_cluster()


@pytest.fixture(scope="session")
def small_cluster():
    return motivating_cluster()


@pytest.fixture(scope="session")
def exact_predictors(cluster):
    """Noiseless models; these reproduce the ground truth up to round-off."""
    return probe_and_train(cluster)


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    """Record one summary line per acceptance criterion."""
    def record(criterion, status, detail):
        line = f"{criterion}: {status} | {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
