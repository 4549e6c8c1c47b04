import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from nngraph.metric import Dataset

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def line_dataset(coords) -> Dataset:
    x = np.asarray(coords, dtype=float)
    return Dataset.from_array(np.abs(x[:, None] - x[None, :]), coords=x[:, None])


def random_dataset(n: int, seed: int, dim: int = 2) -> Dataset:
    """Euclidean points in the unit cube; continuous coordinates make ties improbable."""
    x = np.random.default_rng(seed).random((n, dim))
    d = np.sqrt(((x[:, None, :] - x[None, :, :]) ** 2).sum(axis=2))
    return Dataset.from_array((d + d.T) / 2.0, coords=x)


@pytest.fixture
def collinear():
    return line_dataset([0, 1, 3, 7])


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
