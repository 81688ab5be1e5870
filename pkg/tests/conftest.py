import numpy as np
import pytest

from recome.dataset import BlobSpec, Dataset, generate_blobs


@pytest.fixture
def three_points():
    return Dataset([[0.0], [1.0], [3.0]])


@pytest.fixture
def two_blobs():
    spec = BlobSpec(
        clusters=(((0.0, 0.0), 0.5, 60), ((20.0, 0.0), 0.5, 60)),
        seed=11,
    )
    return generate_blobs(spec)


def random_dataset(seed, n=None, m=2):
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(8, 61))
    return Dataset(rng.normal(size=(n, m)) * rng.uniform(0.2, 3.0, size=m))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
