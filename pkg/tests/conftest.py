import numpy as np
import pytest

from cesim import ObjectiveKind, RandomStream, generate_instance


@pytest.fixture(scope="session")
def small_instance():
    """Shared 6-agent regression instance for unit tests."""
    return generate_instance(ObjectiveKind.REGRESSION_SIN, 6, 3, 5, 0.7, RandomStream(11))


@pytest.fixture(scope="session")
def small_sigmoid_instance():
    return generate_instance(ObjectiveKind.SIGMOID_NORM, 6, 3, 5, 0.7, RandomStream(12))


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
