import hypothesis
import numpy as np
import pytest

from excusum import MeanSchedule, gaussian_model

hypothesis.settings.register_profile(
    "default", deadline=None, max_examples=50, derandomize=True
)
hypothesis.settings.load_profile("default")


@pytest.fixture(scope="session")
def arctan_model():
    return gaussian_model(MeanSchedule.arctangent())


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)


def constant_model(mu: float):
    return gaussian_model(MeanSchedule.constant(mu))
