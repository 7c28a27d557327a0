import pytest

from brakeopt import config as cfgmod


@pytest.fixture(scope="session")
def cfg():
    return cfgmod.default_config()


@pytest.fixture(scope="session")
def setup(cfg):
    return cfgmod.setup_from(cfg)


@pytest.fixture(scope="session")
def input_model(cfg):
    return cfgmod.input_model_from(cfg)
