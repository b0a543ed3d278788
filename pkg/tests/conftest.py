import numpy as np
import pytest

from probduck.curves import fit_model, pdc_from_model, prc_from_pdc, resolve_step
from probduck.synth import synth_panel


@pytest.fixture(scope="session")
def panel():
    return synth_panel()


@pytest.fixture(scope="session")
def step(panel):
    return resolve_step(panel, bins=500)


@pytest.fixture(scope="session")
def model(panel):
    return fit_model(panel)


@pytest.fixture(scope="session")
def pdc(model, step):
    return pdc_from_model(model, step)


@pytest.fixture(scope="session")
def prc(model, pdc):
    return prc_from_pdc(pdc, model.adjacent)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
