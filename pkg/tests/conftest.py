import logging

import numpy as np
import pytest

from qmcd.models.discrepancy import KernelSpec
from qmcd.models.generator import GeneratorKind, GeneratorSpec
from qmcd.models.inference import SamplerKind, SamplerSpec
from qmcd.models.point_set import SequenceFamily


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def se_kernel():
    return KernelSpec(lengthscale=1.5)


@pytest.fixture
def mc_sampler():
    return SamplerSpec(kind=SamplerKind.MC)


@pytest.fixture
def sobol_sampler():
    return SamplerSpec(kind=SamplerKind.RQMC, family=SequenceFamily.SOBOL)


@pytest.fixture
def gandk_spec():
    return GeneratorSpec(kind=GeneratorKind.GANDK, d=1)


@pytest.fixture
def location_spec():
    return GeneratorSpec(kind=GeneratorKind.GAUSSIAN_LOCATION, d=1)


@pytest.fixture
def bivbeta_spec():
    return GeneratorSpec(kind=GeneratorKind.BIVARIATE_BETA, d=2)


@pytest.fixture
def restore_logging():
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    for handler in list(root.handlers):
        root.removeHandler(handler)
    for handler in handlers:
        root.addHandler(handler)
    root.setLevel(level)
