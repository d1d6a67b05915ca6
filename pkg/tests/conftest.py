import random

import pytest

from regabe.groups import get_backend


@pytest.fixture(params=["mock", "bls12-381"], ids=["mock", "real"])
def backend(request):
    return get_backend(request.param)


@pytest.fixture
def mock_backend():
    return get_backend("mock")


@pytest.fixture
def real_backend():
    return get_backend("bls12-381")


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
