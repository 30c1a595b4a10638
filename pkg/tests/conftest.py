import pytest

from emocause.clients import MockModelService
from emocause.data import load_toy_causal, load_toy_corpus


@pytest.fixture
def toy_corpus():
    return load_toy_corpus()


@pytest.fixture
def toy_causal():
    return load_toy_causal()


@pytest.fixture
def mock_service():
    return MockModelService()
