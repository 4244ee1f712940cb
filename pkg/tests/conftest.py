import pytest

from popranking.core import fix_realization
from popranking.models import GroupConfig, ModelParams


@pytest.fixture
def baseline():
    return ModelParams(p=0.55, q=0.7, mu=0.9, gamma=0.33, M=20, alpha=1.0)


@pytest.fixture
def groups():
    return GroupConfig(gamma_a=0.0, gamma_b=0.66)


@pytest.fixture
def minority(baseline):
    """Seven correct websites out of twenty."""
    return fix_realization(1, 7, baseline)


@pytest.fixture
def majority(baseline):
    return fix_realization(1, 15, baseline)
