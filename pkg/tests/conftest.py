import pytest
from hypothesis import settings

from csgp import CoalitionGame

settings.register_profile("ci", deadline=None, max_examples=50)
settings.load_profile("ci")


@pytest.fixture
def g2():
    """Two agents, v({a1})=1, v({a2})=2, v({a1,a2})=4; optimum is the grand coalition."""
    return CoalitionGame(n=2, values={1: 1.0, 2: 2.0, 3: 4.0})
