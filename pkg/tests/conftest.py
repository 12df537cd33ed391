import pytest

from iterbm import _backend
from iterbm.rng import RngStream


@pytest.fixture
def stream():
    """Factory for fresh streams: ``stream(k)`` is stream k under seed 2024."""
    return lambda k=0: RngStream(2024, k)


@pytest.fixture
def restore_backend():
    before = _backend.backend_name()
    yield
    _backend.set_backend(before)
