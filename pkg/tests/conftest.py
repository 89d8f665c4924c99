import pytest

from mvtp.model import VehicleParams


@pytest.fixture
def params() -> VehicleParams:
    return VehicleParams()
