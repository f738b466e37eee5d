import pytest
from hypothesis import HealthCheck, settings

from vrprivacy.catalog import load_default_catalog

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def catalog():
    return load_default_catalog()
