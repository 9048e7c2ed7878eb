import numpy as np
import pytest

from regretopt.model import (
    NOMINAL_PRICES,
    CarbonFactors,
    DeviceSpec,
    ModelInstance,
    RepresentativeDay,
    StorageSpec,
    TimeGrid,
    dummy_devices,
)
from regretopt.synthetic import TOY_SUITE


def tiny_instance(devices=(), n=1, days=1, heat=1.0, cold=0.0, prices=NOMINAL_PRICES, dummy_cost=100.0):
    """Hand-sized instance: given devices plus the two dummies."""
    ds = [RepresentativeDay(f"d{k}", 365.0 / days, np.full(n, heat), np.full(n, cold)) for k in range(days)]
    devs = tuple(devices) + dummy_devices(days, n)
    return ModelInstance(
        TimeGrid(n), tuple(ds), devs, StorageSpec("heat", 0.0, 0.0), StorageSpec("cold", 0.0, 0.0),
        prices, CarbonFactors(0.4, 0.4, 0.03, 0.2, 0.18), 100.0, 50.0, dummy_cost,
    )


@pytest.fixture(scope="session")
def toy_instances():
    return {case.name: case.instance() for case in TOY_SUITE}
