import numpy as np
import pytest

from coedge import fixtures
from coedge.model import ModelDescriptor, conv
from coedge.resources import BandwidthMatrix, Cluster, DeviceProfile
from coedge.scenario import Scenario


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def toy_pair(a_rows=(6, 6), result_bytes=64.0, deadline=1.0):
    """Two equal devices, two 'same' 3x3 convolutions on a 12x6x1 input, 1 MB/s links."""
    model = ModelDescriptor("toy", (12, 6, 1), (conv(3, 1, 2, 1, 1), conv(3, 2, 2, 1, 1)))
    dev = DeviceProfile("d", 2e5, 1e9, 1e6, 2.0, 0.5)
    cluster = Cluster((dev, dev), BandwidthMatrix.uniform(2, 1e6))
    return Scenario(model, cluster, deadline, elem_bytes=4, result_bytes=result_bytes)


@pytest.fixture
def toy():
    return toy_pair()


@pytest.fixture(scope="session")
def alexnet6():
    return fixtures.scenario("alexnet")


@pytest.fixture(scope="session")
def case_study():
    return fixtures.scenario("pi-jetson-alexnet")
