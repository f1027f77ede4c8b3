import logging

import pytest

from n3h_dse.workload.layer_spec import LayerSpec, NetworkSpec

logger = logging.getLogger(__name__)

MINIMAL_DESCRIPTOR = """
# one layer, padded 3x3 conv
network name=minimal
layer index=1 c_in=3 c_out=8 kernel=3 stride=1 fmap=8 padding=1
"""


@pytest.fixture
def minimal_descriptor() -> str:
    return MINIMAL_DESCRIPTOR


@pytest.fixture
def two_layer_network() -> NetworkSpec:
    return NetworkSpec(
        name="two-layer",
        layers=[
            LayerSpec(index=1, name="conv1", c_in=3, c_out=16, kernel=3, stride=1, fmap=8, padding=1,
                      n_params=432, is_first_or_last=True),
            LayerSpec(index=2, name="fc", c_in=16, c_out=10, kernel=1, stride=1, fmap=1,
                      n_params=160, is_first_or_last=True),
        ]
    )
