import numpy as np
import pytest

from n3h_dse.quantize.scheme import LayerQuant, QuantScheme


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(seed=20220614)


@pytest.fixture
def layer_weights(rng) -> np.ndarray:
    # 16 filters of a 3x3 conv over 8 channels with filter-dependent spread
    spreads = np.linspace(0.05, 1.0, 16).reshape(-1, 1, 1, 1)
    return rng.normal(size=(16, 8, 3, 3)) * spreads


@pytest.fixture
def single_layer_scheme() -> QuantScheme:
    return QuantScheme(layers=[LayerQuant(index=1, b_a=4, b_wl=6)])
