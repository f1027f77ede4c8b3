from typing import Callable

import numpy as np
import pytest

from n3h_dse.cost.device import DeviceProfile, load_device_database
from n3h_dse.dse.accuracy_oracle import ProxyAccuracyOracle
from n3h_dse.dse.action_range import action_range_table
from n3h_dse.dse.ddpg import DdpgSettings
from n3h_dse.dse.episode import ExploreEnv
from n3h_dse.workload.builtin import builtin_network
from n3h_dse.workload.layer_spec import NetworkSpec


@pytest.fixture
def xc7z020() -> DeviceProfile:
    return load_device_database().get("XC7Z020")


@pytest.fixture
def roomy_xc7z020(xc7z020) -> DeviceProfile:
    """XC7Z020 knob ranges on a part that fits most of them."""
    return xc7z020.copy(update={"lut_total": 600_000, "bram36_total": 10_000})


@pytest.fixture
def synthetic_small() -> NetworkSpec:
    return builtin_network("synthetic-small")


@pytest.fixture
def small_env(synthetic_small, xc7z020) -> ExploreEnv:
    oracle = ProxyAccuracyOracle(seed=0)
    return ExploreEnv(net=synthetic_small,
                      device=xc7z020,
                      ranges=action_range_table(xc7z020),
                      target_ms=1.0,
                      oracle=oracle,
                      acc_b=oracle.baseline(synthetic_small))


@pytest.fixture
def fast_settings() -> DdpgSettings:
    return DdpgSettings(hidden=16, batch_size=16, warmup_episodes=5)


def _seeded_policy(seed: int) -> Callable[[np.ndarray], float]:
    rng = np.random.default_rng(seed)
    return lambda state: float(rng.uniform(0.0, 1.0))


@pytest.fixture
def seeded_policy() -> Callable[[int], Callable[[np.ndarray], float]]:
    """Returns a factory of uniformly random policies."""
    return _seeded_policy
