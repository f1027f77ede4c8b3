import pytest

from n3h_dse.cores.geometry import DspCoreGeometry, LutCoreGeometry
from n3h_dse.cost.device import DeviceDatabase, load_device_database
from n3h_dse.sched.arch_config import ArchConfig


@pytest.fixture
def device_db() -> DeviceDatabase:
    return load_device_database()


@pytest.fixture
def tiny_config() -> ArchConfig:
    return ArchConfig(device="XC7Z045",
                      lut=LutCoreGeometry(m=1, n=1, k=64),
                      dsp=DspCoreGeometry(n_reg_row_a=8))
