import pytest

from n3h_dse.cores.geometry import DspCoreGeometry, LutCoreGeometry
from n3h_dse.sched.arch_config import ArchConfig
from n3h_dse.workload.layer_spec import LayerSpec, NetworkSpec


@pytest.fixture
def base_config() -> ArchConfig:
    return ArchConfig(device="XC7Z020",
                      lut=LutCoreGeometry(m=8, n=16, k=128),
                      dsp=DspCoreGeometry(n_reg_row_a=8, d_dbuf_a=2048))


@pytest.fixture
def lut_hostile_config() -> ArchConfig:
    # a single-PE LUT array next to a full DSP-core
    return ArchConfig(device="XC7Z020",
                      lut=LutCoreGeometry(m=1, n=1, k=64),
                      dsp=DspCoreGeometry(n_reg_row_a=8, d_dbuf_a=2048))


@pytest.fixture
def depthwise_network() -> NetworkSpec:
    return NetworkSpec(
        name="tiny-depthwise",
        layers=[
            LayerSpec(index=1, name="conv1", c_in=3, c_out=32, kernel=3, stride=2, fmap=16, padding=1,
                      n_params=864, is_first_or_last=True),
            LayerSpec(index=2, name="dw", c_in=32, c_out=32, kernel=3, stride=1, fmap=8, padding=1,
                      n_params=288, is_sc_or_dw=True, is_depthwise=True),
            LayerSpec(index=3, name="project", c_in=32, c_out=16, kernel=1, stride=1, fmap=8,
                      n_params=512),
            LayerSpec(index=4, name="fc", c_in=16, c_out=10, kernel=1, stride=1, fmap=1,
                      n_params=160, is_first_or_last=True),
        ]
    )
