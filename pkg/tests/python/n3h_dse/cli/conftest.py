import json
from pathlib import Path

import pytest

from n3h_dse.cores.geometry import DspCoreGeometry, LutCoreGeometry
from n3h_dse.sched.arch_config import ArchConfig
from n3h_dse.workload.descriptor import serialize_network
from n3h_dse.workload.layer_spec import LayerSpec, NetworkSpec


def write_config(path: Path,
                 cfg: ArchConfig) -> str:
    path.write_text(cfg.json(exclude_none=True, indent=1))
    return str(path)


@pytest.fixture
def small_config_file(tmp_path) -> str:
    cfg = ArchConfig(device="XC7Z020",
                     network="synthetic-small",
                     lut=LutCoreGeometry(m=8, n=16, k=128),
                     dsp=DspCoreGeometry(n_reg_row_a=8, d_dbuf_a=2048))
    return write_config(tmp_path / "small.json", cfg)


@pytest.fixture
def oversized_config_file(tmp_path) -> str:
    cfg = ArchConfig(device="XC7Z020",
                     lut=LutCoreGeometry(m=50, n=50, k=256),
                     dsp=DspCoreGeometry(n_reg_row_a=8))
    return write_config(tmp_path / "oversized.json", cfg)


@pytest.fixture
def lut_hostile_config_file(tmp_path) -> str:
    cfg = ArchConfig(device="XC7Z020",
                     lut=LutCoreGeometry(m=1, n=1, k=64),
                     dsp=DspCoreGeometry(n_reg_row_a=8, d_dbuf_a=2048))
    return write_config(tmp_path / "lut_hostile.json", cfg)


@pytest.fixture
def depthwise_network_file(tmp_path) -> str:
    net = NetworkSpec(
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
    path = tmp_path / "tiny-depthwise.txt"
    path.write_text(serialize_network(net))
    return str(path)


@pytest.fixture
def fixed_timestamp(monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")


@pytest.fixture
def roomy_device_db(tmp_path) -> str:
    # XC7Z020 search ranges on a device every explored configuration fits
    path = tmp_path / "roomy_device_db.json"
    path.write_text(json.dumps({"devices": [{"name": "XC7Z020", "lut_total": 10_000_000, "dsp_total": 220,
                                             "bram36_total": 100_000}]}))
    return str(path)
