import itertools

import numpy as np
import pytest

from n3h_dse.cores.geometry import DspCoreGeometry, LutCoreGeometry
from n3h_dse.cost.resource_model import bram_dsp_core, bram_lut_core, check_fit, lut_lut_core
from n3h_dse.sched.arch_config import ArchConfig


@pytest.mark.parametrize("geometry,expected", [
    (DspCoreGeometry(n_reg_row_a=16), 48),
    (DspCoreGeometry(n_reg_row_a=8), 24),
    (DspCoreGeometry(n_reg_row_a=16, d_dbuf_a=2048), 80),
])
def test_bram_dsp_core(geometry, expected):
    assert expected == bram_dsp_core(geometry), f"invalid DSP-core BRAM count for {geometry}"


@pytest.mark.parametrize("m,k,n,expected", [
    (8, 128, 16, 40905),
    (14, 512, 14, 150314),
    (1, 64, 1, 958),
    (50, 256, 50, 1160018),
])
def test_lut_lut_core(m, k, n, expected):
    assert expected == lut_lut_core(m, k, n), f"invalid LUT-core LUT count for M={m} K={k} N={n}"


@pytest.mark.parametrize("geometry,expected", [
    (LutCoreGeometry(m=8, n=16, k=128), 96),
    (LutCoreGeometry(m=26, n=8, k=64), 68),
    (LutCoreGeometry(m=1, n=1, k=64), 4),
])
def test_bram_lut_core(geometry, expected):
    assert expected == bram_lut_core(geometry), f"invalid LUT-core BRAM count for {geometry}"


def test_dsp_fully_used(device_db, tiny_config):
    report = check_fit(tiny_config, device_db.get("XC7Z020"))
    assert 220 == report.dsp_used, "DSP-core should use every DSP of the device"
    assert 0 == report.dsp_margin, "DSP margin should be zero"


def test_tiny_config_is_feasible(device_db, tiny_config):
    report = check_fit(tiny_config, device_db.get("XC7Z045"))
    assert report.feasible, f"tiny config should fit: {report.summary()}"
    assert 958 + 1000 == report.lut_used, "invalid LUT usage"
    assert 4 + 24 == report.bram_used, "invalid BRAM usage"
    assert report.lut_margin > 0 and report.bram_margin > 0, "margins should be positive"
    assert 1024 == report.d_lbuf_w, "LUT-core weight buffer depth should be recorded"


def test_oversized_config_is_infeasible(device_db):
    cfg = ArchConfig(device="XC7Z020", lut=LutCoreGeometry(m=50, n=50, k=256), dsp=DspCoreGeometry(n_reg_row_a=8))
    report = check_fit(cfg, device_db.get("XC7Z020"))
    assert not report.feasible, "oversized config should not fit"
    assert 1160018 + 1000 == report.lut_used, "invalid LUT usage"
    assert report.lut_margin < 0, "LUT margin should be negative"
    assert "LUT over budget" in report.summary(), "summary should name the violated resource"


def test_published_points_within_band(device_db):
    # model versus reported LUT usage of two published design points
    d_b = ArchConfig(device="D_B", lut=LutCoreGeometry(m=14, n=14, k=512), dsp=DspCoreGeometry(n_reg_row_a=8))
    d_b_report = check_fit(d_b, device_db.get("D_B"))
    assert 151314 == d_b_report.lut_used, "invalid D_B LUT usage"
    assert abs(d_b_report.lut_used - 152868) / 152868 < 0.10, "D_B estimate outside the 10% band"

    d_a = ArchConfig(device="D_A", lut=LutCoreGeometry(m=8, n=16, k=128), dsp=DspCoreGeometry(n_reg_row_a=8))
    d_a_report = check_fit(d_a, device_db.get("D_A"))
    assert 41905 == d_a_report.lut_used, "invalid D_A LUT usage"
    assert abs(d_a_report.lut_used - 39623) / 39623 < 0.10, "D_A estimate outside the 10% band"


def test_monotonic_costs():
    rng = np.random.default_rng(seed=41)
    for _ in range(200):
        m, n, row = (int(v) for v in rng.integers(1, 50, size=3))
        k = 64 * int(rng.integers(1, 5))
        d_a, d_w = (1024 * int(v) for v in rng.integers(1, 20, size=2))

        assert lut_lut_core(m, k, n) <= lut_lut_core(m + 1, k, n), "LUT count decreased in M"
        assert lut_lut_core(m, k, n) <= lut_lut_core(m, k + 64, n), "LUT count decreased in K"
        assert lut_lut_core(m, k, n) <= lut_lut_core(m, k, n + 1), "LUT count decreased in N"

        lut = LutCoreGeometry(m=m, n=n, k=k, d_lbuf_a=d_a)
        for bigger in (lut.copy(update={"m": m + 1}), lut.copy(update={"n": n + 1}),
                       lut.copy(update={"k": k + 64}), lut.copy(update={"d_lbuf_a": d_a + 1})):
            assert bram_lut_core(lut) <= bram_lut_core(bigger), f"LUT-core BRAM decreased from {lut} to {bigger}"

        dsp = DspCoreGeometry(n_reg_row_a=row, d_dbuf_a=d_a, d_dbuf_w=d_w)
        for bigger in (dsp.copy(update={"n_reg_row_a": row + 1}), dsp.copy(update={"d_dbuf_a": d_a + 1}),
                       dsp.copy(update={"d_dbuf_w": d_w + 1})):
            assert bram_dsp_core(dsp) <= bram_dsp_core(bigger), f"DSP-core BRAM decreased from {dsp} to {bigger}"


def test_ceiling_intervals():
    for blocks, offset in itertools.product((1, 2, 5), (1, 512, 1024)):
        depth = (blocks - 1) * 1024 + offset
        top = blocks * 1024
        assert bram_lut_core(LutCoreGeometry(m=4, n=4, k=64, d_lbuf_a=depth)) == \
               bram_lut_core(LutCoreGeometry(m=4, n=4, k=64, d_lbuf_a=top)), f"LUT-core BRAM not constant at {depth}"
        assert bram_dsp_core(DspCoreGeometry(n_reg_row_a=8, d_dbuf_w=depth)) == \
               bram_dsp_core(DspCoreGeometry(n_reg_row_a=8, d_dbuf_w=top)), f"DSP-core BRAM not constant at {depth}"


def test_feasibility_is_downward_closed(device_db):
    rng = np.random.default_rng(seed=42)
    device = device_db.get("XC7Z020")
    for _ in range(200):
        m, n = (int(v) for v in rng.integers(2, 30, size=2))
        big = ArchConfig(device="XC7Z020",
                         lut=LutCoreGeometry(m=m, n=n, k=64 * int(rng.integers(1, 5))),
                         dsp=DspCoreGeometry(n_reg_row_a=int(rng.integers(2, 17))))
        small = ArchConfig(device="XC7Z020",
                           lut=LutCoreGeometry(m=m - 1, n=n - 1, k=64),
                           dsp=DspCoreGeometry(n_reg_row_a=big.dsp.n_reg_row_a - 1))
        if check_fit(big, device).feasible:
            assert check_fit(small, device).feasible, f"{small} should fit since {big} fits"
