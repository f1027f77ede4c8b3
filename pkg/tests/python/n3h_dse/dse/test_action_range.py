import numpy as np
import pytest
from pydantic import ValidationError

from n3h_dse.cost.device import DeviceProfile
from n3h_dse.dse.action_range import HW_KNOBS, KnobRange, action_range_table, decode_bit_action, \
    decode_hw_action, decode_hw_config


def test_decode_hw_action(xc7z020):
    ranges = action_range_table(xc7z020)
    m = HW_KNOBS.index("m")
    k = HW_KNOBS.index("k")

    assert 1 == decode_hw_action(0.0, m, ranges), "a=0 must select the lower bound"
    assert 50 == decode_hw_action(1.0, m, ranges), "a=1 must select the upper bound"
    assert 26 == decode_hw_action(0.5, m, ranges), "25.5 must round away from zero"
    assert 192 == decode_hw_action(0.6, k, ranges), "v=round(0.6*3+1)=3 should give K=192"


def test_decode_bit_action():
    assert 5 == decode_bit_action(0.5, 2, 8), "invalid bits for a=0.5"
    assert 2 == decode_bit_action(0.0, 2, 8), "1.5 must round up to 2"
    assert 8 == decode_bit_action(1.0, 2, 8), "a=1 must be clamped to b_max"
    assert 4 == decode_bit_action(1.0, 2, 4), "a=1 must be clamped to b_max"

    with pytest.raises(ValueError, match="must not exceed"):
        decode_bit_action(0.5, 4, 2)
    with pytest.raises(ValueError, match="between 0 and 1"):
        decode_bit_action(1.5, 2, 8)


def test_decoding_is_monotone(xc7z020):
    ranges = action_range_table(xc7z020)
    actions = np.linspace(0.0, 1.0, 501)
    for t, knob in enumerate(HW_KNOBS):
        values = [decode_hw_action(float(a), t, ranges) for a in actions]
        assert all(a <= b for a, b in zip(values, values[1:])), f"{knob} decoding is not monotone"
        assert ranges.knobs[t].min_value == values[0] and ranges.knobs[t].max_value == values[-1], \
            f"{knob} decoding misses its bounds"

    bits = [decode_bit_action(float(a), 2, 8) for a in actions]
    assert all(a <= b for a, b in zip(bits, bits[1:])), "bit decoding is not monotone"
    assert set(range(2, 9)) == set(bits), "every bit-width must be reachable"


def test_device_ranges(xc7z020):
    small = action_range_table(xc7z020)
    assert 50 * 1024 == small.knob("d_lbuf_a").max_value, "invalid XC7Z020 activation buffer cap"
    assert 4 * 1024 == small.knob("d_dbuf_w").max_value, "invalid XC7Z020 weight buffer cap"
    assert (2, 8) == small.b_wl_range and (2, 4) == small.b_a_range, "invalid bit ranges"

    large = action_range_table(DeviceProfile(name="XC7Z045", lut_total=218600, dsp_total=900, bram36_total=545))
    assert 252 == large.knob("m").v_max and 252 == large.knob("n").v_max, "invalid XC7Z045 array range"
    assert 126 * 1024 == large.knob("d_dbuf_a").max_value, "invalid XC7Z045 DSP activation buffer cap"
    assert 256 == large.knob("k").max_value, "K is searched up to 256"

    with pytest.raises(ValueError, match="no search ranges"):
        action_range_table(DeviceProfile(name="XC7Z010", lut_total=17600, dsp_total=80, bram36_total=60))


def test_decode_hw_config(xc7z020):
    cfg = decode_hw_config([0.0] * 6, action_range_table(xc7z020))
    assert (1, 1, 64, 1024) == (cfg.lut.m, cfg.lut.n, cfg.lut.k, cfg.lut.d_lbuf_a), "invalid LUT-core"
    assert (8, 1024, 1024) == (cfg.dsp.n_reg_row_a, cfg.dsp.d_dbuf_a, cfg.dsp.d_dbuf_w), "invalid DSP-core"
    assert "XC7Z020" == cfg.device, "config must be bound to the device"

    with pytest.raises(ValueError, match="need 6 hardware actions"):
        decode_hw_config([0.5] * 5, action_range_table(xc7z020))


def test_knob_range_validation():
    with pytest.raises(ValidationError, match="range is empty"):
        KnobRange(name="m", v_min=5, v_max=4)
