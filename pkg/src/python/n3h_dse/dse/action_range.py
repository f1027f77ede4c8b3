"""
Search ranges of the agent's knobs and the decoding of continuous actions into knob values.

Hardware knobs are searched in the order K, M, N, D_Lbuf_a, D_Dbuf_a, D_Dbuf_w.  A knob value
is v * multiplier with v in [v_min, v_max].
"""
import logging
from typing import Final

from pydantic import BaseModel, root_validator, validator

from n3h_dse.cores.geometry import BUFFER_DEPTH_UNIT, DspCoreGeometry, LutCoreGeometry
from n3h_dse.cost.device import DeviceProfile
from n3h_dse.quantize.scheme import ACTIVATION_BIT_RANGE, LUT_WEIGHT_BIT_RANGE
from n3h_dse.quantize.uniform import round_half_away
from n3h_dse.sched.arch_config import ArchConfig

logger = logging.getLogger(__name__)

HW_KNOBS: Final = ("k", "m", "n", "d_lbuf_a", "d_dbuf_a", "d_dbuf_w")
DEFAULT_N_REG_ROW_A: Final = 8


class KnobRange(BaseModel):
    name: str
    v_min: int
    v_max: int
    multiplier: int = 1

    class Config:
        frozen = True

    @validator("v_min", "multiplier")
    def is_positive(cls, value, field):
        if value < 1:
            raise ValueError(f"{field.name} must be >= 1 but is {value}")
        return value

    @root_validator(skip_on_failure=True)
    def bounds_are_ordered(cls, values):
        if values["v_max"] < values["v_min"]:
            raise ValueError(f"{values['name']} range is empty, v_max {values['v_max']} < v_min {values['v_min']}")
        return values

    @property
    def min_value(self) -> int:
        return self.v_min * self.multiplier

    @property
    def max_value(self) -> int:
        return self.v_max * self.multiplier


class ActionRangeTable(BaseModel):
    """Knob ranges the agent searches on one device.
    #
    # Attributes:
    #     device:      canonical device name
    #     knobs:       hardware knob ranges in HW_KNOBS order
    #     b_wl_range:  LUT-core weight bit range
    #     b_a_range:   activation bit range
    """
    device: str
    knobs: list[KnobRange]
    b_wl_range: tuple[int, int] = LUT_WEIGHT_BIT_RANGE
    b_a_range: tuple[int, int] = ACTIVATION_BIT_RANGE

    class Config:
        frozen = True

    @validator("knobs")
    def knobs_in_search_order(cls, knobs):
        names = tuple(knob.name for knob in knobs)
        if names != HW_KNOBS:
            raise ValueError(f"knobs must be {HW_KNOBS} in this order but are {names}")
        return knobs

    def knob(self,
             name: str) -> KnobRange:
        return self.knobs[HW_KNOBS.index(name)]


def _depth(name: str, v_max: int) -> KnobRange:
    return KnobRange(name=name, v_min=1, v_max=v_max, multiplier=BUFFER_DEPTH_UNIT)


ACTION_RANGES: Final = {
    "XC7Z020": ActionRangeTable(device="XC7Z020",
                                knobs=[KnobRange(name="k", v_min=1, v_max=4, multiplier=64),
                                       KnobRange(name="m", v_min=1, v_max=50),
                                       KnobRange(name="n", v_min=1, v_max=50),
                                       _depth("d_lbuf_a", 50),
                                       _depth("d_dbuf_a", 25),
                                       _depth("d_dbuf_w", 4)]),
    "XC7Z045": ActionRangeTable(device="XC7Z045",
                                knobs=[KnobRange(name="k", v_min=1, v_max=4, multiplier=64),
                                       KnobRange(name="m", v_min=1, v_max=252),
                                       KnobRange(name="n", v_min=1, v_max=252),
                                       _depth("d_lbuf_a", 252),
                                       _depth("d_dbuf_a", 126),
                                       _depth("d_dbuf_w", 16)]),
}


def action_range_table(dev: DeviceProfile) -> ActionRangeTable:
    if dev.name not in ACTION_RANGES:
        raise ValueError(f"no search ranges for device {dev.name}, choose one of {sorted(ACTION_RANGES)}")
    return ACTION_RANGES[dev.name]


def _check_action(a: float):
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"action must be between 0 and 1 but is {a}")


def decode_hw_action(a: float,
                     t: int,
                     ranges: ActionRangeTable) -> int:
    """
    Returns
    -------
    int
        value of hardware knob `t`: round(a * (v_max - v_min) + v_min) times the knob multiplier,
        rounding halves away from zero
    """
    _check_action(a)
    knob = ranges.knobs[t]
    v = int(round_half_away(a * (knob.v_max - knob.v_min) + knob.v_min))
    v = min(max(v, knob.v_min), knob.v_max)
    return v * knob.multiplier


def decode_bit_action(a: float,
                      b_min: int,
                      b_max: int) -> int:
    """Returns round(a * (b_max - b_min + 1) + b_min - 0.5) clamped to [b_min, b_max], a = 1 would give b_max + 1."""
    if b_min > b_max:
        raise ValueError(f"b_min {b_min} must not exceed b_max {b_max}")
    _check_action(a)
    bits = int(round_half_away(a * (b_max - b_min + 1) + b_min - 0.5))
    return min(max(bits, b_min), b_max)


def decode_hw_config(actions: list[float],
                     ranges: ActionRangeTable,
                     n_reg_row_a: int = DEFAULT_N_REG_ROW_A) -> ArchConfig:
    """Builds the configuration selected by the six hardware actions."""
    if len(actions) != len(HW_KNOBS):
        raise ValueError(f"need {len(HW_KNOBS)} hardware actions but got {len(actions)}")
    values = {name: decode_hw_action(a, t, ranges) for t, (name, a) in enumerate(zip(HW_KNOBS, actions))}
    return ArchConfig(device=ranges.device,
                      lut=LutCoreGeometry(m=values["m"], n=values["n"], k=values["k"], d_lbuf_a=values["d_lbuf_a"]),
                      dsp=DspCoreGeometry(n_reg_row_a=n_reg_row_a,
                                          d_dbuf_a=values["d_dbuf_a"],
                                          d_dbuf_w=values["d_dbuf_w"]))


def hw_knob_values(cfg: ArchConfig) -> dict[str, int]:
    return {"k": cfg.lut.k,
            "m": cfg.lut.m,
            "n": cfg.lut.n,
            "d_lbuf_a": cfg.lut.d_lbuf_a,
            "d_dbuf_a": cfg.dsp.d_dbuf_a,
            "d_dbuf_w": cfg.dsp.d_dbuf_w}
