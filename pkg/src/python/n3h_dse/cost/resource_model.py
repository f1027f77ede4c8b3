"""
Analytic resource models of the heterogeneous core.

Buffers are built from 1024 deep BRAM36 blocks of which 32 bits are used.  The DSP-core
keeps all device DSPs busy and costs about 1000 LUTs of control logic; the LUT-core cost
is a linear fit over its DPU array.
"""
import logging
import math
from fractions import Fraction
from typing import Final

from pydantic import BaseModel

from n3h_dse.cores.geometry import DspCoreGeometry, LutCoreGeometry
from n3h_dse.cost.device import DeviceProfile
from n3h_dse.sched.arch_config import ArchConfig

logger = logging.getLogger(__name__)

BRAM_DEPTH: Final = 1024
BRAM_USED_BITS: Final = 32
DSP_OPERAND_BITS: Final = 4

# LUT-core fit: M * N * (a * K + b + c) + d
LUT_FIT_A: Final = Fraction("1.17")
LUT_FIT_B: Final = Fraction("120.1")
LUT_FIT_C: Final = Fraction("44.1")
LUT_FIT_D: Final = Fraction("718")

DSP_CORE_LUTS: Final = 1000


def _ceil_div(numerator: int,
              denominator: int) -> int:
    return -(-numerator // denominator)


def bram_dsp_core(g: DspCoreGeometry) -> int:
    activation_buffers = g.n_reg_col_a * _ceil_div(g.d_dbuf_a, BRAM_DEPTH)
    # one weight buffer feeds two weight register columns
    weight_buffers = (g.n_reg_col_w // 2) * _ceil_div(g.d_dbuf_w, BRAM_DEPTH)
    return _ceil_div(g.n_reg_row_a * DSP_OPERAND_BITS, BRAM_USED_BITS) * (activation_buffers + weight_buffers)


def lut_lut_core(m: int,
                 k: int,
                 n: int) -> int:
    # exact rational arithmetic so the ceiling never suffers from float error
    return math.ceil(m * n * (LUT_FIT_A * k + LUT_FIT_B + LUT_FIT_C) + LUT_FIT_D)


def bram_lut_core(g: LutCoreGeometry) -> int:
    return _ceil_div(g.k, BRAM_USED_BITS) * (g.m * _ceil_div(g.d_lbuf_a, BRAM_DEPTH) +
                                             g.n * _ceil_div(g.d_lbuf_w, BRAM_DEPTH))


class ResourceReport(BaseModel):
    """Estimated usage of one configuration on one device.
    #
    # Attributes:
    #     device:          device name
    #     lut_used:        LUT-core fit plus the DSP-core constant
    #     bram_used:       LUT-core plus DSP-core BRAM36 blocks
    #     dsp_used:        DSP slices, always the device total
    #     *_total:         device totals
    #     *_margin:        total - used, negative when over budget
    #     lut_core_luts, dsp_core_luts, lut_core_brams, dsp_core_brams:
    #                      per-core contributions
    #     d_lbuf_w:        LUT-core weight buffer depth, not a search knob
    #     feasible:        true if every resource fits
    """
    device: str
    lut_used: int
    bram_used: int
    dsp_used: int
    lut_total: int
    bram_total: int
    dsp_total: int
    lut_margin: int
    bram_margin: int
    dsp_margin: int
    lut_core_luts: int
    dsp_core_luts: int
    lut_core_brams: int
    dsp_core_brams: int
    d_lbuf_w: int
    feasible: bool

    def violations(self) -> list[str]:
        return [f"{name} over budget by {-margin}"
                for name, margin in (("LUT", self.lut_margin), ("BRAM", self.bram_margin), ("DSP", self.dsp_margin))
                if margin < 0]

    def summary(self) -> str:
        status = "feasible" if self.feasible else "infeasible (" + ", ".join(self.violations()) + ")"
        return (f"{self.device}: LUT {self.lut_used}/{self.lut_total}, BRAM {self.bram_used}/{self.bram_total}, "
                f"DSP {self.dsp_used}/{self.dsp_total}, {status}")


def check_fit(cfg: ArchConfig,
              dev: DeviceProfile) -> ResourceReport:
    lut_core_luts = lut_lut_core(cfg.lut.m, cfg.lut.k, cfg.lut.n)
    lut_core_brams = bram_lut_core(cfg.lut)
    dsp_core_brams = bram_dsp_core(cfg.dsp)

    lut_used = lut_core_luts + DSP_CORE_LUTS
    bram_used = lut_core_brams + dsp_core_brams
    dsp_used = dev.dsp_total

    report = ResourceReport(device=dev.name,
                            lut_used=lut_used,
                            bram_used=bram_used,
                            dsp_used=dsp_used,
                            lut_total=dev.lut_total,
                            bram_total=dev.bram36_total,
                            dsp_total=dev.dsp_total,
                            lut_margin=dev.lut_total - lut_used,
                            bram_margin=dev.bram36_total - bram_used,
                            dsp_margin=dev.dsp_total - dsp_used,
                            lut_core_luts=lut_core_luts,
                            dsp_core_luts=DSP_CORE_LUTS,
                            lut_core_brams=lut_core_brams,
                            dsp_core_brams=dsp_core_brams,
                            d_lbuf_w=cfg.lut.d_lbuf_w,
                            feasible=lut_used <= dev.lut_total and bram_used <= dev.bram36_total)

    logger.debug(f"check_fit: {report.summary()}")

    return report
