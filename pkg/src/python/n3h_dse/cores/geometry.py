import logging
from typing import Final

from pydantic import BaseModel, validator

logger = logging.getLogger(__name__)

DSP_REGISTER_COLUMNS: Final = 16
BUFFER_DEPTH_UNIT: Final = 1024


class LutCoreGeometry(BaseModel):
    """Bit-serial LUT-core array and buffers.
    #
    # Attributes:
    #     m:         DPU array rows (activation rows consumed per cycle)
    #     n:         DPU array columns (filters consumed per cycle)
    #     k:         bits each DPU reads per operand per cycle, a multiple of 64
    #     d_lbuf_a:  activation buffer depth in K-bit words per DPU row
    #     d_lbuf_w:  weight buffer depth, fixed to 1024 since the buffer holds one tile at once
    """
    m: int
    n: int
    k: int
    d_lbuf_a: int = BUFFER_DEPTH_UNIT
    d_lbuf_w: int = BUFFER_DEPTH_UNIT

    class Config:
        frozen = True

    @validator("m", "n", "k", "d_lbuf_a", "d_lbuf_w")
    def is_positive(cls, value, field):
        if value < 1:
            raise ValueError(f"{field.name} must be >= 1 but is {value}")
        return value

    @validator("k")
    def k_is_multiple_of_64(cls, value):
        if value % 64 != 0:
            raise ValueError(f"k must be a multiple of 64 but is {value}")
        return value


class DspCoreGeometry(BaseModel):
    """Bit-parallel DSP-core register arrays and buffers.
    #
    # Attributes:
    #     n_reg_row_a:  activation register rows, one row filled per cycle
    #     n_reg_col_a:  activation register columns, fixed to 16
    #     n_reg_col_w:  weight register columns, fixed to 16
    #     d_dbuf_a:     activation buffer depth in 64-bit words per register row
    #     d_dbuf_w:     weight buffer depth in 64-bit words per weight buffer
    """
    n_reg_row_a: int
    n_reg_col_a: int = DSP_REGISTER_COLUMNS
    n_reg_col_w: int = DSP_REGISTER_COLUMNS
    d_dbuf_a: int = BUFFER_DEPTH_UNIT
    d_dbuf_w: int = BUFFER_DEPTH_UNIT

    class Config:
        frozen = True

    @validator("n_reg_row_a", "d_dbuf_a", "d_dbuf_w")
    def is_positive(cls, value, field):
        if value < 1:
            raise ValueError(f"{field.name} must be >= 1 but is {value}")
        return value

    @validator("n_reg_col_a", "n_reg_col_w")
    def columns_fixed(cls, value, field):
        if value != DSP_REGISTER_COLUMNS:
            raise ValueError(f"{field.name} is fixed to {DSP_REGISTER_COLUMNS} but is {value}")
        return value
