from typing import Final

from pydantic import BaseModel, validator

FREQ_MHZ: Final = 100
CYCLES_PER_MS: Final = FREQ_MHZ * 1000


def cycles_to_ms(cycles: int) -> float:
    return cycles / CYCLES_PER_MS


class CycleTunables(BaseModel):
    """Cycle constants of the latency model, all calibration lives here.
    #
    # Attributes:
    #     bus_bytes:              bytes moved per Fetch/Result beat (64-bit bus)
    #     max_beats:              beats one Fetch/Result instruction can move, larger transfers are chunked
    #     sync_cycles:            cycles a signalling Sync occupies its engine
    #     dsp_weight_fill_cycles: cycles to load the DSP-core weight register array
    #     dsp_drain_cycles:       cycles to drain the DSP-core pipeline after a register tile
    #     lut_bits_pack:          reduction bits a DPU consumes per element and cycle
    #     tile_rows:              activation rows per scheduling tile
    #     tile_cols:              filters per scheduling tile
    #     dsp_activation_bits:    activation width on the DSP-core (narrower inputs are zero padded)
    #     result_bits:            bits written back per output element
    """
    bus_bytes: int = 8
    max_beats: int = 65535
    sync_cycles: int = 1
    dsp_weight_fill_cycles: int = 2
    dsp_drain_cycles: int = 1
    lut_bits_pack: int = 1
    tile_rows: int = 512
    tile_cols: int = 256
    dsp_activation_bits: int = 4
    result_bits: int = 8

    class Config:
        frozen = True

    @validator("bus_bytes", "max_beats", "lut_bits_pack", "tile_rows", "tile_cols", "dsp_activation_bits",
               "result_bits")
    def is_positive(cls, value, field):
        if value < 1:
            raise ValueError(f"{field.name} must be >= 1 but is {value}")
        return value

    @validator("sync_cycles", "dsp_weight_fill_cycles", "dsp_drain_cycles")
    def is_not_negative(cls, value, field):
        if value < 0:
            raise ValueError(f"{field.name} must be >= 0 but is {value}")
        return value

    @validator("max_beats")
    def fits_beat_field(cls, value):
        if value > 0xFFFF:
            raise ValueError(f"max_beats must fit the 16-bit beat field but is {value}")
        return value

    @property
    def bus_bits(self) -> int:
        return self.bus_bytes * 8


DEFAULT_TUNABLES: Final = CycleTunables()
