import functools
import logging
from typing import Union

import dask.bag as dask_bag
from pydantic import BaseModel

from n3h_dse.cores.geometry import DspCoreGeometry, LutCoreGeometry
from n3h_dse.quantize.kl_alloc import lut_filter_count
from n3h_dse.sched.arch_config import ArchConfig
from n3h_dse.sched.instr import Core
from n3h_dse.sched.program import gen_core_program
from n3h_dse.sched.simulator import LatencyBreakdown, simulate
from n3h_dse.sched.tunables import DEFAULT_TUNABLES, CycleTunables, cycles_to_ms
from n3h_dse.workload.layer_spec import GemmShape, LayerSpec, NetworkSpec, im2col_dims, mac_count

logger = logging.getLogger(__name__)


@functools.lru_cache(maxsize=1 << 16)
def _cached_core_latency(core: Core,
                         rows: int,
                         depth: int,
                         cols: int,
                         geometry: Union[LutCoreGeometry, DspCoreGeometry],
                         b_a: int,
                         b_w: int,
                         tunables: CycleTunables) -> LatencyBreakdown:
    program = gen_core_program(GemmShape(rows=rows, depth=depth, cols=cols), core, geometry, b_a, b_w, tunables)
    return simulate(program, tunables)


def lut_core_latency(shape: GemmShape,
                     geometry: LutCoreGeometry,
                     b_a: int,
                     b_wl: int,
                     tunables: CycleTunables = DEFAULT_TUNABLES) -> LatencyBreakdown:
    """
    LUT-core latency of `shape`, a function of (B_a, B_wL, M, K, N, D_Lbuf_a) and the workload only
    while D_Lbuf_w keeps its fixed depth.
    """
    if shape.cols == 0:
        return LatencyBreakdown()
    return _cached_core_latency(Core.LUT, shape.rows, shape.depth, shape.cols, geometry, b_a, b_wl, tunables)


def dsp_core_latency(shape: GemmShape,
                     geometry: DspCoreGeometry,
                     tunables: CycleTunables = DEFAULT_TUNABLES) -> LatencyBreakdown:
    """DSP-core latency of `shape`, a function of (N_reg_row_a, D_Dbuf_a, D_Dbuf_w) and the workload only."""
    if shape.cols == 0:
        return LatencyBreakdown()
    return _cached_core_latency(Core.DSP, shape.rows, shape.depth, shape.cols, geometry, 0, 0, tunables)


class LayerLatency(BaseModel):
    """Latency of one layer split between both cores.
    #
    # Attributes:
    #     index:     1-based layer index, 0 outside a network
    #     lut_cols:  filters computed by the LUT-core
    #     dsp_cols:  filters computed by the DSP-core
    #     lut:       LUT-core breakdown, all zero without filters
    #     dsp:       DSP-core breakdown, all zero without filters
    """
    index: int = 0
    lut_cols: int
    dsp_cols: int
    lut: LatencyBreakdown
    dsp: LatencyBreakdown

    class Config:
        frozen = True

    @property
    def ratio(self) -> float:
        return self.lut_cols / (self.lut_cols + self.dsp_cols)

    @property
    def cycles(self) -> int:
        return max(self.lut.total, self.dsp.total)

    @property
    def ms(self) -> float:
        return cycles_to_ms(self.cycles)


def split_latency(shape: GemmShape,
                  cfg: ArchConfig,
                  b_a: int,
                  b_wl: int,
                  lut_cols: int,
                  tunables: CycleTunables = DEFAULT_TUNABLES,
                  index: int = 0) -> LayerLatency:
    """Returns the latency of `shape` with its first `lut_cols` filters on the LUT-core and the rest on the DSP-core."""
    if not 0 <= lut_cols <= shape.cols:
        raise ValueError(f"lut_cols must be between 0 and {shape.cols} but is {lut_cols}")
    dsp_cols = shape.cols - lut_cols
    return LayerLatency(index=index,
                        lut_cols=lut_cols,
                        dsp_cols=dsp_cols,
                        lut=lut_core_latency(shape.with_cols(lut_cols), cfg.lut, b_a, b_wl, tunables),
                        dsp=dsp_core_latency(shape.with_cols(dsp_cols), cfg.dsp, tunables))


def layer_latency(shape: GemmShape,
                  cfg: ArchConfig,
                  layer: LayerSpec,
                  tunables: CycleTunables = DEFAULT_TUNABLES) -> LayerLatency:
    """
    Returns the latency of `layer` under the split ratio and bit-widths `cfg` holds for it.

    The layer latency is the slower of both cores, a core without filters contributes 0.
    """
    ratio = cfg.ratio(layer.index)
    if layer.is_first_or_last and ratio != 1.0:
        raise ValueError(f"{layer} is a first/last layer and must run on the LUT-core only, but its ratio is {ratio}")
    layer_quant = cfg.layer_quant(layer.index)
    return split_latency(shape, cfg, layer_quant.b_a, layer_quant.b_wl, lut_filter_count(ratio, shape.cols),
                         tunables, layer.index)


class NetworkLatency(BaseModel):
    network: str
    layers: list[LayerLatency]
    cycles: int
    macs: int

    class Config:
        frozen = True

    @property
    def ms(self) -> float:
        return cycles_to_ms(self.cycles)

    @property
    def fps(self) -> float:
        return 1000.0 / self.ms if self.cycles > 0 else 0.0

    @property
    def gops(self) -> float:
        return 2 * self.macs / (self.ms / 1000.0) / 1e9 if self.cycles > 0 else 0.0


def network_latency(net: NetworkSpec,
                    cfg: ArchConfig,
                    tunables: CycleTunables = DEFAULT_TUNABLES,
                    num_workers: int = 1) -> NetworkLatency:
    """
    Returns the sum of the layer latencies of `net` under `cfg`, layers synchronize with each other.

    Parameters
    ----------
    num_workers
        if > 1, layers are simulated concurrently with the dask threaded scheduler.
    """
    cfg.check_network(net)

    def latency_of(layer: LayerSpec) -> LayerLatency:
        return layer_latency(im2col_dims(layer), cfg, layer, tunables)

    if num_workers > 1:
        bag = dask_bag.from_sequence(net.layers, npartitions=min(num_workers, len(net.layers)))
        layers = bag.map(latency_of).compute(scheduler="threads", num_workers=num_workers)
    else:
        layers = [latency_of(layer) for layer in net.layers]

    result = NetworkLatency(network=net.name,
                            layers=layers,
                            cycles=sum(layer.cycles for layer in layers),
                            macs=sum(mac_count(layer) for layer in net.layers))

    logger.info(f"network_latency: {net.name} on {cfg.device} takes {result.cycles} cycles ({result.ms:.3f} ms)")

    return result
