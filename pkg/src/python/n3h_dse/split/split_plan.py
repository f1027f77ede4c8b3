"""
Per-layer workload split between the LUT-core and the DSP-core.

A layer with c_out filters has c_out + 1 candidate splits, k filters on the LUT-core and
c_out - k on the DSP-core.  Every candidate is simulated and the fastest kept, ties go to
the larger LUT share.
"""
import logging
from typing import Callable, Optional

import dask.bag as dask_bag
from pydantic import BaseModel

from n3h_dse.quantize.scheme import QuantScheme
from n3h_dse.sched.arch_config import ArchConfig
from n3h_dse.sched.latency import dsp_core_latency, lut_core_latency, split_latency
from n3h_dse.sched.tunables import DEFAULT_TUNABLES, CycleTunables, cycles_to_ms
from n3h_dse.workload.layer_spec import GemmShape, LayerSpec, NetworkSpec, im2col_dims

logger = logging.getLogger(__name__)


class ScanPoint(BaseModel):
    lut_filters: int
    ratio: float
    lut_cycles: int
    dsp_cycles: int

    class Config:
        frozen = True

    @property
    def cycles(self) -> int:
        return max(self.lut_cycles, self.dsp_cycles)


class SplitChoice(BaseModel):
    ratio: float
    lut_filters: int
    cycles: int
    lut_cycles: int
    dsp_cycles: int

    class Config:
        frozen = True


def sweep_ratios(c_out: int,
                 lut_cost: Callable[[int], int],
                 dsp_cost: Callable[[int], int]) -> tuple[SplitChoice, list[ScanPoint]]:
    """
    Evaluates all c_out + 1 splits, `lut_cost(k)` and `dsp_cost(c)` return the cycles of a core
    running k and c filters.

    Returns
    -------
    tuple[SplitChoice, list[ScanPoint]]
        the fastest split (ties resolved toward the larger LUT share) and the full scan
    """
    if c_out < 1:
        raise ValueError(f"c_out must be >= 1 but is {c_out}")

    scan = [ScanPoint(lut_filters=k, ratio=k / c_out, lut_cycles=lut_cost(k), dsp_cycles=dsp_cost(c_out - k))
            for k in range(c_out + 1)]
    best = scan[0]
    for point in scan[1:]:
        if point.cycles <= best.cycles:
            best = point

    return SplitChoice(ratio=best.ratio,
                       lut_filters=best.lut_filters,
                       cycles=best.cycles,
                       lut_cycles=best.lut_cycles,
                       dsp_cycles=best.dsp_cycles), scan


def _core_costs(shape: GemmShape,
                cfg: ArchConfig,
                b_a: int,
                b_wl: int,
                tunables: CycleTunables) -> tuple[Callable[[int], int], Callable[[int], int]]:
    def lut_cost(cols: int) -> int:
        return lut_core_latency(shape.with_cols(cols), cfg.lut, b_a, b_wl, tunables).total

    def dsp_cost(cols: int) -> int:
        return dsp_core_latency(shape.with_cols(cols), cfg.dsp, tunables).total

    return lut_cost, dsp_cost


def scan_ratios(shape: GemmShape,
                cfg: ArchConfig,
                b_a: int,
                b_wl: int,
                tunables: CycleTunables = DEFAULT_TUNABLES) -> list[ScanPoint]:
    return sweep_ratios(shape.cols, *_core_costs(shape, cfg, b_a, b_wl, tunables))[1]


def optimal_ratio(shape: GemmShape,
                  cfg: ArchConfig,
                  b_a: int,
                  b_wl: int,
                  tunables: CycleTunables = DEFAULT_TUNABLES) -> SplitChoice:
    """Returns the split of `shape` with the lowest layer latency at (b_a, b_wl) under the geometries of `cfg`."""
    choice, _ = sweep_ratios(shape.cols, *_core_costs(shape, cfg, b_a, b_wl, tunables))
    return choice


class LayerSplit(BaseModel):
    """Split chosen for one layer.
    #
    # Attributes:
    #     index:        1-based layer index
    #     name:         layer name
    #     c_out:        filters of the layer
    #     ratio:        LUT-core filter share, lut_filters / c_out
    #     lut_filters:  filters computed by the LUT-core
    #     cycles:       layer latency at the chosen split
    #     lut_cycles:   LUT-core latency at the chosen split
    #     dsp_cycles:   DSP-core latency at the chosen split
    #     rule:         'optimal', 'depthwise-zero' when the DSP-core alone is fastest for a depthwise layer,
    #                   'depthwise-forced' when a depthwise layer was put on the DSP-core although a split
    #                   is faster, or 'lut-only' for 8-bit first/last layers
    """
    index: int
    name: str = ""
    c_out: int
    ratio: float
    lut_filters: int
    cycles: int
    lut_cycles: int
    dsp_cycles: int
    rule: str = "optimal"

    class Config:
        frozen = True


class SplitPlan(BaseModel):
    network: str
    device: str
    layers: list[LayerSplit]

    class Config:
        frozen = True

    def ratios(self) -> list[float]:
        return [layer.ratio for layer in self.layers]

    @property
    def cycles(self) -> int:
        return sum(layer.cycles for layer in self.layers)

    @property
    def ms(self) -> float:
        return cycles_to_ms(self.cycles)


def plan_layer(layer: LayerSpec,
               cfg: ArchConfig,
               b_a: int,
               b_wl: int,
               tunables: CycleTunables = DEFAULT_TUNABLES,
               force_depthwise_dsp: bool = False) -> LayerSplit:
    """
    Chooses the split of one layer.

    First/last layers run on the LUT-core only.  A depthwise layer is also timed on the DSP-core
    alone and keeps whichever is faster, ties go to the DSP-core.  With `force_depthwise_dsp`
    depthwise layers run on the DSP-core alone even when a split is faster.
    """
    shape = im2col_dims(layer)

    if layer.is_first_or_last:
        latency = split_latency(shape, cfg, b_a, b_wl, shape.cols, tunables)
        choice = SplitChoice(ratio=1.0, lut_filters=shape.cols, cycles=latency.cycles,
                             lut_cycles=latency.lut.total, dsp_cycles=latency.dsp.total)
        rule = "lut-only"
    else:
        choice = optimal_ratio(shape, cfg, b_a, b_wl, tunables)
        rule = "optimal"
        if layer.is_depthwise:
            on_dsp = split_latency(shape, cfg, b_a, b_wl, 0, tunables)
            if on_dsp.cycles <= choice.cycles:
                rule = "depthwise-zero"
            elif force_depthwise_dsp:
                rule = "depthwise-forced"
            if rule != "optimal":
                choice = SplitChoice(ratio=0.0, lut_filters=0, cycles=on_dsp.cycles, lut_cycles=0,
                                     dsp_cycles=on_dsp.dsp.total)

    logger.debug(f"plan_layer: {layer} ratio {choice.ratio:.4f} ({choice.lut_filters}/{layer.c_out}), "
                 f"{choice.cycles} cycles, {rule}")

    return LayerSplit(index=layer.index,
                      name=layer.name,
                      c_out=layer.c_out,
                      ratio=choice.ratio,
                      lut_filters=choice.lut_filters,
                      cycles=choice.cycles,
                      lut_cycles=choice.lut_cycles,
                      dsp_cycles=choice.dsp_cycles,
                      rule=rule)


class _LayerPlanner:

    def __init__(self,
                 cfg: ArchConfig,
                 scheme: QuantScheme,
                 tunables: CycleTunables,
                 force_depthwise_dsp: bool):
        self.cfg = cfg
        self.scheme = scheme
        self.tunables = tunables
        self.force_depthwise_dsp = force_depthwise_dsp

    def plan_layer_list(self,
                        layers: list[LayerSpec]) -> list[LayerSplit]:
        splits = []
        for layer in layers:
            layer_quant = self.scheme.layer(layer.index)
            splits.append(plan_layer(layer, self.cfg, layer_quant.b_a, layer_quant.b_wl, self.tunables,
                                     self.force_depthwise_dsp))
        return splits


def plan_network(net: NetworkSpec,
                 cfg: ArchConfig,
                 scheme: Optional[QuantScheme] = None,
                 tunables: CycleTunables = DEFAULT_TUNABLES,
                 num_workers: int = 1,
                 force_depthwise_dsp: bool = False) -> SplitPlan:
    """
    Chooses the split of every layer of `net`.

    Parameters
    ----------
    scheme
        bit-widths of every layer, defaults to the scheme of `cfg`
    num_workers
        if > 1, layers are planned concurrently with the dask threaded scheduler,
        the plan does not depend on it.
    force_depthwise_dsp
        put every depthwise layer on the DSP-core alone, see `plan_layer`
    """
    scheme = cfg.scheme if scheme is None else scheme
    if scheme is None:
        raise ValueError("plan_network needs a quantization scheme")
    scheme.check_network(net)

    logger.info(f"plan_network: entry, {net.name} with {len(net.layers)} layers on {cfg.device}")

    planner = _LayerPlanner(cfg, scheme, tunables, force_depthwise_dsp)
    if num_workers > 1:
        number_of_partitions = min(num_workers, len(net.layers))
        bag = dask_bag.from_sequence(net.layers, npartitions=number_of_partitions)
        bag = bag.map_partitions(planner.plan_layer_list)
        layer_splits = sorted(bag.compute(scheduler="threads", num_workers=num_workers), key=lambda s: s.index)
    else:
        layer_splits = planner.plan_layer_list(net.layers)

    plan = SplitPlan(network=net.name, device=cfg.device, layers=layer_splits)

    logger.info(f"plan_network: exit, {plan.cycles} cycles ({plan.ms:.3f} ms)")

    return plan


def apply_plan(cfg: ArchConfig,
               scheme: QuantScheme,
               plan: SplitPlan) -> ArchConfig:
    """Returns `cfg` carrying `scheme` and the ratios of `plan`."""
    return cfg.with_scheme(scheme).with_ratios(plan.ratios())


def is_unimodal(values: list[int]) -> bool:
    """True if `values` never increase before their first minimum and never decrease after it."""
    lowest = values.index(min(values))
    falling = all(a >= b for a, b in zip(values[:lowest], values[1:lowest + 1]))
    rising = all(a <= b for a, b in zip(values[lowest:], values[lowest + 1:]))
    return falling and rising
