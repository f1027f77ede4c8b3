"""
Filter allocation between the LUT- and DSP-core.

Filters whose weight distribution suffers most from quantization at the lower of the two
core bit-widths are routed to the core with the higher bit-width.  Divergences come from
64-bin histograms of each filter's weights and of the same weights after a
quantize/dequantize pass, smoothed with 1e-6 on both sides.
"""
import logging
from typing import Final, FrozenSet

import numpy as np
from pydantic import BaseModel, root_validator
from scipy.stats import entropy

from n3h_dse.quantize.uniform import covering_params, dequantize_array, quantize_array, round_half_away

logger = logging.getLogger(__name__)

HISTOGRAM_BINS: Final = 64
SMOOTHING_EPSILON: Final = 1e-6


def lut_filter_count(ratio: float,
                     c_out: int) -> int:
    return int(round_half_away(ratio * c_out))


class FilterAssignment(BaseModel):
    """Split of one layer's filters between the two cores.
    #
    # Attributes:
    #     layer_index:  1-based layer index
    #     ratio:        Filter_LUT / Filter_all
    #     lut_filters:  1-based ids of the filters computed by the LUT-core
    #     dsp_filters:  1-based ids of the filters computed by the DSP-core
    """
    layer_index: int
    ratio: float
    lut_filters: FrozenSet[int]
    dsp_filters: FrozenSet[int]

    class Config:
        frozen = True

    @root_validator(skip_on_failure=True)
    def sets_partition_filters(cls, values):
        lut_filters = values["lut_filters"]
        dsp_filters = values["dsp_filters"]
        c_out = len(lut_filters) + len(dsp_filters)

        if len(lut_filters & dsp_filters) > 0:
            raise ValueError(f"filters {sorted(lut_filters & dsp_filters)} are assigned to both cores")
        if (lut_filters | dsp_filters) != set(range(1, c_out + 1)):
            raise ValueError(f"assigned filters do not cover ids 1..{c_out}")
        if not 0.0 <= values["ratio"] <= 1.0:
            raise ValueError(f"ratio must be in [0, 1] but is {values['ratio']}")
        if lut_filter_count(values["ratio"], c_out) != len(lut_filters):
            raise ValueError(f"ratio {values['ratio']} of {c_out} filters needs "
                             f"{lut_filter_count(values['ratio'], c_out)} LUT filters "
                             f"but {len(lut_filters)} are assigned")
        return values

    @property
    def c_out(self) -> int:
        return len(self.lut_filters) + len(self.dsp_filters)

    def lut_columns(self) -> np.ndarray:
        """0-based, sorted output column indexes computed by the LUT-core."""
        return np.array(sorted(self.lut_filters), dtype=np.int64) - 1

    def dsp_columns(self) -> np.ndarray:
        return np.array(sorted(self.dsp_filters), dtype=np.int64) - 1

    @classmethod
    def from_lut_filters(cls,
                         layer_index: int,
                         c_out: int,
                         lut_filters: set[int]) -> "FilterAssignment":
        return cls(layer_index=layer_index,
                   ratio=len(lut_filters) / c_out,
                   lut_filters=frozenset(lut_filters),
                   dsp_filters=frozenset(set(range(1, c_out + 1)) - set(lut_filters)))

    @classmethod
    def contiguous(cls,
                   layer_index: int,
                   c_out: int,
                   ratio: float) -> "FilterAssignment":
        """Assigns the first round(ratio * c_out) filters to the LUT-core."""
        lut_count = lut_filter_count(ratio, c_out)
        return cls(layer_index=layer_index,
                   ratio=ratio,
                   lut_filters=frozenset(range(1, lut_count + 1)),
                   dsp_filters=frozenset(range(lut_count + 1, c_out + 1)))


def filter_kl_divergences(weights: np.ndarray,
                          n_bits: int) -> np.ndarray:
    """
    Parameters
    ----------
    weights : np.ndarray
        layer weights with filters along the first axis, shape (c_out, ...)
    n_bits : int
        bit-width of the quantize/dequantize pass; the step covers the whole layer

    Returns
    -------
    np.ndarray
        D_KL(original || quantized) per filter.
    """
    weights = np.asarray(weights, dtype=np.float64)
    if weights.ndim == 0 or weights.shape[0] == 0 or weights.size == 0:
        raise ValueError("cannot allocate filters of an empty weight tensor")

    per_filter = weights.reshape(weights.shape[0], -1)
    params = covering_params(per_filter, n_bits)
    dequantized = dequantize_array(quantize_array(per_filter, params), params)

    divergences = np.zeros(per_filter.shape[0], dtype=np.float64)
    for f in range(per_filter.shape[0]):
        low = min(per_filter[f].min(), dequantized[f].min())
        high = max(per_filter[f].max(), dequantized[f].max())
        if low == high:
            continue
        reference, edges = np.histogram(per_filter[f], bins=HISTOGRAM_BINS, range=(low, high))
        candidate, _ = np.histogram(dequantized[f], bins=edges)
        divergences[f] = entropy(reference + SMOOTHING_EPSILON, candidate + SMOOTHING_EPSILON)

    return divergences


def allocate_by_divergence(divergences: np.ndarray,
                           ratio: float,
                           b_wl: int,
                           b_wd: int = 4,
                           layer_index: int = 1) -> FilterAssignment:
    """
    Routes the filters with the largest divergences to the core with the higher weight bit-width
    (the LUT-core when both are equal).  Ties are broken by the lower filter id.
    """
    divergences = np.asarray(divergences, dtype=np.float64)
    c_out = divergences.shape[0]
    if c_out == 0:
        raise ValueError("cannot allocate an empty filter list")
    if not 0.0 <= ratio <= 1.0:
        raise ValueError(f"ratio must be in [0, 1] but is {ratio}")

    filter_ids = np.arange(1, c_out + 1)
    # primary key: divergence descending, secondary: filter id ascending
    order = filter_ids[np.lexsort((filter_ids, -divergences))]

    lut_count = lut_filter_count(ratio, c_out)
    if b_wl >= b_wd:
        lut_filters = set(order[:lut_count].tolist())
    else:
        lut_filters = set(order[c_out - lut_count:].tolist())

    assignment = FilterAssignment(layer_index=layer_index,
                                  ratio=ratio,
                                  lut_filters=frozenset(lut_filters),
                                  dsp_filters=frozenset(set(filter_ids.tolist()) - lut_filters))

    logger.debug(f"allocate_by_divergence: layer {layer_index}, {lut_count} of {c_out} filters to LUT-core")

    return assignment


def kl_filter_alloc(weights: np.ndarray,
                    ratio: float,
                    b_wl: int,
                    b_wd: int = 4,
                    layer_index: int = 1) -> FilterAssignment:
    divergences = filter_kl_divergences(weights, min(b_wl, b_wd))
    return allocate_by_divergence(divergences, ratio, b_wl, b_wd, layer_index)
