import logging
from dataclasses import dataclass

import numpy as np

from n3h_dse.quantize.kl_alloc import FilterAssignment
from n3h_dse.quantize.scheme import QuantScheme
from n3h_dse.quantize.uniform import QuantParams, covering_params, quantize_array

logger = logging.getLogger(__name__)


@dataclass
class HybridQuantizedLayer:
    """Weights of one layer quantized filter-wise for the two cores.

    Attributes
    ----------
    q_weights : np.ndarray
        integer weights with the source shape, LUT filters at b_wl bits and DSP filters at b_wd bits
    lut_params : QuantParams
        quantizer of the LUT filter group
    dsp_params : QuantParams
        quantizer of the DSP filter group
    assignment : FilterAssignment
        filter split the quantization was done for
    """
    q_weights: np.ndarray
    lut_params: QuantParams
    dsp_params: QuantParams
    assignment: FilterAssignment

    def filter_steps(self) -> np.ndarray:
        steps = np.full(self.q_weights.shape[0], self.dsp_params.step, dtype=np.float64)
        steps[self.assignment.lut_columns()] = self.lut_params.step
        return steps

    def dequantize(self) -> np.ndarray:
        step_shape = (-1,) + (1,) * (self.q_weights.ndim - 1)
        return self.q_weights.astype(np.float64) * self.filter_steps().reshape(step_shape)

    def gemm_weights(self) -> np.ndarray:
        """Integer weights as a (depth x c_out) GEMM operand."""
        return self.q_weights.reshape(self.q_weights.shape[0], -1).T


def hybrid_quantize_layer(weights: np.ndarray,
                          assignment: FilterAssignment,
                          scheme: QuantScheme) -> HybridQuantizedLayer:
    """
    Quantizes LUT-allocated filters at B_wL bits and DSP-allocated filters at B_wD bits,
    each group with a step covering the group's largest magnitude.
    """
    weights = np.asarray(weights, dtype=np.float64)
    layer_quant = scheme.layer(assignment.layer_index)

    if weights.shape[0] != assignment.c_out:
        raise ValueError(f"layer {assignment.layer_index} assignment covers {assignment.c_out} filters "
                         f"but weights hold {weights.shape[0]}")

    lut_columns = assignment.lut_columns()
    dsp_columns = assignment.dsp_columns()

    lut_params = covering_params(weights[lut_columns], layer_quant.b_wl)
    dsp_params = covering_params(weights[dsp_columns], layer_quant.b_wd)

    q_weights = np.zeros(weights.shape, dtype=np.int64)
    q_weights[lut_columns] = quantize_array(weights[lut_columns], lut_params)
    q_weights[dsp_columns] = quantize_array(weights[dsp_columns], dsp_params)

    logger.debug(f"hybrid_quantize_layer: layer {assignment.layer_index}, "
                 f"lut step {lut_params.step:.6g} at {lut_params.n_bits} bits, "
                 f"dsp step {dsp_params.step:.6g} at {dsp_params.n_bits} bits")

    return HybridQuantizedLayer(q_weights=q_weights,
                                lut_params=lut_params,
                                dsp_params=dsp_params,
                                assignment=assignment)
