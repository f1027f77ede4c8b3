import logging

import dask
import numpy as np

from n3h_dse.cores.dsp_core import dsp_gemm
from n3h_dse.cores.geometry import DspCoreGeometry, LutCoreGeometry
from n3h_dse.cores.lut_core import check_gemm_shapes, lut_gemm
from n3h_dse.quantize.kl_alloc import FilterAssignment
from n3h_dse.quantize.scheme import QuantScheme

logger = logging.getLogger(__name__)


def hetero_gemm(a: np.ndarray,
                w: np.ndarray,
                assignment: FilterAssignment,
                scheme: QuantScheme,
                lut_geometry: LutCoreGeometry,
                dsp_geometry: DspCoreGeometry,
                a_signed: bool = False,
                concurrent: bool = True) -> np.ndarray:
    """
    Computes the LUT-allocated output columns of a @ w on the LUT-core at (B_a, B_wL) and the
    DSP-allocated columns on the DSP-core, then interleaves them back into filter order.

    Parameters
    ----------
    a : np.ndarray
        rows x depth integer activations
    w : np.ndarray
        depth x c_out hybrid-quantized integer weights, column f-1 holding filter f
    concurrent : bool
        run both cores as parallel dask tasks (threaded scheduler) instead of one after the other
    """
    a = np.asarray(a, dtype=np.int64)
    w = np.asarray(w, dtype=np.int64)
    check_gemm_shapes(a, w)
    if w.shape[1] != assignment.c_out:
        raise ValueError(f"layer {assignment.layer_index} assignment covers {assignment.c_out} filters "
                         f"but weights have {w.shape[1]} columns")

    layer_quant = scheme.layer(assignment.layer_index)
    lut_columns = assignment.lut_columns()
    dsp_columns = assignment.dsp_columns()

    # a core without filters stays idle and never checks the operand widths
    def lut_side() -> np.ndarray:
        if len(lut_columns) == 0:
            return np.zeros((a.shape[0], 0), dtype=np.int64)
        return lut_gemm(a, w[:, lut_columns], layer_quant.b_a, layer_quant.b_wl, lut_geometry, a_signed=a_signed)

    def dsp_side() -> np.ndarray:
        if len(dsp_columns) == 0:
            return np.zeros((a.shape[0], 0), dtype=np.int64)
        return dsp_gemm(a, w[:, dsp_columns], dsp_geometry, a_signed=a_signed)

    if concurrent:
        lut_result, dsp_result = dask.compute(dask.delayed(lut_side)(), dask.delayed(dsp_side)(),
                                              scheduler="threads")
    else:
        lut_result, dsp_result = lut_side(), dsp_side()

    result = np.zeros((a.shape[0], w.shape[1]), dtype=np.int64)
    result[:, lut_columns] = lut_result
    result[:, dsp_columns] = dsp_result

    logger.debug(f"hetero_gemm: layer {assignment.layer_index}, {len(lut_columns)} LUT and "
                 f"{len(dsp_columns)} DSP columns")

    return result
