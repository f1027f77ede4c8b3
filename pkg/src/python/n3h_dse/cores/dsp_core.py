import logging
from typing import Final

import numpy as np

from n3h_dse.cores.geometry import DspCoreGeometry
from n3h_dse.cores.lut_core import check_gemm_shapes
from n3h_dse.quantize.bit_plane import check_range

logger = logging.getLogger(__name__)

DSP_OPERAND_BITS: Final = 4


def _pad_to(m: np.ndarray,
            row_multiple: int,
            col_multiple: int) -> np.ndarray:
    rows = -(-m.shape[0] // row_multiple) * row_multiple
    cols = -(-m.shape[1] // col_multiple) * col_multiple
    padded = np.zeros((rows, cols), dtype=np.int64)
    padded[:m.shape[0], :m.shape[1]] = m
    return padded


def dsp_gemm(a: np.ndarray,
             w: np.ndarray,
             geometry: DspCoreGeometry,
             a_signed: bool = False) -> np.ndarray:
    """
    Tiles `a` into N_reg_row_a x 16 activation register blocks and `w` into 16 x 16 weight
    register blocks and accumulates the partial sums of every block pair.  Edge tiles are
    zero padded.  Activations narrower than 4 bits are zero extended, weights are 4-bit signed.

    Raises
    ------
    BitOverflowError
        if an operand does not fit 4 bits.
    """
    a = np.asarray(a, dtype=np.int64)
    w = np.asarray(w, dtype=np.int64)
    check_gemm_shapes(a, w)
    check_range(a, DSP_OPERAND_BITS, a_signed, operand="A")
    check_range(w, DSP_OPERAND_BITS, True, operand="W")

    tile_rows = geometry.n_reg_row_a
    tile_depth = geometry.n_reg_col_a
    tile_cols = geometry.n_reg_col_w

    a_padded = _pad_to(a, tile_rows, tile_depth)
    w_padded = _pad_to(w, tile_depth, tile_cols)
    result = np.zeros((a_padded.shape[0], w_padded.shape[1]), dtype=np.int64)

    for r0 in range(0, a_padded.shape[0], tile_rows):
        for c0 in range(0, w_padded.shape[1], tile_cols):
            partial_sums = result[r0:r0 + tile_rows, c0:c0 + tile_cols]
            for k0 in range(0, a_padded.shape[1], tile_depth):
                partial_sums += a_padded[r0:r0 + tile_rows, k0:k0 + tile_depth] @ \
                    w_padded[k0:k0 + tile_depth, c0:c0 + tile_cols]

    return result[:a.shape[0], :w.shape[1]]
