"""
Value-exact model of the bit-serial LUT-core.

Both operands are split into binary planes and every (activation plane, weight plane)
pair is multiplied on the M x N DPU array, K reduction bits at a time.  A DPU computes
the popcount of the AND of two K-bit words, products are accumulated with weight
2^(i+j) where the MSB plane of a signed operand weighs negatively.
"""
import logging
from typing import Final

import numpy as np

from n3h_dse.cores.geometry import LutCoreGeometry
from n3h_dse.quantize.bit_plane import bitplane_decompose, plane_weights

logger = logging.getLogger(__name__)

# with 8-bit operands a 2^16 deep reduction stays far below the int64 accumulator range
MAX_REDUCTION_DEPTH: Final = 1 << 16


def check_gemm_shapes(a: np.ndarray,
                      w: np.ndarray):
    if a.ndim != 2 or w.ndim != 2:
        raise ValueError(f"operands must be matrices but have shapes {a.shape} and {w.shape}")
    if a.shape[1] != w.shape[0]:
        raise ValueError(f"cannot multiply {a.shape[0]}x{a.shape[1]} activations "
                         f"with {w.shape[0]}x{w.shape[1]} weights")
    if a.shape[1] > MAX_REDUCTION_DEPTH:
        raise ValueError(f"reduction depth {a.shape[1]} exceeds the accumulator bound {MAX_REDUCTION_DEPTH}")


def _popcount_and(a_planes: np.ndarray,
                  w_planes: np.ndarray) -> np.ndarray:
    # (B_a, m, k) x (B_w, k, n) -> (B_a, B_w, m, n) popcounts of all plane pairs
    return np.einsum("irk,jkc->ijrc", a_planes.astype(np.int64), w_planes.astype(np.int64))


def lut_gemm(a: np.ndarray,
             w: np.ndarray,
             b_a: int,
             b_w: int,
             geometry: LutCoreGeometry,
             a_signed: bool = False,
             w_signed: bool = True) -> np.ndarray:
    """
    Parameters
    ----------
    a : np.ndarray
        rows x depth integer activations representable in b_a bits
    w : np.ndarray
        depth x cols integer weights representable in b_w bits
    geometry : LutCoreGeometry
        DPU array the product is tiled over (M rows, N columns, K reduction bits)

    Returns
    -------
    np.ndarray
        The exact int64 product a @ w.

    Raises
    ------
    BitOverflowError
        if an operand entry does not fit its bit-width.
    """
    a = np.asarray(a, dtype=np.int64)
    w = np.asarray(w, dtype=np.int64)
    check_gemm_shapes(a, w)

    a_planes = bitplane_decompose(a, b_a, a_signed, operand="A").planes
    w_planes = bitplane_decompose(w, b_w, w_signed, operand="W").planes
    pair_weights = np.outer(plane_weights(b_a, a_signed), plane_weights(b_w, w_signed))

    rows, depth = a.shape
    cols = w.shape[1]
    result = np.zeros((rows, cols), dtype=np.int64)

    for r0 in range(0, rows, geometry.m):
        r1 = min(r0 + geometry.m, rows)
        for c0 in range(0, cols, geometry.n):
            c1 = min(c0 + geometry.n, cols)
            for k0 in range(0, depth, geometry.k):
                k1 = min(k0 + geometry.k, depth)
                counts = _popcount_and(a_planes[:, r0:r1, k0:k1], w_planes[:, k0:k1, c0:c1])
                result[r0:r1, c0:c1] += np.tensordot(pair_weights, counts, axes=([0, 1], [0, 1]))

    return result
