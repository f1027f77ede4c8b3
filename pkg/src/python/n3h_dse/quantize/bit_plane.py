import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)


class BitOverflowError(ValueError):
    """Raised when a matrix entry cannot be represented with the requested bit-width."""

    def __init__(self,
                 operand: str,
                 row: int,
                 col: int,
                 value: int,
                 n_bits: int,
                 signed: bool):
        low, high = value_range(n_bits, signed)
        kind = "signed" if signed else "unsigned"
        super().__init__(f"{operand}[{row}, {col}] = {value} is outside the {n_bits}-bit {kind} range [{low}, {high}]")
        self.operand = operand
        self.row = row
        self.col = col
        self.value = value


def value_range(n_bits: int,
                signed: bool) -> tuple[int, int]:
    if signed:
        return -(1 << (n_bits - 1)), (1 << (n_bits - 1)) - 1
    return 0, (1 << n_bits) - 1


def check_range(m: np.ndarray,
                n_bits: int,
                signed: bool,
                operand: str = "matrix"):
    """Raises BitOverflowError naming the first entry of `m` (row-major order) outside the n_bits range."""
    if n_bits < 1:
        raise ValueError(f"n_bits must be >= 1 but is {n_bits}")
    low, high = value_range(n_bits, signed)
    outside = (m < low) | (m > high)
    if np.any(outside):
        row, col = np.argwhere(np.atleast_2d(outside))[0]
        value = int(np.atleast_2d(m)[row, col])
        raise BitOverflowError(operand, int(row), int(col), value, n_bits, signed)


def plane_weights(n_bits: int,
                  signed: bool) -> np.ndarray:
    """Weight 2^j of plane j (LSB first); the MSB plane of a signed matrix weighs -2^(n_bits-1)."""
    weights = np.array([1 << j for j in range(n_bits)], dtype=np.int64)
    if signed:
        weights[-1] = -weights[-1]
    return weights


@dataclass
class BitPlaneMatrix:
    """Binary planes of an integer matrix.

    Attributes
    ----------
    planes : np.ndarray
        uint8 array of shape (n_bits, rows, cols) with planes[j] holding bit j (LSB first)
    signed : bool
        true if the planes are the two's-complement encoding of a signed matrix
    """
    planes: np.ndarray
    signed: bool

    @property
    def n_bits(self) -> int:
        return self.planes.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.planes.shape[1], self.planes.shape[2]

    def plane(self,
              j: int) -> np.ndarray:
        return self.planes[j]

    def recompose(self) -> np.ndarray:
        return bitplane_recompose(self)


def bitplane_decompose(m: np.ndarray,
                       n_bits: int,
                       signed: bool,
                       operand: str = "matrix") -> BitPlaneMatrix:
    """
    Splits integer matrix `m` into n_bits binary planes, LSB first.
    Signed matrices use two's-complement so that the recomposition identity holds.

    Raises
    ------
    BitOverflowError
        if an entry of `m` does not fit n_bits.
    """
    m = np.atleast_2d(np.asarray(m, dtype=np.int64))
    check_range(m, n_bits, signed, operand)

    encoded = m & ((1 << n_bits) - 1)
    planes = np.stack([(encoded >> j) & 1 for j in range(n_bits)]).astype(np.uint8)

    return BitPlaneMatrix(planes=planes, signed=signed)


def bitplane_recompose(bit_planes: BitPlaneMatrix) -> np.ndarray:
    weights = plane_weights(bit_planes.n_bits, bit_planes.signed)
    return np.tensordot(weights, bit_planes.planes.astype(np.int64), axes=1)
