from typing import Callable

import numpy as np
import pytest

from n3h_dse.cores.geometry import DspCoreGeometry, LutCoreGeometry


@pytest.fixture
def lut_geometry() -> LutCoreGeometry:
    return LutCoreGeometry(m=3, n=5, k=64)


@pytest.fixture
def dsp_geometry() -> DspCoreGeometry:
    return DspCoreGeometry(n_reg_row_a=5)


def _random_operands(rng: np.random.Generator,
                     rows: int,
                     depth: int,
                     cols: int,
                     a_bits: int,
                     w_bits: int,
                     a_signed: bool) -> tuple[np.ndarray, np.ndarray]:
    a_low, a_high = (-(1 << (a_bits - 1)), (1 << (a_bits - 1)) - 1) if a_signed else (0, (1 << a_bits) - 1)
    a = rng.integers(a_low, a_high + 1, size=(rows, depth))
    w = rng.integers(-(1 << (w_bits - 1)), 1 << (w_bits - 1), size=(depth, cols))
    return a, w


@pytest.fixture
def random_operands() -> Callable[..., tuple[np.ndarray, np.ndarray]]:
    """Returns a generator of (activation, weight) integer matrices within the requested bit-widths."""
    return _random_operands
