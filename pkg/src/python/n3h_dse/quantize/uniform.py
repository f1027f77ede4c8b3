import logging
from typing import Union

import numpy as np
from pydantic import BaseModel, validator

logger = logging.getLogger(__name__)

MIN_BITS = 2
MAX_BITS = 8

ArrayLike = Union[float, np.ndarray]


class QuantParams(BaseModel):
    """Uniform quantizer settings.
    #
    # Attributes:
    #     n_bits:  bit-width of the quantized integers
    #     step:    quantization step size s (real value of one integer increment)
    #     signed:  false maps onto [0, 2^n_bits - 1] (used for post-ReLU activations)
    """
    n_bits: int
    step: float
    signed: bool = True

    class Config:
        frozen = True

    @validator("n_bits")
    def n_bits_in_range(cls, value):
        if not MIN_BITS <= value <= MAX_BITS:
            raise ValueError(f"n_bits must be between {MIN_BITS} and {MAX_BITS} but is {value}")
        return value

    @validator("step")
    def step_is_positive(cls, value):
        if not value > 0:
            raise ValueError(f"step must be > 0 but is {value}")
        return value

    @property
    def alpha(self) -> int:
        return -(1 << (self.n_bits - 1)) if self.signed else 0

    @property
    def beta(self) -> int:
        return (1 << (self.n_bits - 1)) - 1 if self.signed else (1 << self.n_bits) - 1


def round_half_away(x: ArrayLike) -> ArrayLike:
    """Rounds halves away from zero (2.5 -> 3, -2.5 -> -3), unlike numpy's banker's rounding."""
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def quantize_uniform(x: float,
                     p: QuantParams) -> int:
    return int(np.clip(round_half_away(x / p.step), p.alpha, p.beta))


def quantize_array(x: np.ndarray,
                   p: QuantParams) -> np.ndarray:
    return np.clip(round_half_away(np.asarray(x, dtype=np.float64) / p.step), p.alpha, p.beta).astype(np.int64)


def dequantize_array(q: np.ndarray,
                     p: QuantParams) -> np.ndarray:
    return np.asarray(q, dtype=np.float64) * p.step


def covering_params(values: np.ndarray,
                    n_bits: int,
                    signed: bool = True) -> QuantParams:
    """
    Returns
    -------
    QuantParams
        Parameters whose step s = max|values| / beta maps the largest magnitude onto the top
        of the integer range.  All-zero input gets step 1 since any step represents it exactly.
    """
    max_abs = float(np.max(np.abs(values))) if np.size(values) > 0 else 0.0
    beta = (1 << (n_bits - 1)) - 1 if signed else (1 << n_bits) - 1
    step = max_abs / beta if max_abs > 0 else 1.0
    return QuantParams(n_bits=n_bits, step=step, signed=signed)


def fake_quantize(x: np.ndarray,
                  n_bits: int,
                  signed: bool = True) -> np.ndarray:
    """Quantizes and dequantizes `x` with a step covering its own range."""
    p = covering_params(x, n_bits, signed)
    return dequantize_array(quantize_array(x, p), p)
