import logging
from dataclasses import dataclass
from typing import Final, Optional

import numpy as np

from n3h_dse.workload.layer_spec import LayerSpec, NetworkSpec

logger = logging.getLogger(__name__)

STATE_DIM: Final = 12
STATE_FIELDS: Final = ("id_func", "i", "c_in", "c_out", "s_kernel", "s_stride", "s_fmap", "n_params",
                       "id_sc_dw", "id_mn", "ratio", "a_prev")

# layer fields normalized against the bound network
_LAYER_FEATURES: Final = ("index", "c_in", "c_out", "kernel", "stride", "fmap", "n_params")

HARDWARE_PHASE: Final = 0
QUANTIZATION_PHASE: Final = 1

LUT_WEIGHT_STEP: Final = 0
ACTIVATION_STEP: Final = 1


@dataclass(frozen=True)
class StateContext:
    """
    What the agent sees before one action.

    Attributes
    ----------
    phase : int
        HARDWARE_PHASE or QUANTIZATION_PHASE
    a_prev : float
        the previous action, 0 at the first step
    layer : LayerSpec, optional
        the layer whose bits are chosen, quantization phase only
    id_mn : int
        LUT_WEIGHT_STEP or ACTIVATION_STEP
    ratio : float
        the latest computed split ratio
    """
    phase: int
    a_prev: float = 0.0
    layer: Optional[LayerSpec] = None
    id_mn: int = LUT_WEIGHT_STEP
    ratio: float = 0.0


class StateEncoder:
    """Builds min-max normalized state vectors for the layers of one network."""

    def __init__(self,
                 net: NetworkSpec):
        features = np.array([[getattr(layer, name) for name in _LAYER_FEATURES] for layer in net.layers],
                            dtype=np.float64)
        self.lower = features.min(axis=0)
        self.span = features.max(axis=0) - self.lower

    def _normalize(self,
                   layer: LayerSpec) -> np.ndarray:
        values = np.array([getattr(layer, name) for name in _LAYER_FEATURES], dtype=np.float64)
        normalized = np.divide(values - self.lower, self.span, out=np.zeros_like(values), where=self.span > 0)
        return np.clip(normalized, 0.0, 1.0)

    def build_state(self,
                    context: StateContext) -> np.ndarray:
        state = np.zeros(STATE_DIM, dtype=np.float64)
        state[-1] = context.a_prev
        if context.phase == HARDWARE_PHASE:
            return state

        if context.layer is None:
            raise ValueError("quantization phase state needs a layer")
        state[0] = 1.0
        state[1:8] = self._normalize(context.layer)
        state[8] = 1.0 if context.layer.is_sc_or_dw else 0.0
        state[9] = float(context.id_mn)
        state[10] = context.ratio
        return state
