import logging
from typing import Final, Optional

from pydantic import BaseModel, validator

from n3h_dse.workload.layer_spec import NetworkSpec

logger = logging.getLogger(__name__)

DSP_WEIGHT_BITS: Final = 4
EDGE_LAYER_BITS: Final = 8
ACTIVATION_BIT_RANGE: Final = (2, 4)
LUT_WEIGHT_BIT_RANGE: Final = (2, 8)


class LayerQuant(BaseModel):
    """Bit-widths of one layer.
    #
    # Attributes:
    #     index: 1-based layer index
    #     b_a:   activation bits shared by both cores
    #     b_wl:  LUT-core weight bits
    #     b_wd:  DSP-core weight bits (the DSP datapath is fixed at 4)
    """
    index: int
    b_a: int
    b_wl: int
    b_wd: int = DSP_WEIGHT_BITS

    class Config:
        frozen = True

    @validator("b_a", "b_wl")
    def bits_in_range(cls, value, field):
        if not 2 <= value <= EDGE_LAYER_BITS:
            raise ValueError(f"{field.name} must be between 2 and {EDGE_LAYER_BITS} but is {value}")
        return value

    @validator("b_wd")
    def dsp_bits_fixed(cls, value):
        if value != DSP_WEIGHT_BITS:
            raise ValueError(f"b_wd is fixed to {DSP_WEIGHT_BITS} but is {value}")
        return value


class QuantScheme(BaseModel):
    """Per-layer bit-widths of a network, ordered by layer index."""
    layers: list[LayerQuant]

    class Config:
        frozen = True

    @validator("layers")
    def indexes_are_contiguous(cls, layers):
        for position, layer_quant in enumerate(layers, start=1):
            if layer_quant.index != position:
                raise ValueError(f"scheme layer indices must be contiguous from 1, found index {layer_quant.index} "
                                 f"at position {position}")
        return layers

    def layer(self,
              index: int) -> LayerQuant:
        if not 1 <= index <= len(self.layers):
            raise ValueError(f"scheme has no entry for layer {index}, it covers {len(self.layers)} layers")
        return self.layers[index - 1]

    def check_network(self,
                      net: NetworkSpec):
        """Raises ValueError unless the scheme covers `net` and honors the per-layer bit ranges."""
        if len(self.layers) != len(net.layers):
            raise ValueError(f"scheme covers {len(self.layers)} layers but {net.name} has {len(net.layers)}")
        for layer in net.layers:
            layer_quant = self.layer(layer.index)
            if layer.is_first_or_last:
                if (layer_quant.b_a, layer_quant.b_wl) != (EDGE_LAYER_BITS, EDGE_LAYER_BITS):
                    raise ValueError(f"{layer} is a first/last layer and must use {EDGE_LAYER_BITS}/{EDGE_LAYER_BITS} "
                                     f"bits but uses {layer_quant.b_a}/{layer_quant.b_wl}")
            elif not ACTIVATION_BIT_RANGE[0] <= layer_quant.b_a <= ACTIVATION_BIT_RANGE[1]:
                raise ValueError(f"{layer} activation bits must be between {ACTIVATION_BIT_RANGE[0]} and "
                                 f"{ACTIVATION_BIT_RANGE[1]} but are {layer_quant.b_a}")


def uniform_scheme(net: NetworkSpec,
                   weight_bits: int = 4,
                   activation_bits: Optional[int] = None) -> QuantScheme:
    """
    Returns
    -------
    QuantScheme
        The manual uniform scheme: every inner layer at (activation_bits, weight_bits),
        first and last layers at 8/8.  activation_bits defaults to min(weight_bits, 4).
    """
    b_a = min(weight_bits, ACTIVATION_BIT_RANGE[1]) if activation_bits is None else activation_bits
    layers = []
    for layer in net.layers:
        if layer.is_first_or_last:
            layers.append(LayerQuant(index=layer.index, b_a=EDGE_LAYER_BITS, b_wl=EDGE_LAYER_BITS))
        else:
            layers.append(LayerQuant(index=layer.index, b_a=b_a, b_wl=weight_bits))
    scheme = QuantScheme(layers=layers)
    scheme.check_network(net)
    return scheme
