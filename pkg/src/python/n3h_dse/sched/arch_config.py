import logging
from typing import Optional

from pydantic import BaseModel, root_validator, validator

from n3h_dse.cores.geometry import DspCoreGeometry, LutCoreGeometry
from n3h_dse.quantize.scheme import LayerQuant, QuantScheme
from n3h_dse.workload.layer_spec import NetworkSpec

logger = logging.getLogger(__name__)

RATIO_TOLERANCE = 1e-6


class ArchConfig(BaseModel):
    """One point of the heterogeneous core design space.
    #
    # Attributes:
    #     device:   device name or alias the configuration is bound to (e.g. 'XC7Z020' or 'D_A')
    #     lut:      LUT-core geometry
    #     dsp:      DSP-core geometry
    #     network:  optional name of the network the scheme and ratios were chosen for
    #     label:    optional free text (e.g. 'published D_A resnet18 T35')
    #     scheme:   optional per-layer bit-widths
    #     ratios:   optional per-layer LUT-core filter share, ratios[i - 1] belongs to layer i
    """
    device: str
    lut: LutCoreGeometry
    dsp: DspCoreGeometry
    network: Optional[str] = None
    label: Optional[str] = None
    scheme: Optional[QuantScheme] = None
    ratios: Optional[list[float]] = None

    class Config:
        frozen = True

    @validator("ratios")
    def ratios_in_range(cls, ratios):
        if ratios is not None:
            for index, ratio in enumerate(ratios, start=1):
                if not 0.0 <= ratio <= 1.0:
                    raise ValueError(f"ratio of layer {index} must be between 0 and 1 but is {ratio}")
        return ratios

    @root_validator(skip_on_failure=True)
    def scheme_and_ratios_agree(cls, values):
        scheme = values["scheme"]
        ratios = values["ratios"]
        if scheme is not None and ratios is not None and len(scheme.layers) != len(ratios):
            raise ValueError(f"scheme covers {len(scheme.layers)} layers but {len(ratios)} ratios are given")
        return values

    def layer_quant(self,
                    index: int) -> LayerQuant:
        if self.scheme is None:
            raise ValueError(f"config has no quantization scheme, cannot look up layer {index}")
        return self.scheme.layer(index)

    def ratio(self,
              index: int) -> float:
        if self.ratios is None:
            raise ValueError(f"config has no split ratios, cannot look up layer {index}")
        if not 1 <= index <= len(self.ratios):
            raise ValueError(f"config has no ratio for layer {index}, it covers {len(self.ratios)} layers")
        return self.ratios[index - 1]

    def with_scheme(self,
                    scheme: QuantScheme) -> "ArchConfig":
        return ArchConfig(**{**self.dict(exclude={"scheme"}), "scheme": scheme})

    def with_ratios(self,
                    ratios: list[float]) -> "ArchConfig":
        return ArchConfig(**{**self.dict(exclude={"ratios"}), "ratios": list(ratios)})

    def check_network(self,
                      net: NetworkSpec):
        """Raises ValueError unless scheme and ratios are present, cover `net` and respect filter granularity."""
        if self.scheme is None or self.ratios is None:
            raise ValueError("config needs both a quantization scheme and split ratios to cover a network")
        self.scheme.check_network(net)
        if len(self.ratios) != len(net.layers):
            raise ValueError(f"config has {len(self.ratios)} ratios but {net.name} has {len(net.layers)} layers")
        for layer in net.layers:
            ratio = self.ratios[layer.index - 1]
            lut_filters = ratio * layer.c_out
            if abs(lut_filters - round(lut_filters)) > RATIO_TOLERANCE:
                raise ValueError(f"{layer} ratio {ratio} does not select a whole number of its {layer.c_out} filters")
            if layer.is_first_or_last and ratio != 1.0:
                raise ValueError(f"{layer} is a first/last layer and must run on the LUT-core only, "
                                 f"but its ratio is {ratio}")
