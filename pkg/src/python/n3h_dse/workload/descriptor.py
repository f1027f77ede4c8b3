"""
Line oriented network descriptor format.

Each non-blank line holds one record made of a record type followed by
whitespace separated key=value pairs, '#' starts a comment::

    network name=synthetic-small
    layer index=1 c_in=3 c_out=8 kernel=3 stride=1 fmap=8 padding=1 is_first_or_last=true

Required layer keys: index, c_in, c_out, kernel, stride, fmap.
Optional layer keys: name, padding (0), n_params (derived), is_sc_or_dw, is_depthwise,
is_first_or_last (all false).
"""
import logging
from pathlib import Path
from typing import Any, Final, Optional

from pydantic import ValidationError

from n3h_dse.workload.layer_spec import LayerSpec, NetworkSpec

logger = logging.getLogger(__name__)

REQUIRED_LAYER_KEYS: Final = ("index", "c_in", "c_out", "kernel", "stride", "fmap")
LAYER_KEY_ORDER: Final = ("index", "name", "c_in", "c_out", "kernel", "stride", "fmap", "padding", "n_params",
                          "is_sc_or_dw", "is_depthwise", "is_first_or_last")


class DescriptorError(ValueError):
    """Raised when a network descriptor cannot be parsed or violates a layer/network invariant."""

    def __init__(self,
                 message: str,
                 line_number: Optional[int] = None,
                 field: Optional[str] = None):
        location = "" if line_number is None else f"line {line_number}: "
        super().__init__(f"{location}{message}")
        self.line_number = line_number
        self.field = field


def _parse_pairs(tokens: list[str],
                 line_number: int) -> dict[str, str]:
    pairs = {}
    for token in tokens:
        key, separator, value = token.partition("=")
        if not separator or not key or not value:
            raise DescriptorError(f"expected key=value but found '{token}'", line_number)
        if key in pairs:
            raise DescriptorError(f"duplicate field '{key}'", line_number, key)
        pairs[key] = value
    return pairs


def _build_layer(pairs: dict[str, str],
                 line_number: int) -> LayerSpec:
    for key in REQUIRED_LAYER_KEYS:
        if key not in pairs:
            raise DescriptorError(f"layer is missing required field '{key}'", line_number, key)

    unknown_keys = sorted(set(pairs.keys()) - set(LAYER_KEY_ORDER))
    if len(unknown_keys) > 0:
        raise DescriptorError(f"unknown layer field '{unknown_keys[0]}'", line_number, unknown_keys[0])

    try:
        return LayerSpec.parse_obj(pairs)
    except ValidationError as e:
        first_error = e.errors()[0]
        field = str(first_error["loc"][0]) if first_error["loc"] else None
        field_text = "" if field in (None, "__root__") else f"field '{field}': "
        raise DescriptorError(f"invalid layer, {field_text}{first_error['msg']}", line_number, field) from e


def load_network(descriptor_text: str) -> NetworkSpec:
    """
    Parses `descriptor_text` into a validated network.

    Raises
    ------
    DescriptorError
        with the offending line number and field for parse problems, or naming the
        offending layer for network level invariant violations.
    """
    network_name = None
    layers: list[LayerSpec] = []

    for line_number, raw_line in enumerate(descriptor_text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if len(line) == 0:
            continue

        tokens = line.split()
        record_type = tokens[0]
        pairs = _parse_pairs(tokens[1:], line_number)

        if record_type == "network":
            if network_name is not None:
                raise DescriptorError("only one network record is allowed", line_number)
            if "name" not in pairs:
                raise DescriptorError("network is missing required field 'name'", line_number, "name")
            network_name = pairs["name"]
        elif record_type == "layer":
            layers.append(_build_layer(pairs, line_number))
        else:
            raise DescriptorError(f"unknown record type '{record_type}'", line_number)

    if network_name is None:
        raise DescriptorError("descriptor has no network record", field="name")

    try:
        net = NetworkSpec(name=network_name, layers=layers)
    except ValidationError as e:
        raise DescriptorError(f"invalid network {network_name}: {e.errors()[0]['msg']}") from e

    logger.debug(f"load_network: loaded {net.name} with {len(net.layers)} layers")

    return net


def load_network_file(path: Path) -> NetworkSpec:
    return load_network(Path(path).read_text())


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def serialize_network(net: NetworkSpec) -> str:
    """
    Returns
    -------
    str
        Descriptor text that `load_network` parses back into an identical network.
    """
    for text in [net.name] + [layer.name for layer in net.layers]:
        if any(c.isspace() or c in "=#" for c in text):
            raise ValueError(f"name '{text}' cannot contain whitespace, '=' or '#'")

    lines = [f"network name={net.name}"]
    for layer in net.layers:
        values = layer.dict()
        pairs = [f"{key}={_format_value(values[key])}"
                 for key in LAYER_KEY_ORDER
                 if not (key == "name" and values[key] == "")]
        lines.append("layer " + " ".join(pairs))

    return "\n".join(lines) + "\n"
