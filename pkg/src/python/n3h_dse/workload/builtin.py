import functools
import logging
from pathlib import Path
from typing import Final

from n3h_dse.resource_path import NETWORKS_DIR
from n3h_dse.workload.descriptor import load_network_file
from n3h_dse.workload.layer_spec import NetworkSpec

logger = logging.getLogger(__name__)

BUILTIN_NETWORK_NAMES: Final = ("resnet18", "mobilenetv2", "synthetic-small")


def builtin_network_path(name: str) -> Path:
    if name not in BUILTIN_NETWORK_NAMES:
        raise ValueError(f"unknown built-in network '{name}', choose one of {', '.join(BUILTIN_NETWORK_NAMES)}")
    return NETWORKS_DIR / f"{name}.txt"


@functools.lru_cache(maxsize=None)
def builtin_network(name: str) -> NetworkSpec:
    path = builtin_network_path(name)
    net = load_network_file(path)
    logger.info(f"builtin_network: loaded {len(net.layers)} layers from {path}")
    return net


def resolve_network(name_or_path: str) -> NetworkSpec:
    """Returns the built-in network with the given name or loads the descriptor file at that path."""
    if name_or_path in BUILTIN_NETWORK_NAMES:
        return builtin_network(name_or_path)
    path = Path(name_or_path)
    if not path.exists():
        raise ValueError(f"{name_or_path} is neither a built-in network name nor an existing descriptor file")
    return load_network_file(path)
