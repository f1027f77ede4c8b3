from pathlib import Path
from typing import Final

# src/python/n3h_dse/resource_path.py -> src/resources
RESOURCES_DIR: Final = Path(__file__).resolve().parents[2] / "resources"
NETWORKS_DIR: Final = RESOURCES_DIR / "networks"
DEVICES_DIR: Final = RESOURCES_DIR / "devices"
CONFIGS_DIR: Final = RESOURCES_DIR / "configs"
REFERENCE_DIR: Final = RESOURCES_DIR / "reference"
