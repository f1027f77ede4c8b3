import logging
import os
from pathlib import Path
from typing import Final, Optional

from pydantic import BaseModel, validator

from n3h_dse.resource_path import DEVICES_DIR

logger = logging.getLogger(__name__)

DEVICE_DB_ENV: Final = "N3H_DSE_DEVICE_DB"
DEFAULT_DEVICE_DB_PATH: Final = DEVICES_DIR / "device_db.json"


class DeviceProfile(BaseModel):
    """FPGA resource totals.
    #
    # Attributes:
    #     name:          part name (e.g. 'XC7Z020')
    #     aliases:       alternative names accepted on the command line (e.g. 'D_A')
    #     lut_total:     available LUTs
    #     dsp_total:     available DSP slices
    #     bram36_total:  available 36Kb block RAMs
    """
    name: str
    aliases: list[str] = []
    lut_total: int
    dsp_total: int
    bram36_total: int

    class Config:
        frozen = True

    @validator("lut_total", "dsp_total", "bram36_total")
    def total_is_positive(cls, value, field):
        if value < 1:
            raise ValueError(f"{field.name} must be >= 1 but is {value}")
        return value

    def matches(self,
                name: str) -> bool:
        return name.lower() in [self.name.lower()] + [alias.lower() for alias in self.aliases]


class DeviceDatabase(BaseModel):
    devices: list[DeviceProfile]

    @validator("devices")
    def names_are_unique(cls, devices):
        names = [device.name.lower() for device in devices]
        if len(set(names)) != len(names):
            raise ValueError(f"device names must be unique but are {names}")
        return devices

    def get(self,
            name: str) -> DeviceProfile:
        for device in self.devices:
            if device.matches(name):
                return device
        known = ", ".join(device.name for device in self.devices)
        raise ValueError(f"unknown device '{name}', choose one of {known}")


def device_db_path(path: Optional[Path] = None) -> Path:
    """Returns `path` if specified, else the path named by $N3H_DSE_DEVICE_DB, else the shipped database."""
    if path is not None:
        return Path(path)
    env_path = os.environ.get(DEVICE_DB_ENV)
    if env_path:
        return Path(env_path)
    return DEFAULT_DEVICE_DB_PATH


def load_device_database(path: Optional[Path] = None) -> DeviceDatabase:
    db_path = device_db_path(path)
    if not db_path.exists():
        raise ValueError(f"device database {db_path} does not exist")
    db = DeviceDatabase.parse_file(db_path)
    logger.debug(f"load_device_database: loaded {len(db.devices)} devices from {db_path}")
    return db
