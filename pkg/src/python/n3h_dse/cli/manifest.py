"""
Provenance of command reports.

A manifest depends on the command inputs only: paths as given, file digests, seed and tool version.
Its timestamp is $SOURCE_DATE_EPOCH when set, otherwise the modification time of the newest input,
so rerunning a command on unchanged inputs reproduces its reports byte for byte.
"""
import datetime
import hashlib
import logging
import os
from pathlib import Path
from typing import Final, Optional

from pydantic import BaseModel

import n3h_dse

logger = logging.getLogger(__name__)

SOURCE_DATE_EPOCH_ENV: Final = "SOURCE_DATE_EPOCH"


class RunManifest(BaseModel):
    """
    #
    # Attributes:
    #     command:        command name (e.g. 'simulate')
    #     config_paths:   input names and paths as given on the command line, keyed by role
    #     seed:           seed of the run, None for deterministic commands
    #     version:        n3h-dse version
    #     timestamp:      ISO-8601 UTC time derived from the inputs
    #     input_digests:  sha256 of every input file, keyed by role
    """
    command: str
    config_paths: dict[str, str]
    seed: Optional[int] = None
    version: str
    timestamp: str
    input_digests: dict[str, str]

    class Config:
        frozen = True


def file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _input_timestamp(paths: list[Path]) -> str:
    epoch = os.environ.get(SOURCE_DATE_EPOCH_ENV)
    if epoch:
        seconds = int(epoch)
    elif len(paths) > 0:
        seconds = int(max(path.stat().st_mtime for path in paths))
    else:
        seconds = 0
    return datetime.datetime.fromtimestamp(seconds, tz=datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def build_manifest(command: str,
                   inputs: dict[str, tuple[str, Optional[Path]]],
                   seed: Optional[int] = None) -> RunManifest:
    """
    Parameters
    ----------
    inputs
        role -> (name as given, resolved file or None when the input is not a file)
    """
    files = {role: Path(path) for role, (_, path) in sorted(inputs.items()) if path is not None}
    manifest = RunManifest(command=command,
                           config_paths={role: given for role, (given, _) in sorted(inputs.items())},
                           seed=seed,
                           version=n3h_dse.__version__,
                           timestamp=_input_timestamp(list(files.values())),
                           input_digests={role: file_digest(path) for role, path in files.items()})
    logger.debug(f"build_manifest: {manifest}")
    return manifest
