"""
Argument, input and report helpers shared by the n3h-* commands.
"""
import argparse
import logging
import sys
import traceback
from pathlib import Path
from typing import Callable, Final, Optional

from pydantic import BaseModel, ValidationError

from n3h_dse.cli.manifest import RunManifest
from n3h_dse.cost.device import DEVICE_DB_ENV, device_db_path
from n3h_dse.resource_path import CONFIGS_DIR, REFERENCE_DIR
from n3h_dse.root_logger import init_logger
from n3h_dse.sched.arch_config import ArchConfig
from n3h_dse.sched.simulator import SimulationError
from n3h_dse.workload.builtin import BUILTIN_NETWORK_NAMES, builtin_network_path, resolve_network
from n3h_dse.workload.layer_spec import NetworkSpec

logger = logging.getLogger(__name__)

EXIT_OK: Final = 0
EXIT_INFEASIBLE: Final = 1
EXIT_INPUT_ERROR: Final = 2
EXIT_INTERNAL_ERROR: Final = 3

PUBLISHED_RESULTS_PATH: Final = REFERENCE_DIR / "published_results.json"


class PublishedPoint(BaseModel):
    """Reported numbers of one published design point, quoted next to model values only."""
    config: str
    device: str
    network: str
    bits: str
    target_ms: Optional[float] = None
    top1: float
    top5: float
    model_latency_ms: float
    measured_latency_ms: float
    lut: Optional[int] = None
    dsp: Optional[int] = None
    bram: Optional[int] = None
    gops: Optional[float] = None
    fps: Optional[float] = None


class PublishedAccuracy(BaseModel):
    network: str
    top1: float
    top5: float


class PublishedResults(BaseModel):
    baselines: list[PublishedAccuracy]
    design_points: list[PublishedPoint]

    def point(self,
              config_name: str) -> Optional[PublishedPoint]:
        for point in self.design_points:
            if point.config == config_name:
                return point
        return None


def published_point(config_path: Path) -> Optional[PublishedPoint]:
    """Returns the published numbers of the shipped configuration at `config_path`, None for other files."""
    if Path(config_path).resolve().parent != CONFIGS_DIR.resolve():
        return None
    return PublishedResults.parse_file(PUBLISHED_RESULTS_PATH).point(Path(config_path).stem)


def resolve_config_path(name_or_path: str) -> Path:
    """Returns `name_or_path` if it is an existing file, else the shipped configuration with that name."""
    path = Path(name_or_path)
    if path.is_file():
        return path
    shipped = CONFIGS_DIR / f"{name_or_path}.json"
    if shipped.is_file():
        return shipped
    known = ", ".join(sorted(p.stem for p in CONFIGS_DIR.glob("*.json")))
    raise ValueError(f"{name_or_path} is neither a configuration file nor a shipped configuration ({known})")


def load_arch_config(name_or_path: str) -> tuple[ArchConfig, Path]:
    path = resolve_config_path(name_or_path)
    cfg = ArchConfig.parse_file(path)
    logger.info(f"load_arch_config: loaded {cfg.label or path.name} for {cfg.device}")
    return cfg, path


def network_file(name_or_path: str) -> Path:
    if name_or_path in BUILTIN_NETWORK_NAMES:
        return builtin_network_path(name_or_path)
    return Path(name_or_path)


def load_network(name_or_path: Optional[str],
                 cfg: Optional[ArchConfig] = None) -> tuple[NetworkSpec, str, Path]:
    """Resolves --network, falling back to the network the configuration was chosen for."""
    if name_or_path is None:
        if cfg is None or cfg.network is None:
            raise ValueError("--network is required since the configuration does not name a network")
        name_or_path = cfg.network
    net = resolve_network(name_or_path)
    if cfg is not None and cfg.network is not None and cfg.network != net.name:
        logger.warning(f"load_network: configuration was chosen for {cfg.network} but runs {net.name}")
    return net, name_or_path, network_file(name_or_path)


def device_db_input(device_db: Optional[str]) -> tuple[str, Path]:
    path = device_db_path(None if device_db is None else Path(device_db))
    return (device_db if device_db is not None else path.name), path


def add_device_db_argument(parser: argparse.ArgumentParser):
    parser.add_argument(
        "--device_db",
        help=f"Path of the device database, defaults to ${DEVICE_DB_ENV} or the shipped database",
    )


def add_config_argument(parser: argparse.ArgumentParser,
                        required: bool = True):
    parser.add_argument(
        "--config",
        help="Path of an architecture configuration file or name of a shipped one (e.g. d_b_resnet18_t30)",
        required=required,
    )


def add_out_argument(parser: argparse.ArgumentParser):
    parser.add_argument(
        "--out",
        help="Directory for report files, if omitted the report table is printed",
    )


def add_strict_argument(parser: argparse.ArgumentParser,
                        help_text: str):
    parser.add_argument(
        "--strict",
        help=help_text,
        default=False,
        action=argparse.BooleanOptionalAction,
    )


def format_table(header: list[str],
                 rows: list[list[str]]) -> list[str]:
    widths = [max(len(cell) for cell in column) for column in zip(header, *rows)]
    return ["  ".join(cell.rjust(width) for cell, width in zip(line, widths)).rstrip()
            for line in [header] + rows]


def manifest_lines(manifest: RunManifest) -> list[str]:
    lines = [f"# command: {manifest.command}",
             f"# version: {manifest.version}",
             f"# timestamp: {manifest.timestamp}",
             f"# seed: {manifest.seed}"]
    lines.extend(f"# input {role}: {given}" for role, given in manifest.config_paths.items())
    lines.extend(f"# sha256 {role}: {digest}" for role, digest in manifest.input_digests.items())
    return lines


class ReportWriter:
    """Writes report files into `out_dir`, or prints text reports to stdout when there is no directory."""

    def __init__(self,
                 out_dir: Optional[str]):
        self.out_dir = None if out_dir is None else Path(out_dir)
        if self.out_dir is not None:
            self.out_dir.mkdir(parents=True, exist_ok=True)

    def write_lines(self,
                    name: str,
                    lines: list[str],
                    echo: bool = True):
        if self.out_dir is None:
            if echo:
                print("\n".join(lines))
            return
        path = self.out_dir / name
        path.write_text("".join(line + "\n" for line in lines))
        logger.info(f"write_lines: wrote {len(lines)} lines to {path}")

    def write_model(self,
                    name: str,
                    model: BaseModel):
        if self.out_dir is None:
            return
        path = self.out_dir / name
        path.write_text(model.json(indent=1) + "\n")
        logger.info(f"write_model: wrote {path}")

    def require_out(self,
                    flag: str):
        if self.out_dir is None:
            raise ValueError(f"{flag} needs --out")


def run_main(main: Callable[[list[str]], int],
             arg_list: list[str]) -> int:
    """Runs a command's main and maps its failures to exit codes."""
    try:
        return main(arg_list)
    except SimulationError:
        traceback.print_exc()
        return EXIT_INTERNAL_ERROR
    except (ValidationError, ValueError, FileNotFoundError) as e:
        logger.error(f"run_main: {e}")
        return EXIT_INPUT_ERROR


def run_command(main: Callable[[list[str]], int],
                context: str):
    init_logger(context)

    # noinspection PyBroadException
    try:
        exit_code = run_main(main, sys.argv[1:])
    except Exception:
        # ensure exit code is a non-zero value when Exception occurs
        traceback.print_exc()
        exit_code = EXIT_INTERNAL_ERROR
    sys.exit(exit_code)
