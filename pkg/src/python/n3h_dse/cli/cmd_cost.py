import argparse
import logging
from typing import Optional

from pydantic import BaseModel

from n3h_dse.cli.common import EXIT_INFEASIBLE, EXIT_OK, PublishedPoint, ReportWriter, add_config_argument, \
    add_device_db_argument, add_out_argument, add_strict_argument, device_db_input, format_table, \
    load_arch_config, manifest_lines, published_point, run_command
from n3h_dse.cli.manifest import RunManifest, build_manifest
from n3h_dse.cost.device import load_device_database
from n3h_dse.cost.resource_model import ResourceReport, check_fit
from n3h_dse.sched.arch_config import ArchConfig

logger = logging.getLogger(__name__)


class CostReport(BaseModel):
    manifest: RunManifest
    config: ArchConfig
    resources: ResourceReport
    published: Optional[PublishedPoint] = None


def cost_table(resources: ResourceReport,
               published: Optional[PublishedPoint]) -> list[str]:
    def reported(value: Optional[int]) -> str:
        return "-" if value is None else str(value)

    rows = [["LUT", str(resources.lut_used), str(resources.lut_total), str(resources.lut_margin),
             reported(None if published is None else published.lut)],
            ["BRAM36", str(resources.bram_used), str(resources.bram_total), str(resources.bram_margin),
             reported(None if published is None else published.bram)],
            ["DSP", str(resources.dsp_used), str(resources.dsp_total), str(resources.dsp_margin),
             reported(None if published is None else published.dsp)]]
    lines = format_table(["resource", "used", "total", "margin", "reported"], rows)
    lines.append(f"lut_core_luts={resources.lut_core_luts} dsp_core_luts={resources.dsp_core_luts} "
                 f"lut_core_brams={resources.lut_core_brams} dsp_core_brams={resources.dsp_core_brams}")
    lines.append(f"feasible={str(resources.feasible).lower()}")
    return lines


def add_cost_arguments(parser: argparse.ArgumentParser):
    add_config_argument(parser)
    parser.add_argument(
        "--device",
        help="Device name or alias, defaults to the device of the configuration",
    )
    add_device_db_argument(parser)
    add_strict_argument(parser, "Exit with code 1 if the configuration does not fit the device")
    add_out_argument(parser)


def main(arg_list: list[str]) -> int:
    parser = argparse.ArgumentParser(
        description="Estimates LUT, BRAM and DSP usage of an architecture configuration."
    )
    add_cost_arguments(parser)
    args = parser.parse_args(args=arg_list)

    cfg, config_path = load_arch_config(args.config)
    device_db_given, device_db_file = device_db_input(args.device_db)
    device = load_device_database(device_db_file).get(cfg.device if args.device is None else args.device)

    resources = check_fit(cfg, device)
    published = published_point(config_path)
    manifest = build_manifest("cost", {"config": (args.config, config_path),
                                       "device": (device.name, None),
                                       "device_db": (device_db_given, device_db_file)})

    writer = ReportWriter(args.out)
    writer.write_model("cost.json", CostReport(manifest=manifest, config=cfg, resources=resources,
                                               published=published))
    writer.write_lines("cost.txt", manifest_lines(manifest) + cost_table(resources, published))

    logger.info(f"main: {resources.summary()}")

    if not resources.feasible:
        logger.warning(f"main: {', '.join(resources.violations())}")
        if args.strict:
            return EXIT_INFEASIBLE
    return EXIT_OK


def run():
    run_command(main, __file__)


if __name__ == "__main__":
    run()
