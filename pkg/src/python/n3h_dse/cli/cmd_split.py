import argparse
import logging
from pathlib import Path
from typing import Optional

from pydantic import BaseModel

from n3h_dse.cli.cmd_simulate import load_tunables
from n3h_dse.cli.common import EXIT_OK, ReportWriter, add_config_argument, add_out_argument, format_table, \
    load_arch_config, load_network, manifest_lines, run_command
from n3h_dse.cli.manifest import RunManifest, build_manifest
from n3h_dse.quantize.scheme import QuantScheme, uniform_scheme
from n3h_dse.sched.arch_config import ArchConfig
from n3h_dse.sched.tunables import CycleTunables
from n3h_dse.split.split_plan import ScanPoint, SplitPlan, apply_plan, is_unimodal, plan_network, scan_ratios
from n3h_dse.workload.layer_spec import NetworkSpec, im2col_dims

logger = logging.getLogger(__name__)

RULE_MARKS = {"optimal": "", "depthwise-zero": "*", "depthwise-forced": "!", "lut-only": "^"}


class LayerScan(BaseModel):
    index: int
    unimodal: bool
    points: list[ScanPoint]


class SplitReport(BaseModel):
    manifest: RunManifest
    config: ArchConfig
    plan: SplitPlan
    scans: list[LayerScan]


def parse_bits(bits: str) -> tuple[int, int]:
    """Parses 'B_WL/B_A', e.g. '4/4'."""
    parts = bits.split("/")
    if len(parts) != 2 or not all(part.strip().isdigit() for part in parts):
        raise ValueError(f"--bits must look like B_WL/B_A (e.g. 4/4) but is '{bits}'")
    return int(parts[0]), int(parts[1])


def split_scheme(net: NetworkSpec,
                 cfg: ArchConfig,
                 bits: Optional[str]) -> QuantScheme:
    if bits is not None:
        b_wl, b_a = parse_bits(bits)
        return uniform_scheme(net, weight_bits=b_wl, activation_bits=b_a)
    if cfg.scheme is not None:
        return cfg.scheme
    return uniform_scheme(net, weight_bits=4)


def scan_network(net: NetworkSpec,
                 cfg: ArchConfig,
                 scheme: QuantScheme,
                 tunables: CycleTunables) -> list[LayerScan]:
    """Latency over every ratio of every layer that may be split, first/last layers run on the LUT-core only."""
    scans = []
    for layer in net.layers:
        if layer.is_first_or_last:
            continue
        layer_quant = scheme.layer(layer.index)
        points = scan_ratios(im2col_dims(layer), cfg, layer_quant.b_a, layer_quant.b_wl, tunables)
        scans.append(LayerScan(index=layer.index,
                               unimodal=is_unimodal([point.cycles for point in points]),
                               points=points))
    return scans


def plan_table(plan: SplitPlan) -> list[str]:
    rows = [[str(layer.index), layer.name, str(layer.c_out), str(layer.lut_filters),
             f"{layer.ratio:.4f}{RULE_MARKS[layer.rule]}", str(layer.lut_cycles), str(layer.dsp_cycles),
             str(layer.cycles), layer.rule]
            for layer in plan.layers]
    rows.append(["total", "", "", "", "", "", "", str(plan.cycles), f"{plan.ms:.4f} ms"])
    lines = format_table(["layer", "name", "c_out", "lut_filters", "ratio", "l_lut", "l_dsp", "cycles", "rule"],
                         rows)
    lines.append("* depthwise layer fastest on the DSP-core alone, ! depthwise layer forced onto the DSP-core, "
                 "^ first/last layer on the LUT-core only")
    return lines


def scan_lines(scans: list[LayerScan]) -> list[str]:
    lines = ["layer lut_filters ratio l_lut l_dsp cycles"]
    for scan in scans:
        lines.extend(f"{scan.index} {point.lut_filters} {point.ratio:.6f} {point.lut_cycles} {point.dsp_cycles} "
                     f"{point.cycles}"
                     for point in scan.points)
    return lines


def add_split_arguments(parser: argparse.ArgumentParser):
    parser.add_argument(
        "--network",
        help="Built-in network name or descriptor path, defaults to the network of the configuration",
    )
    add_config_argument(parser)
    parser.add_argument(
        "--bits",
        help="Uniform bit-widths B_WL/B_A of the inner layers (e.g. 4/4), "
             "defaults to the scheme of the configuration or 4/4",
    )
    parser.add_argument(
        "--tunables",
        help="Path of a cycle constants file, defaults to the built-in constants",
    )
    parser.add_argument(
        "--force_depthwise_dsp",
        help="Run every depthwise layer on the DSP-core alone, even where a split is faster",
        action="store_true",
    )
    parser.add_argument(
        "--num_workers",
        help="Number of threads planning layers concurrently",
        type=int,
        default=1,
    )
    add_out_argument(parser)


def main(arg_list: list[str]) -> int:
    parser = argparse.ArgumentParser(
        description="Chooses the LUT-core/DSP-core workload split of every layer and scans all ratios."
    )
    add_split_arguments(parser)
    args = parser.parse_args(args=arg_list)

    cfg, config_path = load_arch_config(args.config)
    net, network_given, network_path = load_network(args.network, cfg)
    tunables = load_tunables(args.tunables)
    scheme = split_scheme(net, cfg, args.bits)

    plan = plan_network(net, cfg, scheme, tunables, args.num_workers, args.force_depthwise_dsp)
    scans = scan_network(net, cfg, scheme, tunables)

    inputs = {"config": (args.config, config_path),
              "network": (network_given, network_path),
              "bits": (args.bits or "config", None)}
    if args.tunables is not None:
        inputs["tunables"] = (args.tunables, Path(args.tunables))
    if args.force_depthwise_dsp:
        inputs["depthwise"] = ("dsp-only", None)
    manifest = build_manifest("split", inputs)

    writer = ReportWriter(args.out)
    writer.write_model("split.json", SplitReport(manifest=manifest, config=apply_plan(cfg, scheme, plan), plan=plan,
                                                 scans=scans))
    writer.write_lines("split.txt", manifest_lines(manifest) + plan_table(plan))
    writer.write_lines("scan.txt", manifest_lines(manifest) + scan_lines(scans), echo=False)

    not_unimodal = [scan.index for scan in scans if not scan.unimodal]
    if len(not_unimodal) > 0:
        logger.info(f"main: latency over ratio has several minima for layers {not_unimodal}")
    logger.info(f"main: {net.name} planned at {plan.cycles} cycles ({plan.ms:.3f} ms)")

    return EXIT_OK


def run():
    run_command(main, __file__)


if __name__ == "__main__":
    run()
