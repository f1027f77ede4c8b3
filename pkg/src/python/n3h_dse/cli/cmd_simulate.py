import argparse
import logging
from pathlib import Path
from typing import Optional

from pydantic import BaseModel

from n3h_dse.cli.common import EXIT_INFEASIBLE, EXIT_OK, PublishedPoint, ReportWriter, add_config_argument, \
    add_device_db_argument, add_out_argument, add_strict_argument, device_db_input, format_table, \
    load_arch_config, load_network, manifest_lines, published_point, run_command
from n3h_dse.cli.manifest import RunManifest, build_manifest
from n3h_dse.cost.device import load_device_database
from n3h_dse.cost.resource_model import ResourceReport, check_fit
from n3h_dse.quantize.scheme import uniform_scheme
from n3h_dse.sched.arch_config import ArchConfig
from n3h_dse.sched.instr import Core
from n3h_dse.sched.latency import LayerLatency, NetworkLatency, network_latency
from n3h_dse.sched.program import gen_program
from n3h_dse.sched.simulator import TraceEvent, simulate
from n3h_dse.sched.tunables import DEFAULT_TUNABLES, CycleTunables
from n3h_dse.split.split_plan import apply_plan, plan_network
from n3h_dse.workload.layer_spec import NetworkSpec, im2col_dims

logger = logging.getLogger(__name__)


class SimulateReport(BaseModel):
    """
    #
    # Attributes:
    #     config:         simulated configuration, completed with scheme and ratios
    #     completed:      what was filled in ('scheme' for the uniform 4/4 scheme, 'ratios' for a planned split)
    #     layers:         per-layer latency of both cores
    #     cycles, ms:     network latency at batch 1
    #     gops_per_dsp:   throughput per DSP slice
    #     gops_per_klut:  throughput per thousand LUTs
    """
    manifest: RunManifest
    config: ArchConfig
    completed: list[str]
    resources: ResourceReport
    layers: list[LayerLatency]
    cycles: int
    ms: float
    macs: int
    fps: float
    gops: float
    gops_per_dsp: float
    gops_per_klut: float
    published: Optional[PublishedPoint] = None


def load_tunables(path: Optional[str]) -> CycleTunables:
    return DEFAULT_TUNABLES if path is None else CycleTunables.parse_file(path)


def complete_config(net: NetworkSpec,
                    cfg: ArchConfig,
                    tunables: CycleTunables = DEFAULT_TUNABLES,
                    num_workers: int = 1) -> tuple[ArchConfig, list[str]]:
    """
    Returns `cfg` ready to simulate `net`: without a scheme it runs the uniform 4/4 scheme,
    without ratios every layer gets its optimal split.
    """
    completed = []
    scheme = cfg.scheme
    if scheme is None:
        scheme = uniform_scheme(net, weight_bits=4)
        completed.append("scheme")
    if cfg.ratios is None:
        plan = plan_network(net, cfg, scheme, tunables, num_workers)
        cfg = apply_plan(cfg, scheme, plan)
        completed.append("ratios")
    elif cfg.scheme is None:
        cfg = cfg.with_scheme(scheme)
    if len(completed) > 0:
        logger.info(f"complete_config: filled in {', '.join(completed)} of {cfg.label or cfg.device}")
    return cfg, completed


def latency_table(net: NetworkSpec,
                  cfg: ArchConfig,
                  latency: NetworkLatency) -> list[str]:
    rows = []
    for layer, layer_latency in zip(net.layers, latency.layers):
        layer_quant = cfg.layer_quant(layer.index)
        slower = layer_latency.lut if layer_latency.lut.total >= layer_latency.dsp.total else layer_latency.dsp
        rows.append([str(layer.index), layer.name, f"{layer_latency.ratio:.4f}", str(layer_quant.b_wl),
                     str(layer_quant.b_a), str(layer_latency.lut.total), str(layer_latency.dsp.total),
                     str(layer_latency.cycles), str(slower.l_wait), str(slower.l_run), str(slower.l_sig),
                     str(slower.l_rst), f"{layer_latency.ms:.4f}"])
    rows.append(["total", "", "", "", "", "", "", str(latency.cycles), "", "", "", "", f"{latency.ms:.4f}"])
    return format_table(["layer", "name", "ratio", "b_wl", "b_a", "l_lut", "l_dsp", "cycles",
                         "l_wait", "l_run", "l_sig", "l_rst", "ms"], rows)


def throughput_lines(report: SimulateReport) -> list[str]:
    lines = [f"macs={report.macs} fps={report.fps:.2f} gops={report.gops:.2f} "
             f"gops_per_dsp={report.gops_per_dsp:.4f} gops_per_klut={report.gops_per_klut:.4f}"]
    if report.published is not None:
        lines.append(f"reported model_latency_ms={report.published.model_latency_ms} "
                     f"measured_latency_ms={report.published.measured_latency_ms}")
    return lines


def trace_network(net: NetworkSpec,
                  cfg: ArchConfig,
                  tunables: CycleTunables) -> tuple[list[str], list[str]]:
    """Returns the engine status events and the encoded programs of every layer on both cores."""
    event_lines = []
    program_lines = []
    for layer in net.layers:
        shape = im2col_dims(layer)
        for core in Core:
            program = gen_program(shape, cfg, layer.index, core, tunables)
            events: list[TraceEvent] = []
            simulate(program, tunables, events)
            event_lines.extend(f"{layer.index} {event.line()}" for event in events)
            program_lines.extend(f"{layer.index} {line}" for line in program.listing())
    return event_lines, program_lines


def add_simulate_arguments(parser: argparse.ArgumentParser):
    parser.add_argument(
        "--network",
        help="Built-in network name or descriptor path, defaults to the network of the configuration",
    )
    add_config_argument(parser)
    parser.add_argument(
        "--tunables",
        help="Path of a cycle constants file, defaults to the built-in constants",
    )
    add_device_db_argument(parser)
    parser.add_argument(
        "--trace",
        help="Also write the engine event log (trace.txt) and the encoded programs (program.hex)",
        default=False,
        action=argparse.BooleanOptionalAction,
    )
    add_strict_argument(parser, "Exit with code 1 if the configuration does not fit its device")
    parser.add_argument(
        "--num_workers",
        help="Number of threads simulating layers concurrently",
        type=int,
        default=1,
    )
    add_out_argument(parser)


def main(arg_list: list[str]) -> int:
    parser = argparse.ArgumentParser(
        description="Simulates a network on an architecture configuration and reports per-layer latencies."
    )
    add_simulate_arguments(parser)
    args = parser.parse_args(args=arg_list)

    writer = ReportWriter(args.out)
    if args.trace:
        writer.require_out("--trace")

    cfg, config_path = load_arch_config(args.config)
    net, network_given, network_path = load_network(args.network, cfg)
    tunables = load_tunables(args.tunables)
    device_db_given, device_db_file = device_db_input(args.device_db)
    device = load_device_database(device_db_file).get(cfg.device)

    resources = check_fit(cfg, device)
    if not resources.feasible:
        logger.warning(f"main: {resources.summary()}")

    cfg, completed = complete_config(net, cfg, tunables, args.num_workers)
    latency = network_latency(net, cfg, tunables, args.num_workers)

    inputs = {"config": (args.config, config_path),
              "network": (network_given, network_path),
              "device_db": (device_db_given, device_db_file)}
    if args.tunables is not None:
        inputs["tunables"] = (args.tunables, Path(args.tunables))
    manifest = build_manifest("simulate", inputs)

    report = SimulateReport(manifest=manifest,
                            config=cfg,
                            completed=completed,
                            resources=resources,
                            layers=latency.layers,
                            cycles=latency.cycles,
                            ms=latency.ms,
                            macs=latency.macs,
                            fps=latency.fps,
                            gops=latency.gops,
                            gops_per_dsp=latency.gops / resources.dsp_used,
                            gops_per_klut=latency.gops / (resources.lut_used / 1000.0),
                            published=published_point(config_path))

    writer.write_model("simulate.json", report)
    writer.write_lines("simulate.txt",
                       manifest_lines(manifest) + latency_table(net, cfg, latency) + throughput_lines(report))

    if args.trace:
        event_lines, program_lines = trace_network(net, cfg, tunables)
        writer.write_lines("trace.txt", manifest_lines(manifest) + event_lines)
        writer.write_lines("program.hex", manifest_lines(manifest) + program_lines)

    logger.info(f"main: {net.name} takes {latency.cycles} cycles ({latency.ms:.3f} ms, {latency.fps:.1f} fps)")

    if args.strict and not resources.feasible:
        return EXIT_INFEASIBLE
    return EXIT_OK


def run():
    run_command(main, __file__)


if __name__ == "__main__":
    run()
