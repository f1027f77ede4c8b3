import argparse
import logging
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, parse_file_as

from n3h_dse.cli.common import EXIT_INFEASIBLE, EXIT_OK, ReportWriter, add_device_db_argument, add_out_argument, \
    add_strict_argument, device_db_input, format_table, manifest_lines, network_file, run_command
from n3h_dse.cli.manifest import RunManifest, build_manifest
from n3h_dse.dse.action_range import hw_knob_values
from n3h_dse.dse.episode import DesignPoint
from n3h_dse.dse.explore import ACCURACY_BASELINES, ORACLES, STRATEGIES, ExploreConfig, ExploreResult, \
    explore_with_config

logger = logging.getLogger(__name__)

# ExploreConfig fields settable by flags
OVERRIDE_FIELDS = ("network", "device", "target_ms", "episodes", "strategy", "seed", "oracle", "acc_baseline",
                   "num_workers")


class ExploreReport(BaseModel):
    manifest: RunManifest
    settings: ExploreConfig
    episodes_run: int
    best_reward: Optional[float] = None
    best: Optional[DesignPoint] = None


def build_explore_config(args: argparse.Namespace) -> ExploreConfig:
    """Flags override the fields of the --config file."""
    values = {} if args.config is None else parse_file_as(dict, args.config)
    for field_name in OVERRIDE_FIELDS:
        value = getattr(args, field_name)
        if value is not None:
            values[field_name] = value
    for required in ("network", "device", "target_ms"):
        if required not in values:
            raise ValueError(f"--{required.replace('_', '-')} is required unless --config provides it")
    return ExploreConfig(**values)


def best_point_lines(best: Optional[DesignPoint]) -> list[str]:
    if best is None:
        return ["best: none, no explored configuration fits the device"]
    knobs = hw_knob_values(best.config)
    lines = ["best: " + " ".join(f"{name}={value}" for name, value in knobs.items()),
             f"reward={best.reward:.6f} latency_ms={best.latency_ms:.4f} target_ms={best.target_ms} "
             f"accuracy={best.accuracy:.4f} baseline={best.baseline:.4f} "
             f"meets_target={str(best.meets_target).lower()}",
             best.resources.summary()]
    return lines


def chart_lines(best: Optional[DesignPoint]) -> list[str]:
    """Per-layer bit-widths and split ratio of the best point."""
    if best is None:
        return format_table(["layer", "b_wl", "b_a", "ratio"], [])
    rows = [[str(layer_quant.index), str(layer_quant.b_wl), str(layer_quant.b_a),
             f"{best.config.ratio(layer_quant.index):.4f}"]
            for layer_quant in best.config.scheme.layers]
    return format_table(["layer", "b_wl", "b_a", "ratio"], rows)


def reward_lines(result: ExploreResult) -> list[str]:
    lines = ["episode reward feasible latency_ms"]
    for record in result.history:
        latency = "-" if record.latency_ms is None else f"{record.latency_ms:.6f}"
        lines.append(f"{record.episode} {record.reward:.6f} {str(record.feasible).lower()} {latency}")
    return lines


def add_explore_arguments(parser: argparse.ArgumentParser):
    parser.add_argument(
        "--config",
        help="Path of an exploration configuration file, flags override its fields",
    )
    parser.add_argument(
        "--network",
        help="Built-in network name or descriptor path",
    )
    parser.add_argument(
        "--device",
        help="Device name or alias (e.g. XC7Z020 or D_A)",
    )
    parser.add_argument(
        "--target-ms",
        dest="target_ms",
        help="Latency bound in milliseconds",
        type=float,
    )
    parser.add_argument(
        "--episodes",
        help="Number of episodes",
        type=int,
    )
    parser.add_argument(
        "--strategy",
        help="Search strategy",
        choices=STRATEGIES,
    )
    parser.add_argument(
        "--seed",
        help="Seed of the agent, the random policy and the accuracy oracle",
        type=int,
    )
    parser.add_argument(
        "--oracle",
        help="Accuracy oracle",
        choices=ORACLES,
    )
    parser.add_argument(
        "--acc_baseline",
        help="Accuracy the reward compares against",
        choices=ACCURACY_BASELINES,
    )
    parser.add_argument(
        "--num_workers",
        help="Number of threads rolling out random episodes concurrently",
        type=int,
    )
    add_device_db_argument(parser)
    add_strict_argument(parser, "Exit with code 1 if no explored configuration meets the latency bound")
    add_out_argument(parser)


def main(arg_list: list[str]) -> int:
    parser = argparse.ArgumentParser(
        description="Searches hardware knobs, bit-widths and split ratios for a latency bound."
    )
    add_explore_arguments(parser)
    args = parser.parse_args(args=arg_list)

    cfg = build_explore_config(args)
    device_db_given, device_db_file = device_db_input(args.device_db)

    inputs = {"network": (cfg.network, network_file(cfg.network)),
              "device": (cfg.device, None),
              "device_db": (device_db_given, device_db_file)}
    if args.config is not None:
        inputs["config"] = (args.config, Path(args.config))
    manifest = build_manifest("explore", inputs, seed=cfg.seed)

    result = explore_with_config(cfg, device_db_file=device_db_file)
    best = result.best

    writer = ReportWriter(args.out)
    writer.write_model("explore.json", ExploreReport(manifest=manifest, settings=cfg,
                                                     episodes_run=len(result.history),
                                                     best_reward=result.best_reward, best=best))
    writer.write_lines("explore.txt", manifest_lines(manifest) + best_point_lines(best))
    writer.write_lines("history.jsonl", [record.json() for record in result.history], echo=False)
    writer.write_lines("chart.txt", manifest_lines(manifest) + chart_lines(best), echo=False)
    writer.write_lines("rewards.txt", manifest_lines(manifest) + reward_lines(result), echo=False)

    logger.info(f"main: {len(result.history)} episodes, best reward {result.best_reward}")

    if args.strict and (best is None or not best.meets_target):
        return EXIT_INFEASIBLE
    return EXIT_OK


def run():
    run_command(main, __file__)


if __name__ == "__main__":
    run()
