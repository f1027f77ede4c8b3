"""
One rollout of the agent: six hardware actions fix the cores, then two actions per layer fix
its LUT-core weight bits and activation bits, after which the layer's split ratio is planned.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel

from n3h_dse.cost.device import DeviceProfile
from n3h_dse.cost.resource_model import ResourceReport, check_fit
from n3h_dse.dse.accuracy_oracle import AccuracyOracle
from n3h_dse.dse.action_range import DEFAULT_N_REG_ROW_A, HW_KNOBS, ActionRangeTable, decode_bit_action, \
    decode_hw_action, decode_hw_config
from n3h_dse.dse.reward import DEFAULT_LAMBDA, INFEASIBLE_REWARD, reward
from n3h_dse.dse.state import ACTIVATION_STEP, HARDWARE_PHASE, LUT_WEIGHT_STEP, QUANTIZATION_PHASE, StateContext, \
    StateEncoder
from n3h_dse.quantize.scheme import EDGE_LAYER_BITS, LayerQuant, QuantScheme
from n3h_dse.sched.arch_config import ArchConfig
from n3h_dse.sched.tunables import DEFAULT_TUNABLES, CycleTunables, cycles_to_ms
from n3h_dse.split.split_plan import LayerSplit, SplitPlan, plan_layer
from n3h_dse.workload.layer_spec import NetworkSpec

logger = logging.getLogger(__name__)

Policy = Callable[[np.ndarray], float]


class DesignPoint(BaseModel):
    """One explored configuration.
    #
    # Attributes:
    #     config:      cores with the chosen scheme, and the planned ratios if the cores fit the device
    #     resources:   resource estimate of the cores
    #     feasible:    true if the cores fit the device
    #     plan:        split plan, None if infeasible
    #     latency_ms:  model latency L_m, None if infeasible
    #     accuracy:    oracle accuracy acc_q, None if infeasible
    #     baseline:    accuracy acc_b the reward compares against
    #     target_ms:   latency bound L_t
    #     reward:      episode reward
    """
    config: ArchConfig
    resources: ResourceReport
    feasible: bool
    plan: Optional[SplitPlan] = None
    latency_ms: Optional[float] = None
    accuracy: Optional[float] = None
    baseline: float
    target_ms: float
    reward: float

    @property
    def meets_target(self) -> bool:
        return self.latency_ms is not None and self.latency_ms <= self.target_ms


class EpisodeStep(BaseModel):
    knob: str
    state: list[float]
    action: float
    value: int
    reward: float = 0.0


class EpisodeTrace(BaseModel):
    episode: int = 0
    steps: list[EpisodeStep]
    point: DesignPoint

    @property
    def reward(self) -> float:
        return self.point.reward

    def states(self) -> np.ndarray:
        return np.array([step.state for step in self.steps])


@dataclass
class ExploreEnv:
    """
    Everything an episode is evaluated against.

    Attributes
    ----------
    net : NetworkSpec
        the workload
    device : DeviceProfile
        device the cores must fit
    ranges : ActionRangeTable
        knob ranges of the device
    target_ms : float
        latency bound L_t
    oracle : AccuracyOracle
        accuracy estimate of quantized schemes
    acc_b : float
        accuracy the reward compares against
    """
    net: NetworkSpec
    device: DeviceProfile
    ranges: ActionRangeTable
    target_ms: float
    oracle: AccuracyOracle
    acc_b: float
    tunables: CycleTunables = DEFAULT_TUNABLES
    n_reg_row_a: int = DEFAULT_N_REG_ROW_A
    lam: float = DEFAULT_LAMBDA
    encoder: StateEncoder = field(init=False)

    def __post_init__(self):
        if self.target_ms <= 0:
            raise ValueError(f"target_ms must be > 0 but is {self.target_ms}")
        self.encoder = StateEncoder(self.net)

    @property
    def step_count(self) -> int:
        return len(HW_KNOBS) + 2 * len(self.net.layers)


def run_episode(policy: Policy,
                env: ExploreEnv,
                episode: int = 0) -> EpisodeTrace:
    """
    Rolls out 6 + 2N actions of `policy`, the terminal reward sits on the last step.

    First/last layer bit actions are taken but overridden to 8/8.  Configurations that do not fit
    the device are not simulated and get INFEASIBLE_REWARD.
    """
    steps: list[EpisodeStep] = []
    a_prev = 0.0

    hw_actions = []
    for t, knob in enumerate(HW_KNOBS):
        state = env.encoder.build_state(StateContext(phase=HARDWARE_PHASE, a_prev=a_prev))
        a_prev = policy(state)
        hw_actions.append(a_prev)
        steps.append(EpisodeStep(knob=knob, state=state.tolist(), action=a_prev,
                                 value=decode_hw_action(a_prev, t, env.ranges)))

    cfg = decode_hw_config(hw_actions, env.ranges, env.n_reg_row_a)
    resources = check_fit(cfg, env.device)

    b_wl_min, b_wl_max = env.ranges.b_wl_range
    b_a_min, b_a_max = env.ranges.b_a_range
    layer_quants: list[LayerQuant] = []
    layer_splits: list[LayerSplit] = []
    ratio = 0.0
    for layer in env.net.layers:
        state = env.encoder.build_state(StateContext(phase=QUANTIZATION_PHASE, a_prev=a_prev, layer=layer,
                                                     id_mn=LUT_WEIGHT_STEP, ratio=ratio))
        a_prev = policy(state)
        b_wl = EDGE_LAYER_BITS if layer.is_first_or_last else decode_bit_action(a_prev, b_wl_min, b_wl_max)
        steps.append(EpisodeStep(knob=f"b_wl[{layer.index}]", state=state.tolist(), action=a_prev, value=b_wl))

        state = env.encoder.build_state(StateContext(phase=QUANTIZATION_PHASE, a_prev=a_prev, layer=layer,
                                                     id_mn=ACTIVATION_STEP, ratio=ratio))
        a_prev = policy(state)
        b_a = EDGE_LAYER_BITS if layer.is_first_or_last else decode_bit_action(a_prev, b_a_min, b_a_max)
        steps.append(EpisodeStep(knob=f"b_a[{layer.index}]", state=state.tolist(), action=a_prev, value=b_a))

        layer_quants.append(LayerQuant(index=layer.index, b_a=b_a, b_wl=b_wl))
        if resources.feasible:
            layer_split = plan_layer(layer, cfg, b_a, b_wl, env.tunables)
            layer_splits.append(layer_split)
            ratio = layer_split.ratio

    scheme = QuantScheme(layers=layer_quants)
    cfg = cfg.with_scheme(scheme)

    if resources.feasible:
        plan = SplitPlan(network=env.net.name, device=cfg.device, layers=layer_splits)
        cfg = cfg.with_ratios(plan.ratios())
        latency_ms = cycles_to_ms(plan.cycles)
        accuracy = env.oracle.estimate(env.net, scheme, plan.ratios())
        episode_reward = reward(latency_ms, env.target_ms, accuracy, env.acc_b, env.lam)
        point = DesignPoint(config=cfg, resources=resources, feasible=True, plan=plan, latency_ms=latency_ms,
                            accuracy=accuracy, baseline=env.acc_b, target_ms=env.target_ms, reward=episode_reward)
    else:
        point = DesignPoint(config=cfg, resources=resources, feasible=False, baseline=env.acc_b,
                            target_ms=env.target_ms, reward=INFEASIBLE_REWARD)

    steps[-1] = steps[-1].copy(update={"reward": point.reward})

    logger.debug(f"run_episode: episode {episode}, {'feasible' if point.feasible else 'infeasible'}, "
                 f"latency {point.latency_ms}, accuracy {point.accuracy}, reward {point.reward:.5f}")

    return EpisodeTrace(episode=episode, steps=steps, point=point)
