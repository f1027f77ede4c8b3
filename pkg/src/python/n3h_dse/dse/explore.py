import logging
from pathlib import Path
from typing import Final, Optional

import dask.bag as dask_bag
import numpy as np
from pydantic import BaseModel, validator

from n3h_dse.cost.device import DeviceDatabase, DeviceProfile, load_device_database
from n3h_dse.dse.accuracy_oracle import AccuracyOracle, ProxyAccuracyOracle, make_oracle
from n3h_dse.dse.action_range import DEFAULT_N_REG_ROW_A, action_range_table, hw_knob_values
from n3h_dse.dse.ddpg import DdpgAgent, DdpgSettings
from n3h_dse.dse.episode import DesignPoint, EpisodeTrace, ExploreEnv, run_episode
from n3h_dse.dse.reward import DEFAULT_LAMBDA
from n3h_dse.dse.state import STATE_DIM
from n3h_dse.quantize.scheme import uniform_scheme
from n3h_dse.sched.tunables import DEFAULT_TUNABLES, CycleTunables
from n3h_dse.workload.builtin import resolve_network
from n3h_dse.workload.layer_spec import NetworkSpec

logger = logging.getLogger(__name__)

STRATEGIES: Final = ("ddpg", "random")
ORACLES: Final = ("proxy", "mlp")
ACCURACY_BASELINES: Final = ("fp32", "manual")

PROGRESS_EPISODES: Final = 50


class ExploreConfig(BaseModel):
    """Settings of one exploration run.
    #
    # Attributes:
    #     network:       built-in network name or descriptor path
    #     device:        device name or alias
    #     target_ms:     latency bound L_t
    #     episodes:      episodes to run
    #     strategy:      'ddpg' or 'random'
    #     seed:          seed of the agent, the random policy and the oracle
    #     oracle:        'proxy' or 'mlp'
    #     acc_baseline:  'fp32' compares against full precision, 'manual' against the uniform 4/4 scheme
    #     n_reg_row_a:   DSP-core register rows, not searched
    #     lam:           accuracy scaling of the reward
    #     num_workers:   parallel rollouts of the random strategy
    #     agent:         DDPG hyper-parameters
    """
    network: str
    device: str
    target_ms: float
    episodes: int = 900
    strategy: str = "ddpg"
    seed: int = 0
    oracle: str = "proxy"
    acc_baseline: str = "fp32"
    n_reg_row_a: int = DEFAULT_N_REG_ROW_A
    lam: float = DEFAULT_LAMBDA
    num_workers: int = 1
    agent: DdpgSettings = DdpgSettings()

    class Config:
        frozen = True

    @validator("target_ms")
    def target_is_positive(cls, value):
        if not value > 0:
            raise ValueError(f"target_ms must be > 0 but is {value}")
        return value

    @validator("episodes")
    def episodes_not_negative(cls, value):
        if value < 0:
            raise ValueError(f"episodes must be >= 0 but is {value}")
        return value

    @validator("strategy")
    def known_strategy(cls, value):
        if value not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES} but is '{value}'")
        return value

    @validator("oracle")
    def known_oracle(cls, value):
        if value not in ORACLES:
            raise ValueError(f"oracle must be one of {ORACLES} but is '{value}'")
        return value

    @validator("acc_baseline")
    def known_baseline(cls, value):
        if value not in ACCURACY_BASELINES:
            raise ValueError(f"acc_baseline must be one of {ACCURACY_BASELINES} but is '{value}'")
        return value


class HistoryRecord(BaseModel):
    episode: int
    reward: float
    feasible: bool
    latency_ms: Optional[float] = None
    accuracy: Optional[float] = None
    knobs: dict[str, int]
    b_wl: list[int]
    b_a: list[int]


def history_record(trace: EpisodeTrace) -> HistoryRecord:
    point = trace.point
    layers = point.config.scheme.layers
    return HistoryRecord(episode=trace.episode,
                         reward=point.reward,
                         feasible=point.feasible,
                         latency_ms=point.latency_ms,
                         accuracy=point.accuracy,
                         knobs=hw_knob_values(point.config),
                         b_wl=[layer_quant.b_wl for layer_quant in layers],
                         b_a=[layer_quant.b_a for layer_quant in layers])


class ExploreResult(BaseModel):
    strategy: str
    best: Optional[DesignPoint] = None
    history: list[HistoryRecord] = []

    @property
    def best_reward(self) -> Optional[float]:
        return None if self.best is None else self.best.reward

    def reward_series(self) -> list[float]:
        return [record.reward for record in self.history]


class _ResultCollector:

    def __init__(self,
                 strategy: str):
        self.strategy = strategy
        self.best: Optional[DesignPoint] = None
        self.history: list[HistoryRecord] = []

    def add(self,
            trace: EpisodeTrace):
        self.history.append(history_record(trace))
        point = trace.point
        if point.feasible and (self.best is None or point.reward > self.best.reward):
            self.best = point
        if (trace.episode + 1) % PROGRESS_EPISODES == 0:
            best_reward = "none" if self.best is None else f"{self.best.reward:.5f}"
            logger.info(f"explore: {self.strategy} episode {trace.episode + 1}, best reward {best_reward}")

    def result(self) -> ExploreResult:
        return ExploreResult(strategy=self.strategy, best=self.best, history=self.history)


class _RandomRollout:
    """Uniformly random actions, episode e draws from its own generator seeded by (seed, e)."""

    def __init__(self,
                 env: ExploreEnv,
                 seed: int):
        self.env = env
        self.seed = seed

    def run_episode_list(self,
                         episodes: list[int]) -> list[EpisodeTrace]:
        traces = []
        for episode in episodes:
            rng = np.random.default_rng([self.seed, episode])
            traces.append(run_episode(lambda state: float(rng.uniform(0.0, 1.0)), self.env, episode))
        return traces


def _explore_random(env: ExploreEnv,
                    episodes: int,
                    seed: int,
                    num_workers: int) -> ExploreResult:
    rollout = _RandomRollout(env, seed)
    if num_workers > 1 and episodes > 1:
        bag = dask_bag.from_sequence(range(episodes), npartitions=min(num_workers, episodes))
        bag = bag.map_partitions(rollout.run_episode_list)
        traces = sorted(bag.compute(scheduler="threads", num_workers=num_workers), key=lambda t: t.episode)
    else:
        traces = rollout.run_episode_list(list(range(episodes)))

    collector = _ResultCollector("random")
    for trace in traces:
        collector.add(trace)
    return collector.result()


def _store_episode(agent: DdpgAgent,
                   trace: EpisodeTrace):
    # every transition carries the episode reward minus the moving baseline
    states = trace.states()
    centered = agent.centered_reward(trace.reward)
    for t, step in enumerate(trace.steps):
        done = t == len(trace.steps) - 1
        next_state = np.zeros_like(states[t]) if done else states[t + 1]
        agent.observe(states[t], step.action, centered, next_state, done)


def _explore_ddpg(env: ExploreEnv,
                  episodes: int,
                  seed: int,
                  settings: DdpgSettings) -> ExploreResult:
    agent = DdpgAgent(STATE_DIM, settings, seed)
    collector = _ResultCollector("ddpg")

    for episode in range(episodes):
        if episode < settings.warmup_episodes:
            trace = run_episode(lambda state: agent.random_action(), env, episode)
        else:
            sigma = agent.noise_sigma(episode, episodes)
            trace = run_episode(lambda state: agent.act(state, sigma), env, episode)

        collector.add(trace)
        _store_episode(agent, trace)

        if episode >= settings.warmup_episodes:
            for _ in range(len(trace.steps)):
                if agent.can_update():
                    agent.update()

    return collector.result()


def explore(net: NetworkSpec,
            device: DeviceProfile,
            target_ms: float,
            episodes: int,
            strategy: str = "ddpg",
            seed: int = 0,
            oracle: Optional[AccuracyOracle] = None,
            acc_b: Optional[float] = None,
            settings: DdpgSettings = DdpgSettings(),
            tunables: CycleTunables = DEFAULT_TUNABLES,
            n_reg_row_a: int = DEFAULT_N_REG_ROW_A,
            lam: float = DEFAULT_LAMBDA,
            num_workers: int = 1) -> ExploreResult:
    """
    Runs `episodes` episodes of `strategy` and keeps the feasible design point with the highest reward.

    Parameters
    ----------
    oracle
        accuracy estimate, defaults to the proxy oracle seeded by `seed`
    acc_b
        accuracy the reward compares against, defaults to the oracle's full precision accuracy
    num_workers
        if > 1, random episodes roll out concurrently with the dask threaded scheduler,
        the result does not depend on it.  DDPG episodes always run in order.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"strategy must be one of {STRATEGIES} but is '{strategy}'")

    oracle = ProxyAccuracyOracle(seed=seed) if oracle is None else oracle
    acc_b = oracle.baseline(net) if acc_b is None else acc_b
    env = ExploreEnv(net=net, device=device, ranges=action_range_table(device), target_ms=target_ms, oracle=oracle,
                     acc_b=acc_b, tunables=tunables, n_reg_row_a=n_reg_row_a, lam=lam)

    logger.info(f"explore: entry, {strategy} over {episodes} episodes of {env.step_count} steps, "
                f"{net.name} on {device.name} within {target_ms} ms")

    if strategy == "random":
        result = _explore_random(env, episodes, seed, num_workers)
    else:
        result = _explore_ddpg(env, episodes, seed, settings)

    logger.info(f"explore: exit, best reward {result.best_reward}")

    return result


def explore_with_config(cfg: ExploreConfig,
                        device_db: Optional[DeviceDatabase] = None,
                        device_db_file: Optional[Path] = None) -> ExploreResult:
    net = resolve_network(cfg.network)
    device_db = load_device_database(device_db_file) if device_db is None else device_db
    device = device_db.get(cfg.device)
    oracle = make_oracle(cfg.oracle, cfg.seed)

    if cfg.acc_baseline == "manual":
        acc_b = oracle.estimate(net, uniform_scheme(net, weight_bits=4))
    else:
        acc_b = oracle.baseline(net)

    return explore(net, device, cfg.target_ms, cfg.episodes,
                   strategy=cfg.strategy,
                   seed=cfg.seed,
                   oracle=oracle,
                   acc_b=acc_b,
                   settings=cfg.agent,
                   n_reg_row_a=cfg.n_reg_row_a,
                   lam=cfg.lam,
                   num_workers=cfg.num_workers)
