"""
Actor-critic agent (DDPG) choosing one action in [0, 1] per step.

Actor and critic are torch perceptrons with two tanh hidden layers.  The actor ends in a sigmoid,
the critic is linear in its output and reads the action next to the state.  Both have target
copies that follow the online networks by soft updates.  All weights are float64 and drawn from
the agent's numpy generator, so a seed fixes the whole run.
"""
import copy
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import torch
import torch.nn.functional as F
from pydantic import BaseModel, validator
from scipy.stats import truncnorm
from torch import nn

logger = logging.getLogger(__name__)

# last layer weights start small so initial actions sit near 0.5 and values near 0
OUTPUT_INIT_RANGE = 0.03
BIAS_INIT = 0.001


class DdpgSettings(BaseModel):
    """Agent hyper-parameters.
    #
    # Attributes:
    #     hidden:            width of both hidden layers
    #     actor_lr:          Adam learning rate of the actor
    #     critic_lr:         Adam learning rate of the critic
    #     tau:               soft update rate of the target networks
    #     discount:          weight of the bootstrapped target value, 0 regresses on the stored rewards only
    #     noise_sigma:       initial exploration noise
    #     noise_sigma_min:   exploration noise after the decay
    #     noise_decay_episodes: episodes over which the noise decays linearly, None decays over the whole run
    #     replay_capacity:   transitions kept in the replay buffer
    #     batch_size:        transitions per update
    #     warmup_episodes:   episodes with uniformly random actions before updates start
    #     baseline_alpha:    rate of the moving reward average subtracted before storing transitions
    """
    hidden: int = 64
    actor_lr: float = 1e-4
    critic_lr: float = 1e-3
    tau: float = 0.01
    discount: float = 0.0
    noise_sigma: float = 0.5
    noise_sigma_min: float = 0.05
    noise_decay_episodes: Optional[int] = None
    replay_capacity: int = 10_000
    batch_size: int = 64
    warmup_episodes: int = 20
    baseline_alpha: float = 0.5

    class Config:
        frozen = True

    @validator("hidden", "replay_capacity", "batch_size")
    def is_positive(cls, value, field):
        if value < 1:
            raise ValueError(f"{field.name} must be >= 1 but is {value}")
        return value

    @validator("tau", "baseline_alpha")
    def is_rate(cls, value, field):
        if not 0.0 < value <= 1.0:
            raise ValueError(f"{field.name} must be in (0, 1] but is {value}")
        return value

    @validator("discount")
    def discount_in_range(cls, value):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"discount must be between 0 and 1 but is {value}")
        return value

    @validator("noise_sigma", "noise_sigma_min")
    def sigma_is_positive(cls, value, field):
        if not value > 0:
            raise ValueError(f"{field.name} must be > 0 but is {value}")
        return value


def _perceptron(sizes: list[int],
                rng: np.random.Generator) -> list[nn.Module]:
    """Linear layers of `sizes` with tanh between them, hidden weights uniform in +-1/sqrt(fan_in)."""
    layers: list[nn.Module] = []
    layer_count = len(sizes) - 1
    for position, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        is_output = position == layer_count - 1
        bound = OUTPUT_INIT_RANGE if is_output else 1.0 / np.sqrt(fan_in)
        linear = nn.Linear(fan_in, fan_out, dtype=torch.float64)
        with torch.no_grad():
            linear.weight.copy_(torch.from_numpy(rng.uniform(-bound, bound, size=(fan_out, fan_in))))
            linear.bias.fill_(BIAS_INIT)
        layers.append(linear)
        if not is_output:
            layers.append(nn.Tanh())
    return layers


class Actor(nn.Module):

    def __init__(self,
                 state_dim: int,
                 hidden: int,
                 rng: np.random.Generator):
        super().__init__()
        self.net = nn.Sequential(*_perceptron([state_dim, hidden, hidden, 1], rng), nn.Sigmoid())

    def forward(self,
                states: torch.Tensor) -> torch.Tensor:
        return self.net(states)


class Critic(nn.Module):
    """Q(s, a) of a batch of states and their (batch, 1) actions."""

    def __init__(self,
                 state_dim: int,
                 hidden: int,
                 rng: np.random.Generator):
        super().__init__()
        self.net = nn.Sequential(*_perceptron([state_dim + 1, hidden, hidden, 1], rng))

    def forward(self,
                states: torch.Tensor,
                actions: torch.Tensor) -> torch.Tensor:
        return self.net(torch.cat([states, actions], dim=1))


@dataclass
class ReplayBatch:
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    dones: np.ndarray

    def __len__(self):
        return len(self.rewards)


class ReplayBuffer:
    """Ring buffer of (state, action, reward, next state, done) transitions."""

    def __init__(self,
                 capacity: int,
                 state_dim: int):
        self.capacity = capacity
        self.states = np.zeros((capacity, state_dim))
        self.actions = np.zeros((capacity, 1))
        self.rewards = np.zeros((capacity, 1))
        self.next_states = np.zeros((capacity, state_dim))
        self.dones = np.zeros((capacity, 1))
        self.position = 0
        self.size = 0

    def add(self,
            state: np.ndarray,
            action: float,
            reward: float,
            next_state: np.ndarray,
            done: bool):
        self.states[self.position] = state
        self.actions[self.position] = action
        self.rewards[self.position] = reward
        self.next_states[self.position] = next_state
        self.dones[self.position] = float(done)
        self.position = (self.position + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self,
               batch_size: int,
               rng: np.random.Generator) -> ReplayBatch:
        if self.size < batch_size:
            raise ValueError(f"replay buffer holds {self.size} transitions, fewer than the batch size {batch_size}")
        rows = rng.choice(self.size, size=batch_size, replace=False)
        return ReplayBatch(states=self.states[rows],
                           actions=self.actions[rows],
                           rewards=self.rewards[rows],
                           next_states=self.next_states[rows],
                           dones=self.dones[rows])

    def __len__(self):
        return self.size


def critic_loss(critic: Critic,
                states: torch.Tensor,
                actions: torch.Tensor,
                targets: torch.Tensor) -> torch.Tensor:
    """Mean squared error of Q(s, a) against `targets`."""
    return F.mse_loss(critic(states, actions), targets)


def soft_update(target: nn.Module,
                online: nn.Module,
                tau: float):
    with torch.no_grad():
        for target_param, online_param in zip(target.parameters(), online.parameters()):
            target_param.copy_(tau * online_param + (1.0 - tau) * target_param)


class DdpgAgent:

    def __init__(self,
                 state_dim: int,
                 settings: DdpgSettings = DdpgSettings(),
                 seed: int = 0):
        self.state_dim = state_dim
        self.settings = settings
        self.rng = np.random.default_rng(seed)

        self.actor = Actor(state_dim, settings.hidden, self.rng)
        self.critic = Critic(state_dim, settings.hidden, self.rng)
        self.actor_target = copy.deepcopy(self.actor)
        self.critic_target = copy.deepcopy(self.critic)
        self.actor_optimizer = torch.optim.Adam(self.actor.parameters(), lr=settings.actor_lr)
        self.critic_optimizer = torch.optim.Adam(self.critic.parameters(), lr=settings.critic_lr)

        self.replay = ReplayBuffer(settings.replay_capacity, state_dim)
        self.reward_baseline: Optional[float] = None

    def noise_sigma(self,
                    episode: int,
                    episodes: int) -> float:
        decay_episodes = self.settings.noise_decay_episodes or max(episodes - self.settings.warmup_episodes, 1)
        progress = min(max(episode - self.settings.warmup_episodes, 0) / decay_episodes, 1.0)
        return self.settings.noise_sigma + progress * (self.settings.noise_sigma_min - self.settings.noise_sigma)

    def random_action(self) -> float:
        return float(self.rng.uniform(0.0, 1.0))

    @torch.no_grad()
    def act(self,
            state: np.ndarray,
            sigma: Optional[float] = None) -> float:
        """Actor output for `state`, perturbed by truncated Gaussian noise within [0, 1] if `sigma` is given."""
        mean = float(self.actor(torch.as_tensor(state, dtype=torch.float64).reshape(1, -1))[0, 0])
        if sigma is None:
            return mean
        lower, upper = (0.0 - mean) / sigma, (1.0 - mean) / sigma
        sample = truncnorm.rvs(lower, upper, loc=mean, scale=sigma, random_state=self.rng)
        return float(np.clip(sample, 0.0, 1.0))

    def centered_reward(self,
                        episode_reward: float) -> float:
        """Subtracts the moving average of episode rewards, then folds `episode_reward` into it."""
        if self.reward_baseline is None:
            self.reward_baseline = episode_reward
        centered = episode_reward - self.reward_baseline
        self.reward_baseline += self.settings.baseline_alpha * (episode_reward - self.reward_baseline)
        return centered

    def observe(self,
                state: np.ndarray,
                action: float,
                reward: float,
                next_state: np.ndarray,
                done: bool):
        self.replay.add(state, action, reward, next_state, done)

    def can_update(self) -> bool:
        return len(self.replay) >= self.settings.batch_size

    def update(self) -> tuple[float, float]:
        return ddpg_step(self, self.replay.sample(self.settings.batch_size, self.rng))


def ddpg_step(agent: DdpgAgent,
              batch: ReplayBatch) -> tuple[float, float]:
    """
    One critic and one actor update on `batch`, then soft updates of both target networks.

    Returns
    -------
    tuple[float, float]
        critic loss before the update and actor loss (-mean Q) under the updated critic
    """
    settings = agent.settings
    states = torch.from_numpy(batch.states)
    actions = torch.from_numpy(batch.actions)

    targets = torch.from_numpy(batch.rewards)
    if settings.discount > 0:
        with torch.no_grad():
            next_states = torch.from_numpy(batch.next_states)
            next_q = agent.critic_target(next_states, agent.actor_target(next_states))
            targets = targets + settings.discount * (1.0 - torch.from_numpy(batch.dones)) * next_q

    agent.critic_optimizer.zero_grad()
    value_loss = critic_loss(agent.critic, states, actions, targets)
    value_loss.backward()
    agent.critic_optimizer.step()

    # the actor climbs Q, the critic gradients this leaves behind are cleared before its next step
    agent.actor_optimizer.zero_grad()
    policy_loss = -agent.critic(states, agent.actor(states)).mean()
    policy_loss.backward()
    agent.actor_optimizer.step()

    soft_update(agent.critic_target, agent.critic, settings.tau)
    soft_update(agent.actor_target, agent.actor, settings.tau)

    return float(value_loss), float(policy_loss)
