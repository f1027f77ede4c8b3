import copy

import numpy as np
import pytest
import torch
from pydantic import ValidationError

from n3h_dse.dse.ddpg import DdpgAgent, DdpgSettings, ReplayBatch, ReplayBuffer, critic_loss, ddpg_step, \
    soft_update
from n3h_dse.dse.state import STATE_DIM


def _random_batch(rng: np.random.Generator,
                  size: int) -> ReplayBatch:
    return ReplayBatch(states=rng.uniform(size=(size, STATE_DIM)),
                       actions=rng.uniform(size=(size, 1)),
                       rewards=rng.normal(size=(size, 1)),
                       next_states=rng.uniform(size=(size, STATE_DIM)),
                       dones=np.zeros((size, 1)))


def test_critic_gradient_check():
    agent = DdpgAgent(STATE_DIM, seed=3)
    batch = _random_batch(np.random.default_rng(seed=11), 16)
    critic = agent.critic
    states, actions, rewards = (torch.from_numpy(x) for x in (batch.states, batch.actions, batch.rewards))

    critic.zero_grad()
    critic_loss(critic, states, actions, rewards).backward()
    analytic = [param.grad.detach().clone() for param in critic.parameters()]

    def loss() -> float:
        return float(critic_loss(critic, states, actions, rewards))

    eps = 1e-6
    numeric = []
    with torch.no_grad():
        for param in critic.parameters():
            flat = param.view(-1)
            grad = torch.zeros_like(flat)
            for i in range(flat.numel()):
                original = float(flat[i])
                flat[i] = original + eps
                upper = loss()
                flat[i] = original - eps
                lower = loss()
                flat[i] = original
                grad[i] = (upper - lower) / (2 * eps)
            numeric.append(grad)

    analytic_flat = torch.cat([g.reshape(-1) for g in analytic])
    numeric_flat = torch.cat(numeric)
    relative_error = float(torch.linalg.norm(analytic_flat - numeric_flat) /
                           (torch.linalg.norm(analytic_flat) + torch.linalg.norm(numeric_flat)))
    assert relative_error < 1e-4, f"critic gradients differ from finite differences by {relative_error}"


def test_soft_update_identity():
    agent = DdpgAgent(STATE_DIM, DdpgSettings(hidden=8), seed=1)
    rng = np.random.default_rng(seed=2)
    with torch.no_grad():
        for param in agent.critic.parameters():
            param.add_(torch.from_numpy(rng.normal(size=tuple(param.shape))))

    before = [param.detach().clone() for param in agent.critic_target.parameters()]
    soft_update(agent.critic_target, agent.critic, 0.01)

    for target, online, old in zip(agent.critic_target.parameters(), agent.critic.parameters(), before):
        assert torch.equal(0.01 * online.detach() + (1.0 - 0.01) * old, target.detach()), \
            "target must be tau*online+(1-tau)*target"


def test_initial_weights_are_seeded():
    first = DdpgAgent(STATE_DIM, DdpgSettings(hidden=8), seed=5)
    second = DdpgAgent(STATE_DIM, DdpgSettings(hidden=8), seed=5)
    other = DdpgAgent(STATE_DIM, DdpgSettings(hidden=8), seed=6)

    first_params = list(first.actor.parameters()) + list(first.critic.parameters())
    second_params = list(second.actor.parameters()) + list(second.critic.parameters())
    assert all(torch.equal(a, b) for a, b in zip(first_params, second_params)), "equal seeds must give equal weights"
    assert not torch.equal(first.critic.net[0].weight, other.critic.net[0].weight), "seed ignored"
    assert torch.float64 == first.actor.net[0].weight.dtype, "networks should run in float64"

    output_weights = first.actor.net[-2].weight
    assert float(output_weights.abs().max()) <= 0.03, "output weights should start small"
    for target, online in zip(first.actor_target.parameters(), first.actor.parameters()):
        assert torch.equal(target, online), "targets must start as copies of the online networks"


def test_critic_loss_decreases_on_constant_environment():
    agent = DdpgAgent(STATE_DIM, DdpgSettings(critic_lr=1e-4, batch_size=16), seed=4)
    rng = np.random.default_rng(seed=5)
    state = np.full(STATE_DIM, 0.5)
    for _ in range(64):
        agent.observe(state, float(rng.uniform()), 0.0, state, False)

    critic_losses = [agent.update()[0] for _ in range(100)]
    assert np.mean(critic_losses[-10:]) < np.mean(critic_losses[:10]), "critic loss should decrease"


def test_update_is_deterministic():
    batch = _random_batch(np.random.default_rng(seed=6), 32)
    first = DdpgAgent(STATE_DIM, seed=7)
    second = DdpgAgent(STATE_DIM, seed=7)

    for _ in range(3):
        assert ddpg_step(first, batch) == ddpg_step(second, batch), "losses differ for equal seeds"
    first_params = list(first.actor.parameters()) + list(first.critic_target.parameters())
    second_params = list(second.actor.parameters()) + list(second.critic_target.parameters())
    for a, b in zip(first_params, second_params):
        assert torch.equal(a, b), "parameters differ for equal seeds"


def test_actions():
    agent = DdpgAgent(STATE_DIM, DdpgSettings(warmup_episodes=10), seed=8)
    state = np.random.default_rng(seed=9).uniform(size=STATE_DIM)

    mean = agent.act(state)
    assert 0.4 < mean < 0.6, "an untrained actor should act near 0.5"
    noisy = [agent.act(state, sigma=0.5) for _ in range(200)]
    assert all(0.0 <= a <= 1.0 for a in noisy), "noisy actions must stay in [0, 1]"
    assert len(set(noisy)) > 100, "noise missing"

    assert 0.5 == agent.noise_sigma(episode=10, episodes=110), "noise starts decaying after the warm-up"
    assert 0.275 == pytest.approx(agent.noise_sigma(episode=60, episodes=110)), "noise decays linearly"
    assert 0.05 == pytest.approx(agent.noise_sigma(episode=110, episodes=110)), "noise ends at sigma_min"


def test_reward_baseline():
    agent = DdpgAgent(STATE_DIM, DdpgSettings(baseline_alpha=0.5))
    assert 0.0 == agent.centered_reward(-1.0), "first reward sets the baseline"
    assert 1.0 == agent.centered_reward(0.0), "rewards must be centered on the moving average"
    assert -0.5 == agent.reward_baseline, "baseline should move halfway"


def test_replay_buffer():
    buffer = ReplayBuffer(capacity=4, state_dim=2)
    for i in range(6):
        buffer.add(np.full(2, i), 0.1 * i, float(i), np.full(2, i + 1), i == 5)

    assert 4 == len(buffer), "buffer must not grow past its capacity"
    assert {2.0, 3.0, 4.0, 5.0} == set(buffer.rewards.ravel()), "oldest transitions must be overwritten"

    batch = buffer.sample(4, np.random.default_rng(seed=0))
    assert 4 == len(batch) and 1.0 == batch.dones.sum(), "invalid batch"

    with pytest.raises(ValueError, match="fewer than the batch size"):
        buffer.sample(5, np.random.default_rng(seed=0))


def test_settings_validation():
    with pytest.raises(ValidationError, match="tau must be in"):
        DdpgSettings(tau=0.0)
    with pytest.raises(ValidationError, match="batch_size must be >= 1"):
        DdpgSettings(batch_size=0)

    settings = DdpgSettings(hidden=32)
    assert settings == DdpgSettings.parse_raw(settings.json()), "json round trip failed"
    assert copy.deepcopy(settings) == settings, "settings must compare by value"
