"""DQN and DDPG with target networks, sharing the SAC diagnostics shape."""
from __future__ import annotations

from typing import List

import numpy as np

from .adam import AdamState, adam_step
from .mlp import Mlp
from .replay import Batch
from .sac import ActionSpec, LossInfo, UpdateAborted, sac_critic_loss, soft_update


class DqnAgent:
    """Factored Q-learning over ``ActionSpec`` heads (no continuous part)."""

    def __init__(self, state_dim: int, spec: ActionSpec, hidden=(128, 128), lr=3e-4, gamma=0.95,
                 tau=0.005, seed=0, option_mask=None, eps_start=1.0, eps_end=0.05, eps_decay=1000):
        if spec.n_continuous:
            raise ValueError("DQN needs a purely discrete action spec")
        self.state_dim, self.spec = int(state_dim), spec
        self.gamma, self.tau = float(gamma), float(tau)
        F, A = spec.n_factors, spec.n_options
        if option_mask is None:
            option_mask = np.ones((F, A), dtype=bool)
        self.option_mask = np.asarray(option_mask, dtype=bool).reshape(F, A)
        self.rng = np.random.default_rng(seed)
        self.q = Mlp([self.state_dim, *hidden, F * A], self.rng)
        self.target = self.q.copy()
        self.opt = AdamState.for_params(self.q.params, lr=lr)
        self.eps_start, self.eps_end, self.eps_decay = eps_start, eps_end, max(int(eps_decay), 1)
        self.steps = 0

    def networks(self):
        return {"q": self.q, "target": self.target}

    def trained_layer_sizes(self) -> List[List[int]]:
        return [self.q.layer_sizes]

    @property
    def epsilon(self) -> float:
        frac = min(self.steps / self.eps_decay, 1.0)
        return self.eps_start + frac * (self.eps_end - self.eps_start)

    def q_values(self, states) -> np.ndarray:
        q = self.q.forward(np.atleast_2d(states)).reshape(-1, self.spec.n_factors, self.spec.n_options)
        return np.where(self.option_mask, q, -np.inf)

    def act(self, state, explore: bool = True) -> np.ndarray:
        choice = self.q_values(state)[0].argmax(axis=1)
        if explore:
            eps = self.epsilon
            self.steps += 1
            flip = self.rng.uniform(size=len(choice)) < eps
            for f in np.flatnonzero(flip):
                choice[f] = self.rng.choice(np.flatnonzero(self.option_mask[f]))
        return choice.astype(float)


def dqn_targets(agent: DqnAgent, batch: Batch) -> np.ndarray:
    rewards = np.asarray(batch.rewards, dtype=float).reshape(len(batch), -1)
    live = agent.gamma * (1.0 - np.asarray(batch.dones, dtype=float))
    if not np.any(live):
        return rewards.copy()
    q_next = agent.target.forward(batch.next_states).reshape(-1, agent.spec.n_factors, agent.spec.n_options)
    best = np.where(agent.option_mask, q_next, -np.inf).max(axis=-1)
    return rewards + live[:, None] * (best @ agent.spec.group_matrix())


def dqn_loss(agent: DqnAgent, states, actions, targets):
    return sac_critic_loss(agent.q, agent.spec, states, actions, targets)


def dqn_update(agent: DqnAgent, batch: Batch) -> LossInfo:
    if len(batch) == 0:
        raise ValueError("empty batch")
    targets = dqn_targets(agent, batch)
    loss, grads = dqn_loss(agent, np.asarray(batch.states, float), batch.actions, targets)
    if not np.isfinite(loss):
        raise UpdateAborted(f"non-finite DQN loss {loss}")
    adam_step(agent.opt, agent.q.params, grads)
    soft_update(agent.target, agent.q, agent.tau)
    return LossInfo(loss, 0.0, 0.0)


class DdpgAgent:
    """Deterministic tanh actor and a critic with one output per reward component."""

    def __init__(self, state_dim: int, action_dim: int, n_rewards: int = 1, hidden=(128, 128),
                 lr=3e-4, gamma=0.95, tau=0.005, seed=0, noise_std=0.1):
        self.state_dim, self.action_dim, self.n_rewards = int(state_dim), int(action_dim), int(n_rewards)
        self.gamma, self.tau, self.noise_std = float(gamma), float(tau), float(noise_std)
        self.rng = np.random.default_rng(seed)
        self.actor = Mlp([self.state_dim, *hidden, self.action_dim], self.rng, out_activation="tanh")
        self.critic = Mlp([self.state_dim + self.action_dim, *hidden, self.n_rewards], self.rng)
        self.target_actor = self.actor.copy()
        self.target_critic = self.critic.copy()
        self.actor_opt = AdamState.for_params(self.actor.params, lr=lr)
        self.critic_opt = AdamState.for_params(self.critic.params, lr=lr)

    def networks(self):
        return {"actor": self.actor, "critic": self.critic,
                "target_actor": self.target_actor, "target_critic": self.target_critic}

    def trained_layer_sizes(self) -> List[List[int]]:
        return [self.actor.layer_sizes, self.critic.layer_sizes]

    def act(self, state, explore: bool = True) -> np.ndarray:
        a = self.actor.forward(np.asarray(state, dtype=float))
        if explore:
            a = np.clip(a + self.noise_std * self.rng.standard_normal(a.shape), -1.0, 1.0)
        return a


def ddpg_targets(agent: DdpgAgent, batch: Batch) -> np.ndarray:
    rewards = np.asarray(batch.rewards, dtype=float).reshape(len(batch), -1)
    live = agent.gamma * (1.0 - np.asarray(batch.dones, dtype=float))
    if not np.any(live):
        return rewards.copy()
    a_next = agent.target_actor.forward(batch.next_states)
    q_next = agent.target_critic.forward(np.hstack([batch.next_states, a_next]))
    return rewards + live[:, None] * q_next


def ddpg_critic_loss(agent: DdpgAgent, states, actions, targets):
    M = len(states)
    q, cache = agent.critic.forward(np.hstack([states, actions]), return_cache=True)
    err = q - targets
    loss = float(np.mean(np.sum(err ** 2, axis=1)))
    grads, _ = agent.critic.backward(cache, 2.0 * err / M)
    return loss, grads


def ddpg_actor_loss(agent: DdpgAgent, states):
    """J = -mean_batch sum_r Q_r(s, mu(s))."""
    M = len(states)
    a, a_cache = agent.actor.forward(states, return_cache=True)
    q, q_cache = agent.critic.forward(np.hstack([states, a]), return_cache=True)
    loss = float(-np.mean(q.sum(axis=1)))
    _, dx = agent.critic.backward(q_cache, np.full(q.shape, -1.0 / M), input_only=True)
    grads, _ = agent.actor.backward(a_cache, dx[:, agent.state_dim:])
    return loss, grads


def ddpg_update(agent: DdpgAgent, batch: Batch) -> LossInfo:
    if len(batch) == 0:
        raise ValueError("empty batch")
    states = np.asarray(batch.states, dtype=float)
    actions = np.asarray(batch.actions, dtype=float).reshape(len(batch), -1)
    targets = ddpg_targets(agent, batch)
    lc, gc = ddpg_critic_loss(agent, states, actions, targets)
    la, ga = ddpg_actor_loss(agent, states)
    if not np.isfinite([lc, la]).all():
        raise UpdateAborted(f"non-finite DDPG loss (critic {lc}, actor {la})")
    adam_step(agent.critic_opt, agent.critic.params, gc)
    adam_step(agent.actor_opt, agent.actor.params, ga)
    soft_update([agent.target_actor, agent.target_critic], [agent.actor, agent.critic], agent.tau)
    return LossInfo(lc, la, 0.0)
