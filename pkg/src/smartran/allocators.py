"""Centralized and distributed resource allocators built on the RL toolkit.

Both regimes share one action layout. For every (RRS b, subcarrier n) there
are ``L_max`` selection heads; each head picks ``idle`` or one of the users
served by b, and carries a power fraction in [0, 1]. Heads that pick the same
user on the same carrier are merged. Power is ``P_max * fraction``, rescaled
per RRS whenever the fractions of that RRS add up to more than one, so every
decoded allocation is feasible by construction.

The centralized agent sees every RRS and is rewarded with the per-carrier
rates of the whole network. Each distributed agent sees only the gains of its
own users and is rewarded with its own carriers' rates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .metrics import CNT, DST, ComplexityModel, _mode
from .netmodel import Allocation, ChannelState, RateReport, Topology
from .rl import ActionSpec, DdpgAgent, DqnAgent, ReplayBuffer, SacAgent, ddpg_update, dqn_update, sac_update


class GainNormalizer:
    """Scalar standardisation of log10 gains, frozen after a warm-up.

    Until the first update the transform is plain ``log10``.
    """

    def __init__(self, warmup_slots: int = 500):
        self.warmup_slots = int(warmup_slots)
        self.slots = 0
        self.count = 0
        self.mean = 0.0
        self._m2 = 0.0
        self.frozen = self.warmup_slots == 0

    @property
    def std(self) -> float:
        if self.count < 2:
            return 1.0
        return max(math.sqrt(self._m2 / self.count), 1e-6)

    def update(self, topo: Topology, ch: ChannelState) -> None:
        if self.frozen or topo.num_users == 0:
            return
        x = np.log10(served_gains(topo, ch)).ravel()
        n = x.size
        delta = x.mean() - self.mean
        total = self.count + n
        self.mean += delta * n / total
        self._m2 += ((x - x.mean()) ** 2).sum() + delta ** 2 * self.count * n / total
        self.count = total
        self.slots += 1
        if self.slots >= self.warmup_slots:
            self.frozen = True

    def freeze(self) -> None:
        self.frozen = True

    def transform(self, gains) -> np.ndarray:
        return (np.log10(gains) - self.mean) / self.std


def served_gains(topo: Topology, ch: ChannelState) -> np.ndarray:
    """Gain of each user to its serving RRS, shape (K, N)."""
    return ch.gains[np.arange(topo.num_users), topo.serving_rrs, :]


def default_k_max(topo_or_users, num_rrs: Optional[int] = None) -> int:
    """Per-RRS user slot budget: the round-robin ceiling ceil(K / B)."""
    if isinstance(topo_or_users, Topology):
        return max(1, int(topo_or_users.users_per_rrs().max(initial=0)))
    return max(1, math.ceil(int(topo_or_users) / int(num_rrs)))


def _served_block(topo, ch, b, k_max, normalizer):
    users = topo.served_users(b)
    if len(users) > k_max:
        raise ValueError(f"RRS {b} serves {len(users)} users, more than K_max={k_max}")
    block = np.zeros((k_max, topo.num_subcarriers))
    if len(users):
        g = ch.gains[users, b, :]
        block[:len(users)] = normalizer.transform(g) if normalizer is not None else np.log10(g)
    return block, len(users)


def encode_state_centralized(topo: Topology, ch: ChannelState, k_max: int, normalizer=None) -> np.ndarray:
    """Per-RRS blocks of ``k_max x N`` served-user log gains, then B load features.

    Length ``B * k_max * N + B``; padding slots are zero and the load feature
    of RRS b is ``K_b / k_max``.
    """
    blocks, loads = [], []
    for b in range(topo.num_rrs):
        block, kb = _served_block(topo, ch, b, k_max, normalizer)
        blocks.append(block.ravel())
        loads.append(kb / k_max)
    return np.concatenate(blocks + [np.asarray(loads, dtype=float)])


def encode_state_local(topo: Topology, ch: ChannelState, b: int, k_max: int, normalizer=None) -> np.ndarray:
    """What RRS b knows on its own: its users' gains to itself and its load."""
    block, kb = _served_block(topo, ch, b, k_max, normalizer)
    return np.concatenate([block.ravel(), [kb / k_max]])


@dataclass(frozen=True)
class ActionLayout:
    """Heads ordered (rrs, subcarrier, slot); option 0 is idle, option i the i-th served user."""
    rrs: tuple
    num_subcarriers: int
    l_max: int
    k_max: int

    @property
    def n_factors(self) -> int:
        return len(self.rrs) * self.num_subcarriers * self.l_max

    @property
    def n_options(self) -> int:
        return self.k_max + 1

    @property
    def n_carriers(self) -> int:
        return len(self.rrs) * self.num_subcarriers

    def reward_groups(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_carriers), self.l_max)

    def option_mask(self, topo: Topology) -> np.ndarray:
        loads = topo.users_per_rrs()
        mask = np.zeros((self.n_factors, self.n_options), dtype=bool)
        per_rrs = self.num_subcarriers * self.l_max
        for i, b in enumerate(self.rrs):
            mask[i * per_rrs:(i + 1) * per_rrs, :loads[b] + 1] = True
        return mask

    def spec(self, continuous: bool = True) -> ActionSpec:
        return ActionSpec(self.n_factors, self.n_options, self.n_factors if continuous else 0,
                          tuple(self.reward_groups()))


def project_power(power: np.ndarray, max_power: float) -> np.ndarray:
    """Rescale each RRS whose total exceeds ``max_power`` so it sums to exactly that."""
    totals = power.sum(axis=(1, 2))
    scale = np.where(totals > max_power, max_power / np.where(totals > 0, totals, 1.0), 1.0)
    return power * scale[:, None, None]


def decode_action(topo: Topology, layout: ActionLayout, choices, fractions) -> Allocation:
    """Turn head choices and power fractions into a feasible allocation."""
    choices = np.asarray(choices).astype(int).reshape(len(layout.rrs), layout.num_subcarriers, layout.l_max)
    fractions = np.clip(np.asarray(fractions, dtype=float), 0.0, 1.0)
    fractions = fractions.reshape(choices.shape)
    alloc = Allocation.empty(topo)
    for i, b in enumerate(layout.rrs):
        served = topo.served_users(b)
        n_idx, l_idx = np.nonzero(choices[i] > 0)
        opts = choices[i][n_idx, l_idx]
        if np.any(opts > len(served)):
            raise ValueError(f"option beyond the {len(served)} users served by RRS {b}")
        users = served[opts - 1]
        alloc.assignment[b, n_idx, users] = True
        np.add.at(alloc.power[b], (n_idx, users), topo.max_power * fractions[i][n_idx, l_idx])
    alloc.power = project_power(alloc.power, topo.max_power)
    return alloc


def carrier_rewards(report: RateReport, rrs: Sequence[int], scale: float) -> np.ndarray:
    return report.per_carrier_rate[list(rrs)].ravel() / scale


def reward_rap(report: RateReport, mode: str, scale: float, rrs: Optional[int] = None) -> float:
    """Network rate for the BBU agent, own-cell rate for RRS agent ``rrs``."""
    if _mode(mode) == CNT or rrs is None:
        return float(report.total_rate / scale)
    return float(report.per_carrier_rate[rrs].sum() / scale)


@dataclass(frozen=True)
class LearnerConfig:
    learner: str = "sac"
    hidden: tuple = (128, 128)
    lr: float = 3e-4
    gamma: float = 0.95
    tau: float = 0.005
    alpha: float = 0.2
    batch_size: int = 64
    buffer_size: int = 100_000
    updates_per_slot: int = 1

    @classmethod
    def from_scenario(cls, cfg, learner: Optional[str] = None) -> "LearnerConfig":
        return cls(learner or cfg.rap_learner, tuple(cfg.hidden), cfg.lr, cfg.gamma, cfg.tau, cfg.alpha,
                   cfg.batch_size, cfg.buffer_size, cfg.updates_per_slot)


def rap_layer_sizes(learner: str, state_dim: int, layout: ActionLayout, hidden) -> List[List[int]]:
    """Widths of the networks a RAP agent trains; used for complexity accounting."""
    F, A, h = layout.n_factors, layout.n_options, list(hidden)
    if learner == "sac":
        critic = [state_dim + F, *h, F * A]
        return [[state_dim, *h, F * A + 2 * F], critic, list(critic)]
    if learner == "dqn":
        return [[state_dim, *h, F * A]]
    if learner == "ddpg":
        return [[state_dim, *h, F * A + F], [state_dim + F * A + F, *h, layout.n_carriers]]
    raise ValueError(f"unknown learner {learner!r}")


class RapAgent:
    """One learner plus its replay buffer, speaking in head choices and power fractions."""

    def __init__(self, topo: Topology, layout: ActionLayout, state_dim: int, lc: LearnerConfig, seed: int):
        self.layout, self.lc, self.state_dim = layout, lc, int(state_dim)
        self.mask = layout.option_mask(topo)
        common = dict(hidden=lc.hidden, lr=lc.lr, gamma=lc.gamma, tau=lc.tau, seed=seed)
        if lc.learner == "sac":
            self.agent = SacAgent(state_dim, layout.spec(True), alpha=lc.alpha, option_mask=self.mask, **common)
            self._update = sac_update
        elif lc.learner == "dqn":
            self.agent = DqnAgent(state_dim, layout.spec(False), option_mask=self.mask, **common)
            self._update = dqn_update
        elif lc.learner == "ddpg":
            F, A = layout.n_factors, layout.n_options
            self.agent = DdpgAgent(state_dim, F * A + F, layout.n_carriers, **common)
            self._update = ddpg_update
        else:
            raise ValueError(f"unknown learner {lc.learner!r}")
        self.buffer = ReplayBuffer(lc.buffer_size, seed=seed + 1)

    def act(self, state, explore: bool):
        """Return ``(choices, fractions, stored_action)``."""
        a = self.agent.act(state, explore=explore)
        F, A = self.layout.n_factors, self.layout.n_options
        if self.lc.learner == "sac":
            choices, fractions = a[:F], 0.5 * (a[F:] + 1.0)
        elif self.lc.learner == "dqn":
            # fixed equal split: every used head asks for the whole budget, projection shares it
            choices, fractions = a, np.ones(F)
        else:
            scores = np.where(self.mask, a[:F * A].reshape(F, A), -np.inf)
            choices, fractions = scores.argmax(axis=1).astype(float), 0.5 * (a[F * A:] + 1.0)
        return choices, fractions, a

    def observe(self, state, action, rewards, next_state, done=True) -> None:
        self.buffer.push(state, action, rewards, next_state, done)

    def update(self):
        if len(self.buffer) < self.lc.batch_size:
            return None
        info = None
        for _ in range(self.lc.updates_per_slot):
            info = self._update(self.agent, self.buffer.sample(self.lc.batch_size))
        return info

    def layer_sizes(self):
        return self.agent.trained_layer_sizes()

    def complexity_model(self) -> ComplexityModel:
        return ComplexityModel(self.layer_sizes(), self.lc.batch_size, self.lc.updates_per_slot)


class CentralizedAllocator:
    mode = CNT

    def __init__(self, topo: Topology, lc: LearnerConfig = LearnerConfig(), seed: int = 0,
                 k_max: Optional[int] = None, normalizer: Optional[GainNormalizer] = None):
        self.topo = topo
        self.k_max = k_max or default_k_max(topo)
        self.normalizer = normalizer
        self.layout = ActionLayout(tuple(range(topo.num_rrs)), topo.num_subcarriers,
                                   topo.max_users_per_carrier, self.k_max)
        self.state_dim = topo.num_rrs * self.k_max * topo.num_subcarriers + topo.num_rrs
        self.agent = RapAgent(topo, self.layout, self.state_dim, lc, seed)

    def encode(self, ch: ChannelState) -> np.ndarray:
        return encode_state_centralized(self.topo, ch, self.k_max, self.normalizer)

    def decide(self, state, explore: bool = False):
        choices, fractions, action = self.agent.act(state, explore)
        return decode_action(self.topo, self.layout, choices, fractions), action

    def observe(self, state, action, report: RateReport, next_state, scale: float) -> None:
        self.agent.observe(state, action, carrier_rewards(report, self.layout.rrs, scale), next_state)

    def update(self):
        return self.agent.update()

    def complexity_models(self) -> List[ComplexityModel]:
        return [self.agent.complexity_model()]

    def rap_agents(self):
        return [self.agent]


class DistributedAllocator:
    mode = DST

    def __init__(self, topo: Topology, lc: LearnerConfig = LearnerConfig(), seed: int = 0,
                 k_max: Optional[int] = None, normalizer: Optional[GainNormalizer] = None):
        self.topo = topo
        self.k_max = k_max or default_k_max(topo)
        self.normalizer = normalizer
        self.layouts = [ActionLayout((b,), topo.num_subcarriers, topo.max_users_per_carrier, self.k_max)
                        for b in range(topo.num_rrs)]
        self.state_dim = self.k_max * topo.num_subcarriers + 1
        self.agents = [RapAgent(topo, layout, self.state_dim, lc, seed + 7919 * (b + 1))
                       for b, layout in enumerate(self.layouts)]

    def encode(self, ch: ChannelState) -> List[np.ndarray]:
        return [encode_state_local(self.topo, ch, b, self.k_max, self.normalizer)
                for b in range(self.topo.num_rrs)]

    def decide(self, states, explore: bool = False):
        alloc = Allocation.empty(self.topo)
        actions = []
        for agent, layout, state in zip(self.agents, self.layouts, states):
            choices, fractions, action = agent.act(state, explore)
            part = decode_action(self.topo, layout, choices, fractions)
            b = layout.rrs[0]
            alloc.assignment[b] = part.assignment[b]
            alloc.power[b] = part.power[b]
            actions.append(action)
        return alloc, actions

    def observe(self, states, actions, report: RateReport, next_states, scale: float) -> None:
        for agent, layout, s, a, s2 in zip(self.agents, self.layouts, states, actions, next_states):
            agent.observe(s, a, carrier_rewards(report, layout.rrs, scale), s2)

    def update(self):
        infos = [agent.update() for agent in self.agents]
        return infos if any(i is not None for i in infos) else None

    def complexity_models(self) -> List[ComplexityModel]:
        return [agent.complexity_model() for agent in self.agents]

    def rap_agents(self):
        return list(self.agents)


def decide_centralized(alloc: CentralizedAllocator, state, explore: bool = False) -> Allocation:
    return alloc.decide(state, explore)[0]


def decide_distributed(alloc: DistributedAllocator, states, explore: bool = False) -> Allocation:
    return alloc.decide(states, explore)[0]


def nominal_complexity_models(mode: str, num_users: int, num_rrs: int, num_subcarriers: int,
                              l_max: int, lc: LearnerConfig) -> List[ComplexityModel]:
    """Complexity models from the dimensioning rule alone, without building agents."""
    k_max = default_k_max(num_users, num_rrs)
    if _mode(mode) == CNT:
        layout = ActionLayout(tuple(range(num_rrs)), num_subcarriers, l_max, k_max)
        sizes = rap_layer_sizes(lc.learner, num_rrs * k_max * num_subcarriers + num_rrs, layout, lc.hidden)
        return [ComplexityModel(sizes, lc.batch_size, lc.updates_per_slot)]
    layout = ActionLayout((0,), num_subcarriers, l_max, k_max)
    sizes = rap_layer_sizes(lc.learner, k_max * num_subcarriers + 1, layout, lc.hidden)
    return [ComplexityModel(sizes, lc.batch_size, lc.updates_per_slot)] * num_rrs


def greedy_allocation(topo: Topology, ch: ChannelState) -> Allocation:
    """Non-learning baseline: strongest served user per carrier, equal power split."""
    alloc = Allocation.empty(topo)
    g = served_gains(topo, ch)
    for b in range(topo.num_rrs):
        users = topo.served_users(b)
        if len(users) == 0:
            continue
        best = users[np.argmax(g[users], axis=0)]
        n = np.arange(topo.num_subcarriers)
        alloc.assignment[b, n, best] = True
        alloc.power[b, n, best] = topo.max_power / topo.num_subcarriers
    return alloc


def random_allocation(topo: Topology, rng) -> Allocation:
    """Non-learning baseline: uniformly random heads and fractions."""
    rng = np.random.default_rng(rng)
    k_max = default_k_max(topo)
    layout = ActionLayout(tuple(range(topo.num_rrs)), topo.num_subcarriers, topo.max_users_per_carrier, k_max)
    mask = layout.option_mask(topo)
    choices = [rng.choice(np.flatnonzero(row)) for row in mask]
    return decode_action(topo, layout, choices, rng.uniform(size=layout.n_factors))
