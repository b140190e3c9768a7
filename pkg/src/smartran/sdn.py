"""SDN controller that picks centralized or distributed operation each slot.

State layout (length ``2B + 5``)::

    [K_b / K_max for each RRS,
     mean standardised log-gain of each RRS's users,
     variance of standardised log-gain over all served users,
     previous mode (+1 Cnt, -1 Dst, 0 none),
     recent TOC of Cnt, recent TOC of Dst,
     slot phase in [0, 1)]

TOC entries are normalised by the controller's running TOC scale.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .allocators import GainNormalizer, served_gains
from .metrics import CNT, DST, SlotReport
from .netmodel import ChannelState, Topology
from .rl import ActionSpec, DqnAgent, ReplayBuffer, SacAgent, dqn_update, sac_update_discrete

log = logging.getLogger(__name__)

MODE_ORDER = (CNT, DST)


@dataclass(frozen=True)
class SdnAction:
    mode: str

    def __post_init__(self):
        if self.mode not in MODE_ORDER:
            raise ValueError(f"mode must be one of {MODE_ORDER}")

    @property
    def x_cnt(self) -> int:
        return int(self.mode == CNT)

    @property
    def x_dst(self) -> int:
        return int(self.mode == DST)

    @property
    def index(self) -> int:
        return MODE_ORDER.index(self.mode)


class RunningScale:
    """Mean magnitude of the values seen so far, frozen after ``warmup`` values."""

    def __init__(self, warmup: int = 500):
        self.warmup = int(warmup)
        self.count = 0
        self.total = 0.0
        self.frozen = False

    @property
    def value(self) -> float:
        if self.count == 0 or self.total <= 0:
            return 1.0
        return self.total / self.count

    def update(self, x: float) -> None:
        if self.frozen:
            return
        self.count += 1
        self.total += abs(float(x))
        if self.count >= self.warmup:
            self.frozen = True

    def freeze(self) -> None:
        self.frozen = True


@dataclass
class ModeHistory:
    """Recent per-mode TOC. Only the chosen mode is observed; the other decays."""
    ema: float = 0.1
    stale_decay: float = 0.99
    prev_mode: Optional[str] = None
    toc_avg: Dict[str, float] = field(default_factory=lambda: {CNT: 0.0, DST: 0.0})

    def record(self, mode: str, toc_normalized: float) -> None:
        for m in MODE_ORDER:
            if m == mode:
                self.toc_avg[m] += self.ema * (toc_normalized - self.toc_avg[m])
            else:
                self.toc_avg[m] *= self.stale_decay
        self.prev_mode = mode


def sdn_state_dim(num_rrs: int) -> int:
    return 2 * num_rrs + 5


def build_sdn_state(topo: Topology, ch: ChannelState, history: Optional[ModeHistory], k_max: int,
                    normalizer: Optional[GainNormalizer] = None, phase_period: int = 100) -> np.ndarray:
    B = topo.num_rrs
    loads = topo.users_per_rrs() / float(k_max)
    means = np.zeros(B)
    variance = 0.0
    if topo.num_users:
        g = served_gains(topo, ch)
        feats = normalizer.transform(g) if normalizer is not None else np.log10(g)
        for b in range(B):
            users = topo.served_users(b)
            if len(users):
                means[b] = feats[users].mean()
        variance = float(feats.var())
    if history is None:
        history = ModeHistory()
    prev = {CNT: 1.0, DST: -1.0}.get(history.prev_mode, 0.0)
    phase = (ch.slot_index % phase_period) / phase_period
    return np.concatenate([loads, means, [variance, prev, history.toc_avg[CNT], history.toc_avg[DST], phase]])


class SdnController:
    def __init__(self, num_rrs: int, learner: str = "sac", hidden=(128, 128), lr=3e-4, gamma=0.95,
                 tau=0.005, alpha=0.2, batch_size=64, buffer_size=100_000, seed=0):
        self.state_dim = sdn_state_dim(num_rrs)
        self.learner = learner
        self.batch_size = int(batch_size)
        spec = ActionSpec.discrete(len(MODE_ORDER))
        common = dict(hidden=hidden, lr=lr, gamma=gamma, tau=tau, seed=seed)
        if learner == "sac":
            self.agent = SacAgent(self.state_dim, spec, alpha=alpha, **common)
        elif learner == "dqn":
            self.agent = DqnAgent(self.state_dim, spec, **common)
        else:
            raise ValueError(f"unknown SDN learner {learner!r}")
        self.buffer = ReplayBuffer(buffer_size, seed=seed + 1)

    @classmethod
    def from_scenario(cls, cfg, seed: int) -> "SdnController":
        return cls(cfg.num_rrs, cfg.sdn_learner, tuple(cfg.hidden), cfg.lr, cfg.gamma, cfg.tau, cfg.alpha,
                   cfg.batch_size, cfg.buffer_size, seed)

    def store(self, state, action: SdnAction, reward: float, next_state) -> None:
        self.buffer.push(state, [action.index], reward, next_state, False)

    def mode_probabilities(self, state) -> np.ndarray:
        if self.learner == "sac":
            return self.agent.policy(state)[0][0, 0]
        q = self.agent.q_values(state)[0, 0]
        p = np.zeros_like(q)
        p[q.argmax()] = 1.0
        return p


def select_mode(ctrl: SdnController, state, explore: bool = True) -> SdnAction:
    a = ctrl.agent.act(state, explore=explore)
    return SdnAction(MODE_ORDER[int(a[0])])


def sdn_reward(report: SlotReport, normalizer) -> float:
    scale = normalizer.value if isinstance(normalizer, RunningScale) else float(normalizer)
    return float(report.toc / scale)


def sdn_update(ctrl: SdnController):
    if len(ctrl.buffer) < ctrl.batch_size:
        log.debug("SDN update skipped: %d transitions < batch %d", len(ctrl.buffer), ctrl.batch_size)
        return None
    batch = ctrl.buffer.sample(ctrl.batch_size)
    if ctrl.learner == "sac":
        return sac_update_discrete(ctrl.agent, batch)
    return dqn_update(ctrl.agent, batch)
