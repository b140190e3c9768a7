"""Soft actor-critic for discrete, continuous and factored hybrid actions.

One agent class covers all three cases through :class:`ActionSpec`:

* ``n_factors`` categorical heads with ``n_options`` choices each,
* ``n_continuous`` tanh-squashed Gaussian dimensions,
* a map from each categorical head to a reward component.

The critic takes ``[state, u]`` (``u`` the squashed continuous action) and
returns one soft Q-value per (head, option). The Q-value of a joint action
for reward component ``r`` is the sum over the heads that belong to ``r`` of
the chosen option's value. A purely continuous agent uses a single head with
one option, which makes the critic an ordinary ``Q(s, a)``.

Stored actions are ``[option index per head..., u...]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from .adam import AdamState, adam_step
from .mlp import Mlp
from .replay import Batch

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0
_HALF_LOG_2PI = 0.5 * np.log(2 * np.pi)


class UpdateAborted(FloatingPointError):
    """A loss came out non-finite; no parameter was touched."""


class LossInfo(NamedTuple):
    critic_loss: float
    actor_loss: float
    entropy: float


@dataclass(frozen=True)
class ActionSpec:
    n_factors: int = 1
    n_options: int = 2
    n_continuous: int = 0
    reward_groups: Optional[Sequence[int]] = None

    def __post_init__(self):
        if self.n_factors < 1 or self.n_options < 1 or self.n_continuous < 0:
            raise ValueError("need n_factors >= 1, n_options >= 1, n_continuous >= 0")
        if self.reward_groups is not None and len(self.reward_groups) != self.n_factors:
            raise ValueError("reward_groups needs one entry per factor")

    @classmethod
    def discrete(cls, n_actions: int) -> "ActionSpec":
        return cls(1, n_actions, 0)

    @classmethod
    def continuous(cls, dims: int) -> "ActionSpec":
        return cls(1, 1, dims)

    @property
    def groups(self) -> np.ndarray:
        if self.reward_groups is None:
            return np.zeros(self.n_factors, dtype=int)
        return np.asarray(self.reward_groups, dtype=int)

    @property
    def n_rewards(self) -> int:
        return int(self.groups.max()) + 1

    @property
    def action_dim(self) -> int:
        return self.n_factors + self.n_continuous

    @property
    def is_discrete(self) -> bool:
        return self.n_continuous == 0

    @property
    def is_continuous(self) -> bool:
        return self.n_factors == 1 and self.n_options == 1 and self.n_continuous > 0

    def group_matrix(self) -> np.ndarray:
        G = np.zeros((self.n_factors, self.n_rewards))
        G[np.arange(self.n_factors), self.groups] = 1.0
        return G


def masked_softmax(logits, mask):
    """Softmax over the last axis restricted to ``mask``; log-probs are 0 off-mask."""
    z = np.where(mask, logits, -np.inf)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    total = e.sum(axis=-1, keepdims=True)
    probs = e / total
    logp = np.where(mask, z - np.log(total), 0.0)
    return probs, logp


def log1m_tanh2(x):
    """log(1 - tanh(x)^2), stable for large |x|."""
    return 2.0 * (np.log(2.0) - x - np.logaddexp(0.0, -2.0 * x))


def squashed_gaussian(mean, log_std, noise):
    """Reparameterised tanh-Gaussian sample and its log-density per row."""
    pre = mean + np.exp(log_std) * noise
    u = np.tanh(pre)
    logp = np.sum(-0.5 * noise ** 2 - log_std - _HALF_LOG_2PI - log1m_tanh2(pre), axis=-1)
    return u, logp


def soft_update(targets, onlines, tau: float):
    """target <- tau * online + (1 - tau) * target, for Mlps or parameter lists."""
    if not 0 < tau <= 1:
        raise ValueError("tau must lie in (0, 1]")
    if isinstance(targets, Mlp):
        targets, onlines = [targets], [onlines]
    for tgt, onl in zip(targets, onlines):
        tp = tgt.params if isinstance(tgt, Mlp) else tgt
        op = onl.params if isinstance(onl, Mlp) else onl
        if len(tp) != len(op):
            raise ValueError("target and online differ in structure")
        for t, o in zip(tp, op):
            if t.shape != o.shape:
                raise ValueError(f"shape mismatch {t.shape} vs {o.shape}")
            t *= 1.0 - tau
            t += tau * o
    return targets


class SacAgent:
    def __init__(self, state_dim: int, spec: ActionSpec, hidden=(128, 128), lr=3e-4,
                 gamma=0.95, tau=0.005, alpha=0.2, seed=0, option_mask=None):
        if alpha < 0:
            raise ValueError("alpha must be >= 0")
        if not 0 <= gamma < 1:
            raise ValueError("gamma must lie in [0, 1)")
        self.state_dim = int(state_dim)
        self.spec = spec
        self.gamma, self.tau, self.alpha = float(gamma), float(tau), float(alpha)
        F, A, D = spec.n_factors, spec.n_options, spec.n_continuous
        if option_mask is None:
            option_mask = np.ones((F, A), dtype=bool)
        self.option_mask = np.asarray(option_mask, dtype=bool).reshape(F, A)
        if not self.option_mask.any(axis=1).all():
            raise ValueError("every factor needs at least one valid option")
        self.rng = np.random.default_rng(seed)
        self.actor = Mlp([self.state_dim, *hidden, F * A + 2 * D], self.rng)
        self.critic1 = Mlp([self.state_dim + D, *hidden, F * A], self.rng)
        self.critic2 = Mlp([self.state_dim + D, *hidden, F * A], self.rng)
        self.target1 = self.critic1.copy()
        self.target2 = self.critic2.copy()
        self.actor_opt = AdamState.for_params(self.actor.params, lr=lr)
        self.critic1_opt = AdamState.for_params(self.critic1.params, lr=lr)
        self.critic2_opt = AdamState.for_params(self.critic2.params, lr=lr)

    def networks(self):
        return {"actor": self.actor, "critic1": self.critic1, "critic2": self.critic2,
                "target1": self.target1, "target2": self.target2}

    def trained_layer_sizes(self) -> List[List[int]]:
        return [self.actor.layer_sizes, self.critic1.layer_sizes, self.critic2.layer_sizes]

    def _split(self, out):
        F, A, D = self.spec.n_factors, self.spec.n_options, self.spec.n_continuous
        logits = out[:, :F * A].reshape(-1, F, A)
        mean = out[:, F * A:F * A + D]
        raw_log_std = out[:, F * A + D:]
        return logits, mean, raw_log_std

    def policy(self, states):
        """Option probabilities, their logs, Gaussian mean and clamped log-std."""
        out = self.actor.forward(np.atleast_2d(states))
        logits, mean, raw = self._split(out)
        probs, logp = masked_softmax(logits, self.option_mask)
        return probs, logp, mean, np.clip(raw, LOG_STD_MIN, LOG_STD_MAX)

    def act(self, state, explore: bool = True) -> np.ndarray:
        probs, _, mean, log_std = self.policy(state)
        probs, mean, log_std = probs[0], mean[0], log_std[0]
        if explore:
            cdf = np.cumsum(probs, axis=1)
            draws = self.rng.uniform(size=(len(probs), 1))
            choice = np.minimum((draws > cdf).sum(axis=1), probs.shape[1] - 1)
            # never land on a masked option through round-off at the top of the cdf
            choice = np.where(self.option_mask[np.arange(len(choice)), choice],
                              choice, probs.argmax(axis=1))
            u = np.tanh(mean + np.exp(log_std) * self.rng.standard_normal(mean.shape))
        else:
            choice = probs.argmax(axis=1)
            u = np.tanh(mean)
        return np.concatenate([choice.astype(float), u])

    def entropy(self, states) -> float:
        probs, logp, _, _ = self.policy(states)
        return float(-(probs * logp).sum(axis=-1).mean())


def _critic_input(states, u):
    return np.hstack([states, u]) if u.shape[1] else states


def sac_critic_targets(agent: SacAgent, batch: Batch, noise=None) -> np.ndarray:
    """y_r = r_r + gamma (1 - done) * soft value of s' for each reward component."""
    spec = agent.spec
    rewards = np.asarray(batch.rewards, dtype=float).reshape(len(batch), -1)
    live = agent.gamma * (1.0 - np.asarray(batch.dones, dtype=float))
    if not np.any(live):
        return rewards.copy()
    probs, logp, mean, log_std = agent.policy(batch.next_states)
    if noise is None:
        noise = agent.rng.standard_normal(mean.shape)
    u, logp_c = squashed_gaussian(mean, log_std, noise)
    x = _critic_input(batch.next_states, u)
    shape = (len(batch), spec.n_factors, spec.n_options)
    q_min = np.minimum(agent.target1.forward(x).reshape(shape), agent.target2.forward(x).reshape(shape))
    v_factor = np.sum(np.where(agent.option_mask, probs * (q_min - agent.alpha * logp), 0.0), axis=-1)
    v = v_factor @ spec.group_matrix() - agent.alpha * logp_c[:, None] / spec.n_rewards
    return rewards + live[:, None] * v


def sac_critic_loss(critic: Mlp, spec: ActionSpec, states, actions, targets):
    """Mean over the batch of the summed squared error across reward components."""
    M = len(states)
    F, A = spec.n_factors, spec.n_options
    actions = np.asarray(actions, dtype=float).reshape(M, -1)
    chosen = actions[:, :F].astype(int)
    x = _critic_input(states, actions[:, F:])
    q, cache = critic.forward(x, return_cache=True)
    q = q.reshape(M, F, A)
    q_taken = np.take_along_axis(q, chosen[..., None], axis=-1)[..., 0]
    G = spec.group_matrix()
    err = q_taken @ G - targets
    loss = float(np.mean(np.sum(err ** 2, axis=1)))
    dq = np.zeros_like(q)
    np.put_along_axis(dq, chosen[..., None], ((2.0 / M) * err @ G.T)[..., None], axis=-1)
    grads, _ = critic.backward(cache, dq.reshape(M, F * A))
    return loss, grads


def sac_actor_loss(agent: SacAgent, states, noise):
    """Expected-value actor objective with a reparameterised continuous part.

    J = mean_batch[ sum_f sum_a pi_f(a) (alpha log pi_f(a) - minQ_f(s, u)[a])
                    + alpha log pi_c(u) ]
    """
    spec = agent.spec
    M, F, A = len(states), spec.n_factors, spec.n_options
    S = agent.state_dim
    out, cache = agent.actor.forward(states, return_cache=True)
    logits, mean, raw = agent._split(out)
    mask = agent.option_mask
    probs, logp = masked_softmax(logits, mask)
    log_std = np.clip(raw, LOG_STD_MIN, LOG_STD_MAX)
    std = np.exp(log_std)
    u, logp_c = squashed_gaussian(mean, log_std, noise)

    x = _critic_input(states, u)
    q1, c1 = agent.critic1.forward(x, return_cache=True)
    q2, c2 = agent.critic2.forward(x, return_cache=True)
    q1, q2 = q1.reshape(M, F, A), q2.reshape(M, F, A)
    first = q1 <= q2
    q_min = np.where(first, q1, q2)
    g = np.where(mask, agent.alpha * logp - q_min, 0.0)
    per_factor = np.sum(probs * g, axis=-1)
    loss = float(np.mean(per_factor.sum(axis=1) + agent.alpha * logp_c))

    d_logits = probs * (g - per_factor[..., None]) / M
    parts = [d_logits.reshape(M, F * A)]
    if spec.n_continuous:
        d_qmin = -probs / M
        _, dx1 = agent.critic1.backward(c1, np.where(first, d_qmin, 0.0).reshape(M, F * A), input_only=True)
        _, dx2 = agent.critic2.backward(c2, np.where(first, 0.0, d_qmin).reshape(M, F * A), input_only=True)
        du = (dx1 + dx2)[:, S:]
        d_pre = du * (1.0 - u ** 2) + (agent.alpha / M) * 2.0 * u
        d_log_std = (d_pre * std * noise - agent.alpha / M) * ((raw > LOG_STD_MIN) & (raw < LOG_STD_MAX))
        parts += [d_pre, d_log_std]
    grads, _ = agent.actor.backward(cache, np.hstack(parts))
    entropy = float(-(probs * logp).sum(axis=-1).mean())
    if spec.n_continuous:
        entropy -= float(np.mean(logp_c)) / F
    return loss, grads, entropy


def sac_update(agent: SacAgent, batch: Batch) -> LossInfo:
    """One twin-critic SAC step; all losses are computed before any parameter moves."""
    if len(batch) == 0:
        raise ValueError("empty batch")
    states = np.asarray(batch.states, dtype=float)
    targets = sac_critic_targets(agent, batch)
    l1, g1 = sac_critic_loss(agent.critic1, agent.spec, states, batch.actions, targets)
    l2, g2 = sac_critic_loss(agent.critic2, agent.spec, states, batch.actions, targets)
    noise = agent.rng.standard_normal((len(batch), agent.spec.n_continuous))
    la, ga, entropy = sac_actor_loss(agent, states, noise)
    if not np.isfinite([l1, l2, la]).all():
        raise UpdateAborted(f"non-finite loss (critic {l1}, {l2}; actor {la})")
    adam_step(agent.critic1_opt, agent.critic1.params, g1)
    adam_step(agent.critic2_opt, agent.critic2.params, g2)
    adam_step(agent.actor_opt, agent.actor.params, ga)
    soft_update([agent.target1, agent.target2], [agent.critic1, agent.critic2], agent.tau)
    return LossInfo(0.5 * (l1 + l2), la, entropy)


def sac_update_discrete(agent: SacAgent, batch: Batch) -> LossInfo:
    if not agent.spec.is_discrete:
        raise ValueError("agent has continuous action dimensions")
    return sac_update(agent, batch)


def sac_update_continuous(agent: SacAgent, batch: Batch) -> LossInfo:
    if not agent.spec.is_continuous:
        raise ValueError("agent is not a purely continuous SAC agent")
    return sac_update(agent, batch)
