"""Analytic gradients of every loss against central finite differences (h = 1e-5)."""
import numpy as np
import pytest

from smartran.rl import ActionSpec, DdpgAgent, DqnAgent, Mlp, SacAgent
from smartran.rl.baselines import ddpg_actor_loss, ddpg_critic_loss, dqn_loss
from smartran.rl.sac import sac_actor_loss, sac_critic_loss

from gradcheck import max_relative_error, numeric_grads

TOL = 1e-4
M = 5


def _states(rng, dim=4):
    return rng.normal(size=(M, dim))


def check_mlp(seed):
    rng = np.random.default_rng(seed)
    net = Mlp([4, 8, 2], rng, out_activation=["identity", "tanh"][seed % 2])
    x, w = rng.normal(size=(M, 4)), rng.normal(size=(M, 2))
    loss = lambda: float(np.sum(w * net.forward(x)) + 0.5 * np.sum(net.forward(x) ** 2))
    out, cache = net.forward(x, return_cache=True)
    grads, _ = net.backward(cache, w + out)
    return max_relative_error(grads, numeric_grads(loss, net.params))


def check_sac_critic(seed, continuous):
    rng = np.random.default_rng(seed)
    spec = ActionSpec.continuous(1) if continuous else ActionSpec.discrete(2)
    agent = SacAgent(4, spec, hidden=(8,), seed=seed)
    s = _states(rng)
    if continuous:
        actions = np.column_stack([np.zeros(M), rng.uniform(-1, 1, M)])
    else:
        actions = rng.integers(0, 2, size=(M, 1)).astype(float)
    targets = rng.normal(size=(M, 1))
    net = agent.critic1
    _, grads = sac_critic_loss(net, spec, s, actions, targets)
    loss = lambda: sac_critic_loss(net, spec, s, actions, targets)[0]
    return max_relative_error(grads, numeric_grads(loss, net.params))


def check_sac_actor(seed, spec):
    rng = np.random.default_rng(seed)
    agent = SacAgent(4, spec, hidden=(8,), alpha=float(rng.uniform(0.05, 0.5)), seed=seed)
    s = _states(rng)
    noise = rng.normal(size=(M, spec.n_continuous))
    _, grads, _ = sac_actor_loss(agent, s, noise)
    loss = lambda: sac_actor_loss(agent, s, noise)[0]
    return max_relative_error(grads, numeric_grads(loss, agent.actor.params))


def check_dqn(seed):
    rng = np.random.default_rng(seed)
    agent = DqnAgent(4, ActionSpec.discrete(2), hidden=(8,), seed=seed)
    s = _states(rng)
    actions = rng.integers(0, 2, size=(M, 1)).astype(float)
    targets = rng.normal(size=(M, 1))
    _, grads = dqn_loss(agent, s, actions, targets)
    loss = lambda: dqn_loss(agent, s, actions, targets)[0]
    return max_relative_error(grads, numeric_grads(loss, agent.q.params))


def check_ddpg(seed):
    rng = np.random.default_rng(seed)
    agent = DdpgAgent(4, 2, hidden=(8,), seed=seed)
    s = _states(rng)
    actions, targets = rng.uniform(-1, 1, size=(M, 2)), rng.normal(size=(M, 1))
    _, gc = ddpg_critic_loss(agent, s, actions, targets)
    ec = max_relative_error(gc, numeric_grads(lambda: ddpg_critic_loss(agent, s, actions, targets)[0],
                                              agent.critic.params))
    _, ga = ddpg_actor_loss(agent, s)
    ea = max_relative_error(ga, numeric_grads(lambda: ddpg_actor_loss(agent, s)[0], agent.actor.params))
    return max(ec, ea)


HYBRID = ActionSpec(n_factors=2, n_options=3, n_continuous=2, reward_groups=(0, 1))

CHECKS = {
    "mlp": check_mlp,
    "sac_critic_discrete": lambda seed: check_sac_critic(seed, False),
    "sac_critic_continuous": lambda seed: check_sac_critic(seed, True),
    "sac_actor_discrete": lambda seed: check_sac_actor(seed, ActionSpec.discrete(2)),
    "sac_actor_continuous": lambda seed: check_sac_actor(seed, ActionSpec.continuous(1)),
    "sac_actor_hybrid": lambda seed: check_sac_actor(seed, HYBRID),
    "dqn": check_dqn,
    "ddpg": check_ddpg,
}


@pytest.mark.parametrize("name", sorted(CHECKS))
def test_gradient_matches_finite_differences(name):
    errors = [CHECKS[name](seed) for seed in range(10)]
    assert max(errors) < TOL, errors


def test_linear_net_least_squares_gradient():
    rng = np.random.default_rng(0)
    net = Mlp([3, 2], rng)
    X, Y = rng.normal(size=(6, 3)), rng.normal(size=(6, 2))
    out, cache = net.forward(X, return_cache=True)
    grads, _ = net.backward(cache, out - Y)        # loss 0.5 ||XW + b - Y||^2
    W, b = net.params
    assert np.allclose(grads[0], X.T @ (X @ W + b - Y), atol=1e-12)
    assert np.allclose(grads[1], (X @ W + b - Y).sum(axis=0), atol=1e-12)


def test_zero_upstream_gradient():
    net = Mlp([4, 8, 2], 0)
    _, cache = net.forward(np.ones((3, 4)), return_cache=True)
    grads, gin = net.backward(cache, np.zeros((3, 2)))
    assert all(not g.any() for g in grads) and not gin.any()
