import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smartran.rl import (ActionSpec, AdamState, DdpgAgent, DqnAgent, Mlp, NonFiniteGradient, ReplayBuffer,
                         SacAgent, UpdateAborted, adam_step, backward, dqn_update, forward, load_agent,
                         load_networks, sac_update, sac_update_continuous, sac_update_discrete, save_agent,
                         save_networks, soft_update)
from smartran.rl.baselines import dqn_targets
from smartran.rl.checkpoint import MAGIC, CheckpointError
from smartran.rl.replay import Batch
from smartran.rl.sac import masked_softmax, sac_critic_targets, squashed_gaussian


# Mlp

def test_zero_weights_zero_output():
    net = Mlp([3, 5, 2], 0)
    for p in net.params:
        p[...] = 0.0
    assert np.array_equal(forward(net, np.ones(3)), np.zeros(2))


def test_identity_single_layer():
    net = Mlp([3, 3], 0)
    net.params[0][...] = np.eye(3)
    net.params[1][...] = 0.0
    x = np.array([1.5, -2.0, 0.25])
    assert np.array_equal(forward(net, x), x)


def test_hand_computed_2_2_1():
    net = Mlp([2, 2, 1], 0)
    net.params[0][...] = [[0.5, -1.0], [0.25, 2.0]]
    net.params[1][...] = [0.1, -0.3]
    net.params[2][...] = [[1.5], [-0.5]]
    net.params[3][...] = [0.2]
    x = np.array([2.0, -1.0])
    h1 = max(0.5 * 2 + 0.25 * -1 + 0.1, 0.0)     # 0.85
    h2 = max(-1.0 * 2 + 2.0 * -1 - 0.3, 0.0)     # 0
    expect = 1.5 * h1 - 0.5 * h2 + 0.2
    assert abs(forward(net, x)[0] - expect) < 1e-12


def test_forward_dimension_mismatch():
    with pytest.raises(ValueError, match="input width"):
        Mlp([3, 4, 1], 0).forward(np.ones(2))
    with pytest.raises(ValueError):
        Mlp([3], 0)


def test_backward_shape_mismatch():
    net = Mlp([3, 4, 2], 0)
    with pytest.raises(ValueError):
        backward(net, np.ones((2, 3)), np.ones((2, 3)))


def test_flat_roundtrip_and_copy():
    net = Mlp([3, 4, 2], 7)
    clone = net.copy()
    clone.params[0][0, 0] += 1.0
    assert net.params[0][0, 0] != clone.params[0][0, 0]
    other = Mlp([3, 4, 2], 8)
    other.set_flat(net.get_flat())
    assert np.array_equal(other.get_flat(), net.get_flat())


# Adam

def test_adam_zero_gradient():
    p = [np.array([1.0, -2.0])]
    opt = AdamState.for_params(p)
    adam_step(opt, p, [np.zeros(2)])
    assert np.array_equal(p[0], [1.0, -2.0]) and opt.step == 1


def test_adam_first_step_hand_value():
    p = [np.array([0.0])]
    opt = AdamState.for_params(p, lr=1e-3, eps=1e-8)
    adam_step(opt, p, [np.array([1.0])])
    assert np.isclose(p[0][0], -1e-3 / (1 + 1e-8), rtol=1e-12, atol=0)


def test_adam_rejects_non_finite():
    p = [np.array([1.0])]
    opt = AdamState.for_params(p)
    with pytest.raises(NonFiniteGradient):
        adam_step(opt, p, [np.array([np.nan])])
    assert p[0][0] == 1.0 and opt.step == 0


def test_adam_deterministic():
    def run():
        rng = np.random.default_rng(3)
        p = [rng.normal(size=(3, 2))]
        opt = AdamState.for_params(p)
        for _ in range(5):
            adam_step(opt, p, [rng.normal(size=(3, 2))])
        return p[0]
    assert np.array_equal(run(), run())


# replay

@settings(max_examples=25, deadline=None)
@given(cap=st.integers(1, 50), n=st.integers(0, 200))
def test_replay_capacity_and_fifo(cap, n):
    buf = ReplayBuffer(cap, seed=0)
    for i in range(n):
        buf.push([i], [0], i, [i + 1], False)
    assert len(buf) == min(cap, n)
    if n:
        kept = sorted(buf.latest(cap).states[:, 0])
        assert kept == list(range(max(0, n - cap), n))


def test_replay_sampling_reproducible():
    def draw():
        buf = ReplayBuffer(100, seed=5)
        for i in range(30):
            buf.push([i, -i], [1.0], [i, 2 * i], [i + 1, 0], i % 2 == 0)
        return buf.sample(8)
    a, b = draw(), draw()
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert a.rewards.shape == (8, 2)


def test_replay_grows_past_initial_block():
    buf = ReplayBuffer(3000, seed=0)
    for i in range(2500):
        buf.push([i], [0], 0.0, [i], True)
    assert len(buf) == 2500 and buf.latest(1).states[0, 0] == 2499


def test_replay_empty_sample_errors():
    with pytest.raises(ValueError):
        ReplayBuffer(4).sample(1)


# soft update

def test_soft_update_cases():
    t, o = [np.zeros(3)], [np.full(3, 2.0)]
    soft_update([t], [o], 0.5)
    assert np.allclose(t[0], 1.0)
    soft_update([t], [o], 1.0)
    assert np.array_equal(t[0], o[0])
    with pytest.raises(ValueError):
        soft_update([t], [o], 0.0)


def test_soft_update_geometric_convergence():
    tgt, onl = Mlp([2, 3, 1], 0), Mlp([2, 3, 1], 1)
    gaps = []
    for _ in range(50):
        soft_update(tgt, onl, 0.005)
        gaps.append(np.linalg.norm(tgt.get_flat() - onl.get_flat()))
    ratios = np.array(gaps[1:]) / np.array(gaps[:-1])
    assert np.allclose(ratios, 0.995)


# SAC pieces

@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_softmax_sums_to_one(seed):
    rng = np.random.default_rng(seed)
    logits = rng.normal(scale=50.0, size=(4, 3, 5))
    mask = rng.uniform(size=(3, 5)) < 0.7
    mask[:, 0] = True
    p, logp = masked_softmax(logits, mask)
    assert np.allclose(p.sum(axis=-1), 1.0, atol=1e-9)
    assert np.all(p[..., mask] > 0) and np.all(p[..., ~mask] == 0)
    assert np.all(np.isfinite(logp[..., mask]))


def test_uniform_actor_entropy_ln2():
    agent = SacAgent(1, ActionSpec.discrete(2), hidden=(4,), seed=0)
    for p in agent.actor.params:
        p[...] = 0.0
    assert np.isclose(agent.entropy(np.ones((1, 1))), np.log(2))


def test_log_std_clamp_keeps_actions_finite():
    mean = np.zeros((2, 1))
    for log_std in (np.full((2, 1), -20.0), np.full((2, 1), 2.0)):
        u, logp = squashed_gaussian(mean, log_std, np.array([[3.0], [-3.0]]))
        assert np.all(np.isfinite(u)) and np.all(np.isfinite(logp))
    agent = SacAgent(1, ActionSpec.continuous(1), hidden=(4,), seed=0)
    agent.actor.params[-1][...] = [0.0, 0.0, 1e6]    # logit, mean, raw log-std far above the clamp
    _, _, _, log_std = agent.policy(np.ones(1))
    assert log_std[0, 0] == 2.0
    assert np.isfinite(agent.act(np.ones(1))).all()


def test_tanh_squash_zero_mean_small_std():
    u, _ = squashed_gaussian(np.zeros((1, 1)), np.full((1, 1), -20.0), np.ones((1, 1)))
    assert abs(u[0, 0]) < 1e-8


def _batch(states, actions, rewards, next_states, dones):
    return Batch(np.atleast_2d(states), np.atleast_2d(actions), np.atleast_2d(rewards),
                 np.atleast_2d(next_states), np.asarray(dones, dtype=float))


def test_gamma0_target_is_reward():
    agent = SacAgent(2, ActionSpec.discrete(2), hidden=(4,), gamma=0.0, alpha=0.0, seed=0)
    b = _batch([1.0, 0.0], [1.0], [0.7], [0.0, 1.0], [False])
    assert np.allclose(sac_critic_targets(agent, b), [[0.7]])
    dqn = DqnAgent(2, ActionSpec.discrete(2), hidden=(4,), gamma=0.0, seed=0)
    assert np.allclose(dqn_targets(dqn, b), [[0.7]])


def test_alpha0_target_is_min_twin_expectation():
    agent = SacAgent(2, ActionSpec.discrete(3), hidden=(6,), gamma=0.9, alpha=0.0, seed=4)
    rng = np.random.default_rng(0)
    s2 = rng.normal(size=(5, 2))
    b = Batch(rng.normal(size=(5, 2)), np.zeros((5, 1)), rng.normal(size=(5, 1)), s2, np.zeros(5))
    probs, _, _, _ = agent.policy(s2)
    q = np.minimum(agent.target1.forward(s2), agent.target2.forward(s2))
    expect = b.rewards[:, 0] + 0.9 * np.sum(probs[:, 0] * q, axis=1)
    assert np.allclose(sac_critic_targets(agent, b)[:, 0], expect, atol=1e-12)


def test_update_aborts_before_any_parameter_change():
    agent = SacAgent(2, ActionSpec.discrete(2), hidden=(4,), seed=0)
    before = {k: n.get_flat().copy() for k, n in agent.networks().items()}
    b = _batch([[1.0, 0.0]], [[0.0]], [[np.nan]], [[0.0, 1.0]], [True])
    with pytest.raises(UpdateAborted):
        sac_update(agent, b)
    assert all(np.array_equal(before[k], n.get_flat()) for k, n in agent.networks().items())


def test_update_rejects_empty_and_wrong_kind():
    agent = SacAgent(2, ActionSpec.discrete(2), hidden=(4,), seed=0)
    empty = Batch(np.zeros((0, 2)), np.zeros((0, 1)), np.zeros((0, 1)), np.zeros((0, 2)), np.zeros(0))
    with pytest.raises(ValueError):
        sac_update(agent, empty)
    b = _batch([[1.0, 0.0]], [[0.0]], [[1.0]], [[0.0, 1.0]], [True])
    with pytest.raises(ValueError):
        sac_update_continuous(agent, b)
    cont = SacAgent(2, ActionSpec.continuous(1), hidden=(4,), seed=0)
    with pytest.raises(ValueError):
        sac_update_discrete(cont, _batch([[1.0, 0.0]], [[0.0, 0.3]], [[1.0]], [[0.0, 1.0]], [True]))


def test_updates_deterministic():
    def run():
        agent = SacAgent(3, ActionSpec(2, 3, 2, (0, 1)), hidden=(8,), seed=11)
        buf = ReplayBuffer(100, seed=2)
        rng = np.random.default_rng(0)
        for _ in range(20):
            s = rng.normal(size=3)
            buf.push(s, agent.act(s), rng.normal(size=2), rng.normal(size=3), False)
        for _ in range(5):
            sac_update(agent, buf.sample(8))
        return agent.actor.get_flat()
    assert np.array_equal(run(), run())


def test_masked_options_never_chosen():
    mask = np.array([[True, False, True]])
    agent = SacAgent(1, ActionSpec.discrete(3), hidden=(4,), seed=0, option_mask=mask)
    picks = {int(agent.act(np.ones(1))[0]) for _ in range(300)}
    assert picks <= {0, 2}


def test_greedy_action_repeatable():
    agent = SacAgent(2, ActionSpec(3, 2, 3, (0, 0, 1)), hidden=(8,), seed=0)
    s = np.array([0.3, -1.0])
    assert np.array_equal(agent.act(s, explore=False), agent.act(s, explore=False))


# bandits (small versions; the acceptance suite runs the full criteria)

def _discrete_bandit(agent, update, steps, seed):
    buf = ReplayBuffer(10_000, seed=seed)
    s = np.ones(1)
    for _ in range(steps):
        a = agent.act(s)
        buf.push(s, a, float(a[0] == 1), s, True)
        if len(buf) >= 64:
            update(agent, buf.sample(64))
    return agent


def test_sac_two_arm_bandit():
    agent = _discrete_bandit(SacAgent(1, ActionSpec.discrete(2), seed=0), sac_update_discrete, 800, 0)
    probs = agent.policy(np.ones(1))[0][0, 0]
    assert probs[1] > 0.95 and agent.act(np.ones(1), explore=False)[0] == 1


def test_dqn_two_arm_bandit():
    agent = _discrete_bandit(DqnAgent(1, ActionSpec.discrete(2), seed=0, eps_decay=300), dqn_update, 800, 0)
    assert agent.act(np.ones(1), explore=False)[0] == 1


# checkpoints

def test_checkpoint_roundtrip(tmp_path):
    agent = SacAgent(3, ActionSpec(2, 3, 2, (0, 1)), hidden=(8, 8), seed=1)
    save_agent(tmp_path / "a", agent, {"k": 8})
    raw = (tmp_path / "a.bin").read_bytes()
    assert raw[:8] == MAGIC
    other = SacAgent(3, ActionSpec(2, 3, 2, (0, 1)), hidden=(8, 8), seed=2)
    meta = load_agent(tmp_path / "a", other)
    assert meta == {"k": 8}
    for name, net in agent.networks().items():
        assert np.array_equal(net.get_flat(), other.networks()[name].get_flat())


def test_checkpoint_binary_layout(tmp_path):
    net = Mlp([2, 3, 1], 0, out_activation="tanh")
    save_networks(tmp_path / "n", {"only": net})
    raw = (tmp_path / "n.bin").read_bytes()
    header = np.frombuffer(raw[8:8 + 4 * 6], dtype="<u4")
    assert list(header) == [1, 1, 3, 2, 3, 1]
    payload = np.frombuffer(raw[8 + 4 * 6:], dtype="<f8")
    assert np.array_equal(payload, net.get_flat())
    nets, _ = load_networks(tmp_path / "n")
    assert nets["only"].out_activation == "tanh"


def test_checkpoint_shape_mismatch(tmp_path):
    save_agent(tmp_path / "d", DdpgAgent(3, 2, hidden=(4,), seed=0))
    with pytest.raises(CheckpointError):
        load_agent(tmp_path / "d", DdpgAgent(3, 2, hidden=(5,), seed=0))


def test_checkpoint_bad_magic(tmp_path):
    save_networks(tmp_path / "n", {"x": Mlp([1, 1], 0)})
    raw = bytearray((tmp_path / "n.bin").read_bytes())
    raw[:8] = b"NOTACKPT"
    (tmp_path / "n.bin").write_bytes(bytes(raw))
    with pytest.raises(CheckpointError, match="magic"):
        load_networks(tmp_path / "n")
