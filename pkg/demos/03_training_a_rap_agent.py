"""
Training the centralized allocator
==================================

A small scenario trained for a few hundred slots. Every slot the BBU agent
sees the normalised gains of all served users, picks users and power shares
per subcarrier, and learns from the per-subcarrier rates it gets back.
"""

import numpy as np

from smartran.allocators import CentralizedAllocator, GainNormalizer, LearnerConfig, greedy_allocation
from smartran.config import profile_config
from smartran.netmodel import compute_rates, generate_topology, sample_channels

cfg = profile_config("fast", num_subcarriers=8)
topo = generate_topology(cfg, 0, num_users=8)
normalizer = GainNormalizer(warmup_slots=50)
agent = CentralizedAllocator(topo, LearnerConfig(hidden=(64, 64)), seed=0, normalizer=normalizer)
scale = cfg.rap_reward_scale * topo.subcarrier_bandwidth

###############################################################################
# Train with exploration. Every 100 slots print the greedy policy's mean rate
# on a fixed batch of held-out slots next to the greedy-by-gain heuristic.

held_out = [sample_channels(topo, 10_000 + t, 0) for t in range(50)]
heuristic = np.mean([compute_rates(topo, c, greedy_allocation(topo, c)).total_rate for c in held_out])

for t in range(600):
    ch = sample_channels(topo, t, 0)
    normalizer.update(topo, ch)
    state = agent.encode(ch)
    alloc, action = agent.decide(state, explore=True)
    agent.observe(state, action, compute_rates(topo, ch, alloc), state, scale)
    agent.update()
    if (t + 1) % 100 == 0:
        learned = np.mean([compute_rates(topo, c, agent.decide(agent.encode(c))[0]).total_rate
                           for c in held_out])
        print(f"slot {t + 1:4d}: SAC {learned / 1e6:7.1f} Mbit/s   greedy-by-gain {heuristic / 1e6:7.1f} Mbit/s")
