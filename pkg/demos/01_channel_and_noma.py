"""
Channels, NOMA rates and the brute-force optimum
================================================

A walk through the radio model. We drop users in a four-cell network, draw
one slot of Rayleigh-faded channel gains and look at what a PD-NOMA
subcarrier delivers when two users share it.
"""

import numpy as np

from smartran.allocators import greedy_allocation, random_allocation
from smartran.config import profile_config
from smartran.netmodel import (Allocation, compute_rates, generate_topology, pathloss_db, sample_channels,
                               validate_allocation)
from smartran.oracle import brute_force_oracle

###############################################################################
# A topology is fixed per run. Users are spread evenly over the RRSs and each
# is served by exactly one of them.

cfg = profile_config("fast")
topo = generate_topology(cfg, rng_seed=0, num_users=16)
print("RRS positions (m):\n", np.round(topo.rrs_positions, 1))
print("users per RRS:", topo.users_per_rrs())

###############################################################################
# Path loss follows the usual 128.1 + 37.6 log10(d[km]) law. A user 100 m away
# loses about 90 dB before fading.

for d in (10, 50, 100, 250):
    print(f"{d:4d} m -> {pathloss_db(d):6.1f} dB")

###############################################################################
# Fading is drawn from an RNG keyed on (seed, slot), so slot 7 is the same
# slot no matter which order we visit slots in.

ch = sample_channels(topo, slot=7, rng_seed=0)
assert np.array_equal(ch.gains, sample_channels(topo, 7, 0).gains)
print("gain tensor shape (users, RRSs, subcarriers):", ch.gains.shape)

###############################################################################
# Put the two users of RRS 0 on subcarrier 0 with a 1:4 power split. The
# receiver with the better channel removes the other signal first (SIC), so it
# only sees inter-cell interference; the weaker user treats the stronger
# user's signal as noise.

a, b = topo.served_users(0)[:2]
assignment = np.zeros((topo.num_rrs, topo.num_subcarriers, topo.num_users), dtype=bool)
power = np.zeros(assignment.shape)
assignment[0, 0, [a, b]] = True
power[0, 0, a], power[0, 0, b] = 0.2 * topo.max_power, 0.8 * topo.max_power
alloc = Allocation(assignment, power)
print(validate_allocation(topo, alloc))
rates = compute_rates(topo, ch, alloc)
print(f"user {a}: {rates.per_user_rate[a] / 1e6:.2f} Mbit/s, user {b}: {rates.per_user_rate[b] / 1e6:.2f} Mbit/s")

###############################################################################
# Two simple baselines for the full slot.

greedy = compute_rates(topo, ch, greedy_allocation(topo, ch)).total_rate
rand = compute_rates(topo, ch, random_allocation(topo, 0)).total_rate
print(f"greedy {greedy / 1e6:.1f} Mbit/s, random {rand / 1e6:.1f} Mbit/s")

###############################################################################
# On a tiny instance we can enumerate every assignment and every power level
# on a grid. This is the yardstick the learners are checked against.

tiny_cfg = profile_config("paper", num_rrs=1, num_subcarriers=2)
tiny = generate_topology(tiny_cfg, 0, num_users=2)
tiny_ch = sample_channels(tiny, 0, 0)
best_alloc, best = brute_force_oracle(tiny, tiny_ch, np.linspace(0, tiny.max_power, 5))
print(f"oracle {best / 1e6:.2f} Mbit/s vs greedy "
      f"{compute_rates(tiny, tiny_ch, greedy_allocation(tiny, tiny_ch)).total_rate / 1e6:.2f} Mbit/s")
print("oracle power per subcarrier (W):\n", best_alloc.power[0])
