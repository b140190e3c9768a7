"""Exhaustive throughput maximiser for tiny instances.

Every (RRS, subcarrier, served user) triple gets one level from the power
grid; a triple is assigned exactly when its power is positive (an assigned
user at zero power contributes nothing and changes nobody's SINR). All level
vectors that respect the per-RRS budget and L_max are enumerated and scored
with :func:`smartran.netmodel.compute_rates`.
"""
from __future__ import annotations

import itertools
from typing import List, Sequence, Tuple

import numpy as np

from .netmodel import Allocation, ChannelState, Topology, compute_rates

MAX_RRS, MAX_USERS, MAX_SUBCARRIERS, MAX_LEVELS = 2, 4, 4, 5


class InstanceTooLarge(ValueError):
    pass


def _check_size(topo: Topology, grid) -> None:
    limits = [("RRSs", topo.num_rrs, MAX_RRS), ("users", topo.num_users, MAX_USERS),
              ("subcarriers", topo.num_subcarriers, MAX_SUBCARRIERS), ("power levels", len(grid), MAX_LEVELS)]
    for what, value, bound in limits:
        if value > bound:
            raise InstanceTooLarge(f"oracle handles at most {bound} {what}, got {value}")


def _rrs_candidates(topo: Topology, b: int, grid: np.ndarray) -> List[np.ndarray]:
    """All budget- and L_max-feasible power matrices (N, K) for RRS b."""
    users = topo.served_users(b)
    slots = [(n, k) for n in range(topo.num_subcarriers) for k in users]
    budget = topo.max_power * (1 + 1e-9)
    out = []

    def rec(i, power, spent):
        if i == len(slots):
            if np.all((power > 0).sum(axis=1) <= topo.max_users_per_carrier):
                out.append(power.copy())
            return
        n, k = slots[i]
        for level in grid:
            if spent + level > budget:
                continue
            power[n, k] = level
            rec(i + 1, power, spent + level)
        power[n, k] = 0.0

    rec(0, np.zeros((topo.num_subcarriers, topo.num_users)), 0.0)
    return out


def brute_force_oracle(topo: Topology, ch: ChannelState, power_grid: Sequence[float]) -> Tuple[Allocation, float]:
    """Best allocation over the power grid and its total rate.

    Ties keep the first candidate found, so the result is deterministic.
    """
    grid = np.unique(np.asarray(power_grid, dtype=float))
    _check_size(topo, grid)
    if np.any(grid < 0):
        raise ValueError("power levels must be non-negative")
    per_rrs = [_rrs_candidates(topo, b, grid) for b in range(topo.num_rrs)]
    best_rate, best = -1.0, Allocation.empty(topo)
    for combo in itertools.product(*per_rrs):
        power = np.stack(combo)
        alloc = Allocation(power > 0, power)
        rate = compute_rates(topo, ch, alloc).total_rate
        if rate > best_rate:
            best_rate, best = rate, alloc
    return best, float(best_rate)
