"""Topology, Rayleigh channels and downlink PD-NOMA rates.

Array conventions used throughout the package:

* channel gains are indexed ``(user k, rrs b, subcarrier n)``
* allocations are indexed ``(rrs b, subcarrier n, user k)``
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional

import numpy as np

PATHLOSS_INTERCEPT_DB = 128.1
PATHLOSS_SLOPE_DB = 37.6
MIN_DISTANCE_M = 1.0


class FeasibilityError(ValueError):
    """Raised when an allocation breaks a power, L_max or serving-RRS rule."""


def dbm_to_watts(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


@dataclass(frozen=True)
class Topology:
    area_radius: float
    rrs_positions: np.ndarray       # (B, 2) metres
    cell_radius: float
    user_positions: np.ndarray      # (K, 2) metres
    serving_rrs: np.ndarray         # (K,) int
    num_subcarriers: int
    subcarrier_bandwidth: float     # Hz
    max_power: float                # W per RRS
    noise_psd: float                # W/Hz
    max_users_per_carrier: int = 2

    def __post_init__(self):
        if len(self.rrs_positions) < 1:
            raise ValueError("topology needs at least one RRS")
        if self.num_subcarriers < 1:
            raise ValueError("num_subcarriers must be >= 1")
        if self.max_power <= 0:
            raise ValueError("max_power must be positive")
        if len(self.serving_rrs) != len(self.user_positions):
            raise ValueError("serving_rrs must name one RRS per user")

    @property
    def num_rrs(self) -> int:
        return len(self.rrs_positions)

    @property
    def num_users(self) -> int:
        return len(self.user_positions)

    @property
    def noise_power(self) -> float:
        """Noise power per subcarrier, in watts."""
        return self.noise_psd * self.subcarrier_bandwidth

    def served_users(self, b: int) -> np.ndarray:
        return np.flatnonzero(self.serving_rrs == b)

    def users_per_rrs(self) -> np.ndarray:
        return np.bincount(self.serving_rrs, minlength=self.num_rrs)

    def distances(self) -> np.ndarray:
        """User-to-RRS distances, shape (K, B)."""
        diff = self.user_positions[:, None, :] - self.rrs_positions[None, :, :]
        return np.hypot(diff[..., 0], diff[..., 1])


@dataclass(frozen=True)
class ChannelState:
    gains: np.ndarray   # (K, B, N) linear power gains
    slot_index: int


@dataclass
class Allocation:
    assignment: np.ndarray  # (B, N, K) bool
    power: np.ndarray       # (B, N, K) watts

    @classmethod
    def empty(cls, topo: Topology) -> "Allocation":
        shape = (topo.num_rrs, topo.num_subcarriers, topo.num_users)
        return cls(np.zeros(shape, dtype=bool), np.zeros(shape))


@dataclass(frozen=True)
class RateReport:
    per_user_rate: np.ndarray     # (K,) bit/s
    per_carrier_rate: np.ndarray  # (B, N) bit/s
    total_rate: float


class Violation(NamedTuple):
    kind: str       # "budget" | "l_max" | "cross_rrs" | "unassigned_power" | "negative_power" | "shape"
    where: tuple
    detail: str


@dataclass
class Verdict:
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def rrs_layout(num_rrs: int, area_radius: float, cell_radius: float) -> np.ndarray:
    """Fixed symmetric RRS pattern: centre for one RRS, otherwise a ring.

    The ring radius is half of ``area_radius - cell_radius`` so every cell disk
    stays inside the coverage area.
    """
    if cell_radius > area_radius:
        raise ValueError(
            f"cell radius {cell_radius} m does not fit inside area radius {area_radius} m")
    if num_rrs == 1:
        return np.zeros((1, 2))
    ring = 0.5 * (area_radius - cell_radius)
    angles = 2 * np.pi * np.arange(num_rrs) / num_rrs + np.pi / num_rrs
    return ring * np.column_stack([np.cos(angles), np.sin(angles)])


def generate_topology(cfg, rng_seed: int, num_users: Optional[int] = None) -> Topology:
    """Drop RRSs on the fixed pattern and users uniformly inside their cells.

    Users are associated round-robin (user ``k`` is served by RRS ``k mod B``),
    so per-cell loads differ by at most one.
    """
    B = cfg.num_rrs
    K = cfg.num_users if num_users is None else num_users
    for name in ("area_radius", "cell_radius", "bandwidth_hz"):
        if getattr(cfg, name) <= 0:
            raise ValueError(f"{name} must be positive")
    if B < 1 or cfg.num_subcarriers < 1 or K < 0:
        raise ValueError("need B >= 1, N >= 1 and K >= 0")
    rrs = rrs_layout(B, cfg.area_radius, cfg.cell_radius)

    rng = np.random.default_rng(rng_seed)
    serving = np.arange(K) % B
    r = cfg.cell_radius * np.sqrt(rng.uniform(size=K))
    theta = rng.uniform(0.0, 2 * np.pi, size=K)
    users = rrs[serving] + np.column_stack([r * np.cos(theta), r * np.sin(theta)])

    return Topology(
        area_radius=float(cfg.area_radius),
        rrs_positions=rrs,
        cell_radius=float(cfg.cell_radius),
        user_positions=users.reshape(K, 2),
        serving_rrs=serving,
        num_subcarriers=int(cfg.num_subcarriers),
        subcarrier_bandwidth=cfg.bandwidth_hz / cfg.num_subcarriers,
        max_power=float(dbm_to_watts(cfg.max_power_dbm)),
        noise_psd=float(dbm_to_watts(cfg.noise_psd_dbm_hz)),
        max_users_per_carrier=int(cfg.max_users_per_carrier),
    )


def pathloss_db(distance_m):
    d = np.maximum(np.asarray(distance_m, dtype=float), MIN_DISTANCE_M)
    return PATHLOSS_INTERCEPT_DB + PATHLOSS_SLOPE_DB * np.log10(d / 1000.0)


def large_scale_gains(topo: Topology) -> np.ndarray:
    """Mean power gain per (user, RRS)."""
    return 10.0 ** (-pathloss_db(topo.distances()) / 10.0)


def sample_channels(topo: Topology, slot: int, rng_seed: int) -> ChannelState:
    """Path loss times unit-mean exponential fading, i.i.d. per (k, b, n, slot).

    The generator is keyed on ``(rng_seed, slot)`` so any slot can be
    regenerated independently of the others.
    """
    rng = np.random.default_rng([int(rng_seed), int(slot)])
    fading = rng.exponential(1.0, size=(topo.num_users, topo.num_rrs, topo.num_subcarriers))
    # exponential draws of exactly 0 are possible in principle
    fading = np.maximum(fading, np.finfo(float).tiny)
    gains = large_scale_gains(topo)[:, :, None] * fading
    return ChannelState(gains=gains, slot_index=int(slot))


def validate_allocation(topo: Topology, alloc: Allocation, rtol: float = 1e-9) -> Verdict:
    shape = (topo.num_rrs, topo.num_subcarriers, topo.num_users)
    verdict = Verdict()
    if alloc.assignment.shape != shape or alloc.power.shape != shape:
        verdict.violations.append(Violation(
            "shape", shape, f"expected {shape}, got {alloc.assignment.shape}/{alloc.power.shape}"))
        return verdict

    assigned = alloc.assignment.astype(bool)
    power = alloc.power
    for b, n, k in zip(*np.nonzero(power < 0)):
        verdict.violations.append(Violation("negative_power", (b, n, k), f"power {power[b, n, k]}"))
    for b, n, k in zip(*np.nonzero((power > 0) & ~assigned)):
        verdict.violations.append(Violation(
            "unassigned_power", (b, n, k), "positive power on an unassigned triple"))

    wrong_rrs = assigned & (topo.serving_rrs[None, None, :] != np.arange(topo.num_rrs)[:, None, None])
    for b, n, k in zip(*np.nonzero(wrong_rrs)):
        verdict.violations.append(Violation(
            "cross_rrs", (b, n, k), f"user {k} is served by RRS {topo.serving_rrs[k]}, not {b}"))

    per_carrier = assigned.sum(axis=2)
    for b, n in zip(*np.nonzero(per_carrier > topo.max_users_per_carrier)):
        verdict.violations.append(Violation(
            "l_max", (b, n), f"{per_carrier[b, n]} users > L_max={topo.max_users_per_carrier}"))

    budget = power.sum(axis=(1, 2))
    for b in np.flatnonzero(budget > topo.max_power * (1 + rtol)):
        verdict.violations.append(Violation(
            "budget", (b,), f"{budget[b]:.6g} W > {topo.max_power:.6g} W"))
    return verdict


def compute_rates(topo: Topology, ch: ChannelState, alloc: Allocation) -> RateReport:
    """Downlink PD-NOMA rates with perfect SIC.

    On each (b, n) the co-scheduled users are ordered by their gain to RRS b;
    a user cancels everything addressed to weaker users and is interfered by
    the signals of stronger ones. Equal gains: the lower user index counts as
    weaker. Every other RRS using carrier n adds its full carrier power as
    inter-cell interference.
    """
    verdict = validate_allocation(topo, alloc)
    if not verdict.ok:
        v = verdict.violations[0]
        raise FeasibilityError(f"{v.kind} violated at {v.where}: {v.detail}")

    B, N, K = topo.num_rrs, topo.num_subcarriers, topo.num_users
    per_user = np.zeros(K)
    per_carrier = np.zeros((B, N))
    bs, ns, ks = np.nonzero(alloc.assignment)
    if len(ks) == 0:
        return RateReport(per_user, per_carrier, 0.0)

    p = alloc.power[bs, ns, ks]
    g = ch.gains[ks, bs, ns]

    same = (bs[:, None] == bs[None, :]) & (ns[:, None] == ns[None, :])
    stronger = (g[None, :] > g[:, None]) | ((g[None, :] == g[:, None]) & (ks[None, :] > ks[:, None]))
    intra = g * ((same & stronger) @ p)

    carrier_power = alloc.power.sum(axis=2)                    # (B, N)
    cross = ch.gains[ks, :, ns] * carrier_power[:, ns].T         # (M, B)
    cross[np.arange(len(ks)), bs] = 0.0
    inter = cross.sum(axis=1)

    sinr = p * g / (intra + inter + topo.noise_power)
    rate = topo.subcarrier_bandwidth * np.log2(1.0 + sinr)
    np.add.at(per_user, ks, rate)
    np.add.at(per_carrier, (bs, ns), rate)
    return RateReport(per_user, per_carrier, float(per_user.sum()))
