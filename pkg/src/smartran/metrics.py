"""Signaling overhead, learning complexity and the TOC score."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

CNT = "Cnt"
DST = "Dst"


def _mode(mode: str) -> str:
    m = {"cnt": CNT, "centralized": CNT, "dst": DST, "distributed": DST}.get(str(mode).lower())
    if m is None:
        raise ValueError(f"unknown mode {mode!r}")
    return m


@dataclass(frozen=True)
class BitWidths:
    b_csi: int = 16
    b_sc: int = 4
    b_pw: int = 4

    def __post_init__(self):
        for name in ("b_csi", "b_sc", "b_pw"):
            v = getattr(self, name)
            if int(v) != v or v <= 0:
                raise ValueError(f"{name} must be a positive integer")


@dataclass(frozen=True)
class ComplexityModel:
    layer_sizes: Sequence[Sequence[int]]   # one entry per trained network
    minibatch: int = 64
    updates_per_slot: int = 1

    def __post_init__(self):
        if not self.layer_sizes or any(len(net) < 2 for net in self.layer_sizes):
            raise ValueError("each network needs at least an input and an output layer")
        if self.minibatch < 1 or self.updates_per_slot < 0:
            raise ValueError("need minibatch >= 1 and updates_per_slot >= 0")


@dataclass(frozen=True)
class TocWeights:
    w_o: float = 1.0
    w_c: float = 1.0
    overhead_ref: float = 1.0
    complexity_ref: float = 1.0

    def __post_init__(self):
        if self.w_o < 0 or self.w_c < 0:
            raise ValueError("TOC weights must be non-negative")
        if self.overhead_ref <= 0 or self.complexity_ref <= 0:
            raise ValueError("TOC normalizers must be positive")


@dataclass
class SlotReport:
    mode: str
    total_rate: float
    overhead_bits: float
    complexity_units: float
    toc: float
    slot: int = -1
    per_user_rate: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)
    reward: float = float("nan")

    @property
    def x_cnt(self) -> int:
        return int(self.mode == CNT)

    @property
    def x_dst(self) -> int:
        return int(self.mode == DST)


def overhead_bits(mode: str, num_users: int, num_subcarriers: int, bw: BitWidths) -> int:
    """Per-slot feedback bits for K users on N subcarriers.

    Distributed: users report CSI to their own RRS only. Centralized adds the
    RRS-to-BBU forwarding of that CSI and the BBU-to-RRS download of the
    subcarrier indicators and power values.
    """
    KN = int(num_users) * int(num_subcarriers)
    if _mode(mode) == DST:
        return KN * bw.b_csi
    return KN * (2 * bw.b_csi + bw.b_sc + bw.b_pw)


def overhead(mode: str, topo, bw: BitWidths) -> int:
    per_cell = topo.users_per_rrs()
    if _mode(mode) == DST:
        return int(sum(overhead_bits(DST, kb, topo.num_subcarriers, bw) for kb in per_cell))
    return overhead_bits(CNT, topo.num_users, topo.num_subcarriers, bw)


def monitoring_overhead(topo, bw: BitWidths) -> int:
    """Per-slot status report each RRS sends to the SDN controller."""
    return topo.num_rrs * bw.b_csi


def agent_complexity(cm: ComplexityModel) -> int:
    """Multiply-accumulates per slot: forward and backward over every trained net."""
    per_sample = sum(2 * sum(a * b for a, b in zip(net[:-1], net[1:])) for net in cm.layer_sizes)
    return int(cm.updates_per_slot) * int(cm.minibatch) * per_sample


def scheme_complexity(mode: str, topo, cm_per_agent) -> int:
    """One BBU agent when centralized, the sum over RRS agents when distributed."""
    if _mode(mode) == CNT:
        if not isinstance(cm_per_agent, ComplexityModel):
            (cm_per_agent,) = cm_per_agent
        return agent_complexity(cm_per_agent)
    if isinstance(cm_per_agent, ComplexityModel):
        cm_per_agent = [cm_per_agent] * topo.num_rrs
    if len(cm_per_agent) != topo.num_rrs:
        raise ValueError(f"need one complexity model per RRS ({topo.num_rrs})")
    return int(sum(agent_complexity(cm) for cm in cm_per_agent))


def toc(rate: float, overhead_bits: float, complexity_units: float, w: TocWeights) -> float:
    if rate < 0 or overhead_bits < 0 or complexity_units < 0:
        raise ValueError("TOC inputs must be non-negative")
    cost = w.w_o * overhead_bits / w.overhead_ref + w.w_c * complexity_units / w.complexity_ref
    return float(rate / (1.0 + cost))
