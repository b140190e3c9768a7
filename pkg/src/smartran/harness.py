"""Slot loop, user-count sweeps and result files.

Per slot: sample channels, (smart only) build the SDN state and pick a mode,
let the active allocator decide, validate and score the allocation, account
overhead, complexity and TOC, store transitions and update the learners.

Within a sweep point every mode sees the same topology and the same fading
sequence, so their numbers differ only through the decisions taken.
"""
from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .allocators import (CentralizedAllocator, DistributedAllocator, GainNormalizer, LearnerConfig,
                         default_k_max, nominal_complexity_models)
from .config import ScenarioConfig
from .metrics import (CNT, DST, BitWidths, SlotReport, TocWeights, agent_complexity, monitoring_overhead,
                      overhead, overhead_bits, scheme_complexity, toc)
from .netmodel import compute_rates, generate_topology, sample_channels, validate_allocation
from .rl import load_agent, save_agent
from .sdn import (ModeHistory, RunningScale, SdnController, build_sdn_state, sdn_reward, sdn_update,
                  select_mode)

log = logging.getLogger(__name__)

MODE_NAMES = {"centralized": CNT, "distributed": DST, "smart": None}
RESULTS_HEADER = ["k", "mode", "rate_bps", "overhead_bits", "complexity_mac", "toc"]
DECISIONS_HEADER = ["slot", "x_cnt", "x_dst", "reward"]


class EpisodeError(RuntimeError):
    """A module error inside the slot loop, tagged with the failing slot."""

    def __init__(self, slot: int, cause: BaseException):
        super().__init__(f"slot {slot}: {type(cause).__name__}: {cause}")
        self.slot = slot
        self.cause = cause


def toc_weights(cfg: ScenarioConfig) -> TocWeights:
    """TOC weights normalised by the centralized scheme at ``cfg.ref_users`` users."""
    bw = BitWidths(cfg.b_csi, cfg.b_sc, cfg.b_pw)
    o_ref = overhead_bits(CNT, cfg.ref_users, cfg.num_subcarriers, bw)
    cms = nominal_complexity_models(CNT, cfg.ref_users, cfg.num_rrs, cfg.num_subcarriers,
                                    cfg.max_users_per_carrier, LearnerConfig.from_scenario(cfg))
    return TocWeights(cfg.w_overhead, cfg.w_complexity, float(o_ref), float(agent_complexity(cms[0])))


@dataclass
class Agents:
    """Everything that learns or carries state across slots for one sweep point."""
    topo: object
    normalizer: GainNormalizer
    cnt: Optional[CentralizedAllocator] = None
    dst: Optional[DistributedAllocator] = None
    sdn: Optional[SdnController] = None
    history: ModeHistory = field(default_factory=ModeHistory)
    toc_scale: RunningScale = field(default_factory=RunningScale)
    channel_seed: int = 0
    next_slot: int = 0

    def allocator(self, mode: str):
        return self.cnt if mode == CNT else self.dst

    def freeze(self) -> None:
        self.normalizer.freeze()
        self.toc_scale.freeze()


def point_seeds(seed: int, k: int) -> Dict[str, int]:
    """Disjoint seeds for topology, fading and each learner of one sweep point."""
    words = np.random.SeedSequence([int(seed), int(k)]).generate_state(4)
    return dict(zip(("topology", "channel", "rap", "sdn"), (int(w) for w in words)))


def build_agents(cfg: ScenarioConfig, mode: str, topo, seeds: Dict[str, int]) -> Agents:
    lc = LearnerConfig.from_scenario(cfg)
    normalizer = GainNormalizer(cfg.warmup_slots)
    agents = Agents(topo, normalizer, history=ModeHistory(cfg.toc_ema, cfg.stale_decay),
                    toc_scale=RunningScale(max(cfg.warmup_slots, 1)), channel_seed=seeds["channel"])
    if mode in ("centralized", "smart"):
        agents.cnt = CentralizedAllocator(topo, lc, seeds["rap"], normalizer=normalizer)
    if mode in ("distributed", "smart"):
        agents.dst = DistributedAllocator(topo, lc, seeds["rap"], normalizer=normalizer)
    if mode == "smart":
        agents.sdn = SdnController.from_scenario(cfg, seeds["sdn"])
    return agents


def run_episode(cfg: ScenarioConfig, mode: str, agents: Agents, slot_count: int,
                train: bool = True) -> List[SlotReport]:
    """Run ``slot_count`` slots and return one report per slot.

    ``train=False`` is greedy evaluation: no exploration, no replay writes, no
    parameter or normaliser changes.
    """
    if mode not in MODE_NAMES:
        raise ValueError(f"mode must be one of {sorted(MODE_NAMES)}")
    topo = agents.topo
    bw = BitWidths(cfg.b_csi, cfg.b_sc, cfg.b_pw)
    weights = toc_weights(cfg)
    smart = mode == "smart"
    k_max = default_k_max(topo)
    scale = cfg.rap_reward_scale * topo.subcarrier_bandwidth
    complexity = {m: scheme_complexity(m, topo, agents.allocator(m).complexity_models())
                  for m in (CNT, DST) if agents.allocator(m) is not None}
    extra_overhead = monitoring_overhead(topo, bw) if cfg.monitoring else 0
    if not train:
        agents.freeze()

    def sdn_state(ch):
        return build_sdn_state(topo, ch, agents.history, k_max, agents.normalizer, cfg.phase_period)

    reports: List[SlotReport] = []
    pending = None       # (state, action, summed reward, slots) of the open SDN decision
    active = MODE_NAMES[mode]
    start = agents.next_slot
    for t in range(start, start + slot_count):
        try:
            ch = sample_channels(topo, t, agents.channel_seed)
            if train:
                agents.normalizer.update(topo, ch)
            if smart and (t - start) % cfg.decision_epoch == 0:
                s_sdn = sdn_state(ch)
                if pending is not None and train:
                    agents.sdn.store(pending[0], pending[1], pending[2] / pending[3], s_sdn)
                    sdn_update(agents.sdn)
                action = select_mode(agents.sdn, s_sdn, explore=train)
                active = action.mode
                pending = [s_sdn, action, 0.0, 0]
            allocator = agents.allocator(active)
            state = allocator.encode(ch)
            alloc, rap_action = allocator.decide(state, explore=train)
            verdict = validate_allocation(topo, alloc)
            if not verdict.ok:
                raise RuntimeError(f"infeasible allocation: {verdict.violations}")
            rates = compute_rates(topo, ch, alloc)
            o = overhead(active, topo, bw) + extra_overhead
            c = complexity[active]
            value = toc(rates.total_rate, o, c, weights)
            report = SlotReport(active, rates.total_rate, o, c, value, t, rates.per_user_rate)
            if smart:
                if train:
                    agents.toc_scale.update(value)
                report.reward = sdn_reward(report, agents.toc_scale)
                agents.history.record(active, report.reward)
                pending[2] += report.reward
                pending[3] += 1
            if train:
                # each slot is a one-shot allocation problem: next state = state, done
                allocator.observe(state, rap_action, rates, state, scale)
                allocator.update()
        except EpisodeError:
            raise
        except Exception as exc:
            raise EpisodeError(t, exc) from exc
        reports.append(report)
    if smart and pending is not None and train and pending[3]:
        ch = sample_channels(topo, start + slot_count, agents.channel_seed)
        agents.sdn.store(pending[0], pending[1], pending[2] / pending[3], sdn_state(ch))
    agents.next_slot = start + slot_count
    return reports


@dataclass
class PointResult:
    k: int
    mode: str
    rate_bps: float
    overhead_bits: float
    complexity_mac: float
    toc: float
    freq_cnt: float
    freq_dst: float


@dataclass
class RunSummary:
    seed: int
    points: List[PointResult]
    wall_clock_s: float = 0.0
    decisions: Dict[int, List[SlotReport]] = field(default_factory=dict)
    eval_reports: Dict[tuple, List[SlotReport]] = field(default_factory=dict)
    config: Optional[dict] = None

    def table(self, mode: str) -> Dict[int, PointResult]:
        return {p.k: p for p in self.points if p.mode == mode}


def aggregate(k: int, mode: str, reports: Sequence[SlotReport]) -> PointResult:
    if not reports:
        return PointResult(k, mode, *([float("nan")] * 4), 0.0, 0.0)
    col = lambda name: float(np.mean([getattr(r, name) for r in reports]))
    n_cnt = sum(r.x_cnt for r in reports)
    return PointResult(k, mode, col("total_rate"), col("overhead_bits"), col("complexity_units"), col("toc"),
                       n_cnt / len(reports), (len(reports) - n_cnt) / len(reports))


def checkpoint_name(mode: str, rrs, k: int) -> str:
    return f"{mode}_{rrs}_k{k}"


def _agent_table(agents: Agents, mode: str, k: int):
    out = []
    if agents.cnt is not None:
        out.append((checkpoint_name(mode, "bbu", k), agents.cnt.agent.agent))
    if agents.dst is not None:
        out += [(checkpoint_name(mode, f"rrs{b}", k), a.agent) for b, a in enumerate(agents.dst.agents)]
    if agents.sdn is not None:
        out.append((checkpoint_name(mode, "sdn", k), agents.sdn.agent))
    return out


def save_checkpoints(agents: Agents, mode: str, k: int, directory) -> None:
    nz, sc = agents.normalizer, agents.toc_scale
    meta = {"mode": mode, "k": k, "norm_mean": nz.mean, "norm_m2": nz._m2, "norm_count": nz.count,
            "toc_total": sc.total, "toc_count": sc.count, "toc_avg": dict(agents.history.toc_avg),
            "prev_mode": agents.history.prev_mode, "next_slot": agents.next_slot}
    for name, agent in _agent_table(agents, mode, k):
        save_agent(Path(directory) / name, agent, meta)


def load_checkpoints(agents: Agents, mode: str, k: int, directory) -> None:
    """Restore learner weights plus the frozen normaliser and SDN history."""
    meta = None
    for name, agent in _agent_table(agents, mode, k):
        meta = load_agent(Path(directory) / name, agent)
    nz, sc = agents.normalizer, agents.toc_scale
    nz.mean, nz._m2, nz.count = meta["norm_mean"], meta["norm_m2"], meta["norm_count"]
    sc.total, sc.count = meta["toc_total"], meta["toc_count"]
    agents.freeze()
    agents.history.toc_avg.update(meta["toc_avg"])
    agents.history.prev_mode = meta["prev_mode"]
    agents.next_slot = meta["next_slot"]


def run_point(cfg: ScenarioConfig, mode: str, k: int, seed: int, checkpoint_dir=None,
              from_checkpoints: bool = False):
    """Train then evaluate one mode at one user count; returns (train, eval) reports."""
    seeds = point_seeds(seed, k)
    topo = generate_topology(cfg, seeds["topology"], num_users=k)
    agents = build_agents(cfg, mode, topo, seeds)
    if from_checkpoints:
        load_checkpoints(agents, mode, k, checkpoint_dir)
        return [], run_episode(cfg, mode, agents, cfg.eval_slots, train=False)
    train = run_episode(cfg, mode, agents, cfg.train_slots, train=True)
    if checkpoint_dir is not None:
        save_checkpoints(agents, mode, k, checkpoint_dir)
    return train, run_episode(cfg, mode, agents, cfg.eval_slots, train=False)


def run_sweep(cfg: ScenarioConfig, modes: Optional[Sequence[str]] = None, seed: Optional[int] = None,
              sweep: Optional[Sequence[int]] = None, checkpoint_dir=None,
              from_checkpoints: bool = False) -> RunSummary:
    """Fresh topology and learners per user count; averages cover evaluation slots only."""
    seed = cfg.seed if seed is None else int(seed)
    modes = tuple(modes or cfg.modes())
    sweep = tuple(sweep or cfg.sweep)
    started = time.perf_counter()
    summary = RunSummary(seed, [], config=asdict(cfg))
    for k in sweep:
        for mode in modes:
            t0 = time.perf_counter()
            train, evals = run_point(cfg, mode, k, seed, checkpoint_dir, from_checkpoints)
            summary.points.append(aggregate(k, mode, evals))
            summary.eval_reports[(mode, k)] = evals
            if mode == "smart":
                summary.decisions[k] = train + evals
            log.info("K=%d %s: toc=%.4g (%.1fs)", k, mode, summary.points[-1].toc, time.perf_counter() - t0)
    summary.wall_clock_s = time.perf_counter() - started
    return summary


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def emit_results(summary: RunSummary, directory) -> List[Path]:
    """Write results.csv, per-slot logs and summary.json into ``directory``."""
    out = Path(directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    written = []
    path = out / "results.csv"
    _write_csv(path, RESULTS_HEADER, [[p.k, p.mode, p.rate_bps, p.overhead_bits, p.complexity_mac, p.toc]
                                      for p in summary.points])
    written.append(path)
    for k, reports in summary.decisions.items():
        path = out / f"decisions_k{k}.csv"
        _write_csv(path, DECISIONS_HEADER, [[r.slot, r.x_cnt, r.x_dst, r.reward] for r in reports])
        written.append(path)
    for (mode, k), reports in summary.eval_reports.items():
        path = out / f"slots_{mode}_k{k}.csv"
        header = ["slot", "mode", "total_rate"] + [f"rate_u{i}" for i in range(k)]
        _write_csv(path, header, [[r.slot, r.mode, r.total_rate, *r.per_user_rate] for r in reports])
        written.append(path)
    doc = {"seed": summary.seed, "wall_clock_s": summary.wall_clock_s, "config": summary.config,
           "points": [asdict(p) for p in summary.points]}
    path = out / "summary.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=list))
    written.append(path)
    return written


def read_results(path) -> List[dict]:
    """Parse results.csv back into typed rows."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        row["k"] = int(row["k"])
        for key in RESULTS_HEADER[2:]:
            row[key] = float(row[key])
    return rows
