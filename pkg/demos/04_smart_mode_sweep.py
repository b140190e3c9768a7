"""
Letting the SDN controller choose
=================================

A reduced sweep over three user counts. For each count the harness trains a
fixed centralized run, a fixed distributed run and a smart run in which the
SDN controller picks the structure every slot, then evaluates all three with
learning switched off.
"""

from pathlib import Path

from smartran.config import profile_config
from smartran.harness import emit_results, run_sweep

cfg = profile_config("fast", sweep=(8, 32, 96), train_slots=300, eval_slots=100)
summary = run_sweep(cfg)

###############################################################################
# TOC in Mbit/s per mode. For the smart runs we also show how often each
# structure was picked during evaluation.
#
# The budget here is a fifth of the fast profile's. In smart runs each
# allocator only trains on the slots where its structure is active, so with
# so few slots the smart column can trail the better fixed one. Rerun with
# the fast profile defaults (``smartran sweep --profile fast``) to see it
# close the gap.

for k in cfg.sweep:
    row = {p.mode: p for p in summary.points if p.k == k}
    smart = row["smart"]
    print(f"K={k:3d}  cnt {row['centralized'].toc / 1e6:7.1f}  dst {row['distributed'].toc / 1e6:7.1f}  "
          f"smart {smart.toc / 1e6:7.1f}  (Cnt {smart.freq_cnt:.2f}, Dst {smart.freq_dst:.2f})")

###############################################################################
# Everything above is also written to disk: results.csv with one row per
# point, the controller's decisions per slot and the per-user rates.

out = Path("demo_results")
for path in emit_results(summary, out):
    print("wrote", path)
