"""
What each structure costs
=========================

Signalling overhead and learner complexity grow differently with the number
of users in the two structures. This script tabulates both and shows where
the combined TOC score starts to favour distributed operation when the
throughput of the two is equal.
"""

from smartran.allocators import LearnerConfig, nominal_complexity_models
from smartran.config import profile_config
from smartran.harness import toc_weights
from smartran.metrics import CNT, DST, BitWidths, agent_complexity, overhead_bits, toc

cfg = profile_config("fast")
bits = BitWidths(cfg.b_csi, cfg.b_sc, cfg.b_pw)
lc = LearnerConfig.from_scenario(cfg)
weights = toc_weights(cfg)
N, B = cfg.num_subcarriers, cfg.num_rrs

###############################################################################
# Centralized operation forwards CSI to the BBU pool and sends the decisions
# back down, so it always needs 40/16 = 2.5 times the bits.

print(f"{'K':>4s} {'O_cnt':>9s} {'O_dst':>9s} {'C_cnt (MAC)':>13s} {'C_dst (MAC)':>13s} {'TOC dst/cnt':>12s}")
for k in (8, 16, 32, 64, 96, 160, 240):
    o_c, o_d = overhead_bits(CNT, k, N, bits), overhead_bits(DST, k, N, bits)
    c_c = sum(agent_complexity(m) for m in nominal_complexity_models(CNT, k, B, N, cfg.max_users_per_carrier, lc))
    c_d = sum(agent_complexity(m) for m in nominal_complexity_models(DST, k, B, N, cfg.max_users_per_carrier, lc))
    rate = 1.0      # equal throughput isolates the cost terms
    ratio = toc(rate, o_d, c_d, weights) / toc(rate, o_c, c_c, weights)
    print(f"{k:4d} {o_c:9d} {o_d:9d} {c_c:13d} {c_d:13d} {ratio:12.3f}")

###############################################################################
# With fixed hidden layers the distributed scheme pays for four small agents
# instead of one large one, a constant extra cost. The overhead gap instead
# grows with K, so at some user count the ratio above passes 1. The actual
# crossover in a run also depends on the rates each structure achieves.
