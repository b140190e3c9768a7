import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from smartran.allocators import LearnerConfig, nominal_complexity_models
from smartran.metrics import (CNT, DST, BitWidths, ComplexityModel, SlotReport, TocWeights, agent_complexity,
                              monitoring_overhead, overhead, overhead_bits, scheme_complexity, toc)

from conftest import make_topology

BW = BitWidths(16, 4, 4)


def test_overhead_hand_values():
    assert overhead_bits(DST, 10, 32, BW) == 5120
    assert overhead_bits(CNT, 10, 32, BW) == 12800


def test_overhead_empty_network():
    assert overhead_bits(DST, 0, 32, BW) == 0
    assert overhead_bits(CNT, 0, 32, BW) == 0


@given(k=st.integers(1, 500), n=st.integers(1, 64))
def test_overhead_ratio_and_linearity(k, n):
    o_cnt, o_dst = overhead_bits(CNT, k, n, BW), overhead_bits(DST, k, n, BW)
    assert o_cnt * 16 == o_dst * 40            # ratio 2.5 exactly, in integers
    assert o_cnt > o_dst
    assert overhead_bits(CNT, 2 * k, n, BW) == 2 * o_cnt
    assert overhead_bits(DST, 2 * k, n, BW) == 2 * o_dst
    assert overhead_bits(DST, k, 2 * n, BW) == 2 * o_dst


def test_overhead_on_topology_matches_per_cell_sum():
    topo = make_topology(num_users=7, num_rrs=3, num_subcarriers=5)
    assert overhead(DST, topo, BW) == 7 * 5 * 16
    assert overhead(CNT, topo, BW) == 7 * 5 * 40
    assert monitoring_overhead(topo, BW) == 3 * 16


def test_bitwidths_validated():
    with pytest.raises(ValueError):
        BitWidths(0, 4, 4)


def test_agent_complexity_hand_value():
    assert agent_complexity(ComplexityModel([[4, 8, 2]], minibatch=1, updates_per_slot=1)) == 96


def test_agent_complexity_eval_slot_and_linearity():
    assert agent_complexity(ComplexityModel([[4, 8, 2]], 64, 0)) == 0
    one = agent_complexity(ComplexityModel([[4, 8, 2], [6, 8, 1]], 32, 1))
    assert agent_complexity(ComplexityModel([[4, 8, 2], [6, 8, 1]], 64, 1)) == 2 * one


def test_complexity_model_validation():
    with pytest.raises(ValueError):
        ComplexityModel([], 64, 1)
    with pytest.raises(ValueError):
        ComplexityModel([[4, 2]], 0, 1)


def test_scheme_complexity_single_cell_symmetry():
    topo = make_topology(num_users=4, num_rrs=1, num_subcarriers=4)
    cm = ComplexityModel([[17, 128, 128, 20]], 64, 1)
    assert scheme_complexity(CNT, topo, cm) == scheme_complexity(DST, topo, [cm])


def test_scheme_complexity_sum_rule():
    topo = make_topology(num_users=8, num_rrs=4)
    cm = ComplexityModel([[9, 32, 3]], 64, 1)
    assert scheme_complexity(DST, topo, cm) == 4 * agent_complexity(cm)
    with pytest.raises(ValueError):
        scheme_complexity(DST, topo, [cm, cm])


def test_centralized_complexity_grows_with_users():
    lc = LearnerConfig()
    c40 = agent_complexity(nominal_complexity_models(CNT, 40, 4, 32, 2, lc)[0])
    c160 = agent_complexity(nominal_complexity_models(CNT, 160, 4, 32, 2, lc)[0])
    assert c160 > c40


def test_toc_reductions():
    w0 = TocWeights(0.0, 0.0, 1.0, 1.0)
    assert toc(123.0, 1e9, 1e9, w0) == 123.0
    assert toc(0.0, 10.0, 10.0, TocWeights()) == 0.0
    w = TocWeights(1.0, 2.0, 100.0, 1000.0)
    assert np.isclose(toc(30.0, 100.0, 500.0, w), 30.0 / (1 + 1 + 1))


@given(rate=st.floats(1.0, 1e9), o=st.floats(0.0, 1e6), c=st.floats(0.0, 1e9), d=st.floats(1e-3, 1e3))
def test_toc_monotone(rate, o, c, d):
    w = TocWeights(1.0, 1.0, 1e4, 1e8)
    base = toc(rate, o, c, w)
    assert toc(rate * (1 + d), o, c, w) > base
    assert toc(rate, o + d * 1e4, c, w) < base
    assert toc(rate, o, c + d * 1e8, w) < base


def test_toc_rejects_negative_inputs():
    with pytest.raises(ValueError):
        toc(-1.0, 0.0, 0.0, TocWeights())
    with pytest.raises(ValueError):
        TocWeights(-1.0, 1.0)


def test_slot_report_one_hot():
    assert (SlotReport(CNT, 1, 1, 1, 1).x_cnt, SlotReport(CNT, 1, 1, 1, 1).x_dst) == (1, 0)
    assert (SlotReport(DST, 1, 1, 1, 1).x_cnt, SlotReport(DST, 1, 1, 1, 1).x_dst) == (0, 1)
