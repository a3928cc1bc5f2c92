from dataclasses import replace

import pytest

from helpers import example1_trace, example2_trace
from qconsensus.analysis import (
    FULL,
    PARTIAL,
    UNDETERMINED,
    ConvergenceMonitor,
    OracleBudgetError,
    brute_force_reachability_oracle,
    check_conservation,
    check_state_monotonicity,
    check_token_monotonicity,
    classify_summation,
    detect_convergence,
    stable_after,
    token_count,
)
from qconsensus.cases import RING4_GRAPH, SEVEN_GRAPH, SEVEN_VALUES
from qconsensus.digraph import Digraph, random_strongly_connected
from qconsensus.engine import RunConfig, RunTrace, Schedule, run
from qconsensus.numerics import QuantizedFraction


def test_token_count():
    t1, t2 = example1_trace(), example2_trace()
    assert token_count(t1.snapshot_at(0)) == 4
    assert token_count(t1.snapshot_at(3)) == 1
    assert token_count(t2.snapshot_at(3)) == 2


def test_conservation_clean_on_examples():
    assert check_conservation(example1_trace()) == []
    assert check_conservation(example2_trace()) == []


def test_conservation_reports_injected_fault():
    t = example1_trace()
    bad = t.snapshots[2]
    t.snapshots[2] = replace(bad, y=(bad.y[0] + 1,) + bad.y[1:])
    (v,) = check_conservation(t)
    assert v.round == 2 and v.quantity == "sum(y)" and v.expected == 17 and v.actual == 18


def test_conservation_empty_trace():
    assert check_conservation(RunTrace("prob", [1, 2], [], [])) == []


def test_detect_convergence():
    assert detect_convergence(example1_trace(), QuantizedFraction(17, 4), 4) == 6
    assert detect_convergence(example2_trace(), QuantizedFraction(24, 4), 4) == 3
    # the full window has to be observed
    short = run(RING4_GRAPH, RunConfig("det", [9, 3, 9, 3], max_steps=4))
    assert detect_convergence(short, QuantizedFraction(24, 4), 4) is None
    assert detect_convergence(short, QuantizedFraction(24, 4), 2) == 3


def test_detect_convergence_unconverged():
    t = run(SEVEN_GRAPH, RunConfig("prob", list(SEVEN_VALUES), max_steps=2))
    assert detect_convergence(t, QuantizedFraction(34, 7), 1) is None
    with pytest.raises(ValueError):
        detect_convergence(t, QuantizedFraction(34, 7), 0)


def test_convergence_is_stable_to_trace_end():
    for t in (example1_trace(), example2_trace()):
        k0 = t.metrics.convergence_step
        assert stable_after(t, QuantizedFraction(sum(t.initial_values), t.n), k0)


def test_classify_examples():
    c1 = classify_summation(example1_trace())
    assert (c1.kind, c1.since) == (FULL, 3)
    c2 = classify_summation(example2_trace())
    assert (c2.kind, c2.alpha, c2.period, c2.since) == (PARTIAL, 2, 2, 3)
    assert not c2.alpha_varies


def test_classify_truncated_is_undetermined():
    t = run(RING4_GRAPH, RunConfig("det", [9, 3, 9, 3], max_steps=2))
    assert classify_summation(t).kind == UNDETERMINED


def test_partial_tokens_carry_the_average():
    t = example2_trace()
    cls = classify_summation(t)
    for snap in t.snapshots:
        if snap.round >= cls.since:
            for y, z in zip(snap.y, snap.z):
                if z:
                    assert y * 4 == 24 * z


def _feed(monitor, trace):
    for snap in trace.snapshots:
        if monitor.observe(snap):
            return snap.round
    return None


def test_monitor_stops_det_after_merge_and_window():
    t = run(Digraph.from_arcs(2, [(1, 2), (2, 1)]), RunConfig("det", [1, 3], max_steps=50))
    mon = ConvergenceMonitor(QuantizedFraction(4, 2), 2, "det")
    stop = _feed(mon, t)
    assert mon.merged and not mon.cycle_found
    assert stop == t.snapshots[-1].round


def test_monitor_stops_det_on_partial_cycle():
    t = run(RING4_GRAPH, RunConfig("det", [9, 3, 9, 3], max_steps=100, window=1))
    mon = ConvergenceMonitor(QuantizedFraction(24, 4), 1, "det")
    assert _feed(mon, t) is not None
    assert mon.cycle_found and not mon.merged


def test_monitor_gives_up_on_cycle_away_from_target():
    # a wrong target is never reached, so the cycle ends the run
    t = run(RING4_GRAPH, RunConfig("det", [9, 3, 9, 3], max_steps=100))
    mon = ConvergenceMonitor(QuantizedFraction(5, 1), 4, "det")
    assert _feed(mon, t) is not None and mon.cycle_found


def test_monitor_prob_only_counts_streak():
    t = example1_trace()
    mon = ConvergenceMonitor(QuantizedFraction(17, 4), 4, "prob")
    assert _feed(mon, t) == 9


def test_monotonicity_checks_flag_faults():
    t = example2_trace()
    t.snapshots[3] = replace(t.snapshots[3], z_s=(1, 2, 2, 2))
    assert check_state_monotonicity(t)
    t = example2_trace()
    t.snapshots[4] = replace(t.snapshots[4], z=(1, 1, 1, 1))
    assert check_token_monotonicity(t)


# -- reachability oracle ------------------------------------------------------

TWO_CYCLE = Digraph.from_arcs(2, [(1, 2), (2, 1)])
THREE_CYCLE = Digraph.from_arcs(3, [(1, 2), (2, 3), (3, 1)])


def test_oracle_two_cycle_one_round():
    assert brute_force_reachability_oracle(TWO_CYCLE, [1, 3], 1)
    assert not brute_force_reachability_oracle(TWO_CYCLE, [1, 3], 0)


def test_oracle_depth_zero():
    assert not brute_force_reachability_oracle(THREE_CYCLE, [4, 5, 6], 0)


def test_oracle_ring_needs_exactly_three_rounds():
    # two disjoint merges in round 0 leave tokens two hops apart
    assert not brute_force_reachability_oracle(RING4_GRAPH, [9, 3, 9, 3], 2)
    assert brute_force_reachability_oracle(RING4_GRAPH, [9, 3, 9, 3], 3)
    assert brute_force_reachability_oracle(RING4_GRAPH, [9, 3, 9, 3], 12)


def test_oracle_witness_replays_in_engine():
    sched = Schedule({(0, 1): 2, (0, 2): None, (0, 3): None, (0, 4): None, (1, 2): 3,
                      (1, 3): None, (1, 4): None, (2, 3): 4, (2, 4): None})
    t = run(RING4_GRAPH, RunConfig("prob", [9, 3, 9, 3], schedule=sched))
    assert t.snapshot_at(3).z == (0, 0, 0, 4)


def test_oracle_guards():
    big = random_strongly_connected(5, 0.0, 1)
    with pytest.raises(ValueError):
        brute_force_reachability_oracle(big, [0] * 5, 3)
    with pytest.raises(ValueError):
        brute_force_reachability_oracle(RING4_GRAPH, [0] * 4, 13)
    dense = Digraph.from_arcs(4, [(a, b) for a in range(1, 5) for b in range(1, 5) if a != b])
    with pytest.raises(OracleBudgetError):
        brute_force_reachability_oracle(dense, [1, 2, 3, 4], 1, max_states=3)
