"""Exit criteria.  Each test carries a ``criterion`` mark; the terminal
summary prints one PASS/FAIL line per criterion."""

import json
import random
import time
from pathlib import Path

import pytest

from helpers import example1_trace, example2_trace, rows
from qconsensus.analysis import (
    FULL,
    PARTIAL,
    brute_force_reachability_oracle,
    check_conservation,
    check_token_monotonicity,
    detect_convergence,
    token_count,
)
from qconsensus.cases import EXAMPLE1_GOLDEN, EXAMPLE2_GOLDEN, SEVEN_GRAPH, SEVEN_VALUES
from qconsensus.digraph import Digraph, random_strongly_connected
from qconsensus.engine import RunConfig, random_values, run
from qconsensus.numerics import QuantizedFraction, exact_average, frac_eq

FINDINGS = Path(__file__).resolve().parent.parent / "findings"


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


# -- corpora ------------------------------------------------------------------

@pytest.fixture(scope="session")
def ac3_corpus():
    """1000 runs alternating algorithms on generated graphs, n in 2..10.

    Full-rate traces are kept so every round boundary can be inspected.
    """
    rng = random.Random(20240603)

    def build():
        runs = []
        for i in range(1000):
            algo = ("prob", "det")[i % 2]
            n = rng.randint(2, 10)
            density = rng.choice([0.0, 0.1, 0.2, 0.5])
            seed = rng.randrange(2**31)
            g = random_strongly_connected(n, density, seed)
            values = [rng.randint(-10, 10) for _ in range(n)]
            max_steps = n**5 + n if algo == "det" else 10_000
            runs.append(run(g, RunConfig(algo, values, seed=seed, max_steps=max_steps)))
        return runs

    return timed(build)


@pytest.fixture(scope="session")
def ac5_runs():
    def build():
        cfg = lambda s: RunConfig("prob", list(SEVEN_VALUES), seed=s, max_steps=10_000)  # noqa: E731
        return [run(SEVEN_GRAPH, cfg(s)) for s in range(1, 101)]

    return timed(build)


def _ac6_instances():
    combos = [(n, d) for n in range(3, 9) for d in (0.0, 0.2, 0.5)]
    out = []
    for i in range(200):
        n, d = combos[i % len(combos)]
        seed = 7000 + i
        out.append((n, d, seed, random_strongly_connected(n, d, seed), random_values(n, seed)))
    return out


@pytest.fixture(scope="session")
def ac6_runs():
    def build():
        res = []
        for n, d, seed, g, values in _ac6_instances():
            trace = run(g, RunConfig("det", values, max_steps=n**5 + n))
            res.append(((n, d, seed, g, values), trace))
        return res

    return timed(build)


# -- AC-1 ---------------------------------------------------------------------

@pytest.mark.criterion("AC-1")
def test_ac1_example2_tables_exact():
    trace, elapsed = timed(example2_trace)
    for table in EXAMPLE2_GOLDEN:
        assert rows(trace, table.round) == table.rows, f"table {table.label}"
    assert elapsed < 1.0


@pytest.mark.criterion("AC-1")
def test_ac1_example2_consensus_and_class():
    trace = example2_trace()
    snap = trace.snapshot_at(3)
    assert all(QuantizedFraction(ys, zs).same_representation(QuantizedFraction(12, 2))
               for ys, zs in zip(snap.y_s, snap.z_s))
    assert trace.metrics.convergence_step == 3
    cls = trace.metrics.summation_class
    assert (cls.kind, cls.alpha, cls.period) == (PARTIAL, 2, 2)


# -- AC-2 ---------------------------------------------------------------------

@pytest.mark.criterion("AC-2")
def test_ac2_first_four_tables_exact():
    trace, elapsed = timed(example1_trace)
    for table in EXAMPLE1_GOLDEN[:4]:
        assert rows(trace, table.round) == table.rows, f"table {table.label}"
    assert elapsed < 1.0


@pytest.mark.criterion("AC-2")
def test_ac2_full_merge_at_round_3():
    trace = example1_trace()
    cls = trace.metrics.summation_class
    assert (cls.kind, cls.since) == (FULL, 3)
    assert trace.snapshot_at(3).z[2] == 4


@pytest.mark.criterion("AC-2")
def test_ac2_final_table_at_round_5():
    trace = example1_trace()
    assert rows(trace, 5) == EXAMPLE1_GOLDEN[4].rows


@pytest.mark.criterion("AC-2")
def test_ac2_all_at_17_over_4_at_round_5():
    trace = example1_trace()
    snap = trace.snapshot_at(5)
    assert all(QuantizedFraction(ys, zs) == QuantizedFraction(17, 4)
               for ys, zs in zip(snap.y_s, snap.z_s))


# -- AC-3 / AC-4 --------------------------------------------------------------

@pytest.mark.criterion("AC-3")
def test_ac3_conservation(ac3_corpus):
    traces, elapsed = ac3_corpus
    assert len(traces) == 1000
    assert {t.algorithm for t in traces} == {"prob", "det"}
    for t in traces:
        assert check_conservation(t) == []
        assert all(sum(s.z) == t.n for s in t.snapshots)
    assert elapsed < 30.0


@pytest.mark.criterion("AC-4")
def test_ac4_token_count_monotone(ac3_corpus):
    traces, _ = ac3_corpus
    for t in traces:
        assert check_token_monotonicity(t) == [], (t.algorithm, t.initial_values)
        counts = [token_count(s) for s in t.snapshots]
        assert all(1 <= b <= a for a, b in zip(counts, counts[1:]))


# -- AC-5 ---------------------------------------------------------------------

@pytest.mark.criterion("AC-5")
def test_ac5_prob_converges_on_seven_node_graph(ac5_runs):
    traces, elapsed = ac5_runs
    q = QuantizedFraction(34, 7)
    steps = [detect_convergence(t, q, SEVEN_GRAPH.n) for t in traces]
    failures = [s for s in steps if s is None or s > 10_000]
    assert len(traces) == 100 and failures == []
    assert elapsed < 60.0


# -- AC-6 ---------------------------------------------------------------------

@pytest.mark.criterion("AC-6")
def test_ac6_det_within_n5(ac6_runs):
    results, elapsed = ac6_runs
    assert len(results) == 200
    counter = []
    for (n, d, seed, g, values), trace in results:
        k0 = trace.metrics.convergence_step
        if k0 is None or k0 > n**5:
            counter.append({
                "n": n, "density": d, "seed": seed, "values": values,
                "arcs": g.arcs(), "convergence_step": k0,
                "class": str(trace.metrics.summation_class),
            })
    if counter:
        FINDINGS.mkdir(exist_ok=True)
        (FINDINGS / "n5_bound_counterexamples.json").write_text(json.dumps(counter, indent=1))
    assert counter == []
    assert elapsed < 120.0


# -- AC-7 ---------------------------------------------------------------------

@pytest.mark.criterion("AC-7")
def test_ac7_merge_reachable_on_small_instances():
    instances = [(g, v) for n, _, _, g, v in _ac6_instances() if n <= 4]
    instances.append((Digraph.from_arcs(2, [(1, 2), (2, 1)]), [1, 3]))
    t0 = time.perf_counter()
    verdicts = [brute_force_reachability_oracle(g, v, 12) for g, v in instances]
    assert len(instances) > 1 and all(verdicts)
    assert time.perf_counter() - t0 < 60.0


# -- AC-8 ---------------------------------------------------------------------

@pytest.mark.criterion("AC-8")
def test_ac8_final_estimates_equal_average(ac3_corpus, ac5_runs, ac6_runs):
    traces = ac3_corpus[0] + ac5_runs[0] + [t for _, t in ac6_runs[0]] + [example2_trace()]
    checked = partial_below_n = 0
    for t in traces:
        if not t.metrics.converged:
            continue
        q = exact_average(t.initial_values)
        final = t.snapshots[-1]
        for ys, zs in zip(final.y_s, final.z_s):
            assert frac_eq(QuantizedFraction(ys, zs), q)
        checked += 1
        if t.metrics.summation_class.kind == PARTIAL and max(final.z_s) < t.n:
            partial_below_n += 1
    assert checked > 1000
    assert partial_below_n >= 1
