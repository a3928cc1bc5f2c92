from qconsensus.cases import (
    EXAMPLE1_GRAPH,
    EXAMPLE1_VALUES,
    RING4_GRAPH,
    RING4_VALUES,
    example1_schedule,
)
from qconsensus.engine import RunConfig, run


def example1_trace(**kw):
    cfg = RunConfig("prob", list(EXAMPLE1_VALUES), schedule=example1_schedule(), **kw)
    return run(EXAMPLE1_GRAPH, cfg)


def example2_trace(**kw):
    return run(RING4_GRAPH, RunConfig("det", list(RING4_VALUES), **kw))


def rows(trace, k):
    s = trace.snapshot_at(k)
    return tuple(zip(s.y, s.z, s.y_s, s.z_s))
