"""Built-in graphs, initial values, the scripted schedule for example 1, and
the golden mass/state tables the replays are checked against."""

from __future__ import annotations

from dataclasses import dataclass

from .digraph import Digraph
from .engine import Schedule


@dataclass(frozen=True)
class Builtin:
    name: str
    graph: Digraph
    values: tuple[int, ...]
    description: str


# four nodes, out-neighbors: 1 -> {2, 3}, 2 -> {4}, 3 -> {1, 2}, 4 -> {3}
EXAMPLE1_GRAPH = Digraph.from_arcs(4, [(1, 2), (1, 3), (2, 4), (3, 1), (3, 2), (4, 3)])
EXAMPLE1_VALUES = (5, 3, 7, 2)

RING4_GRAPH = Digraph.from_arcs(4, [(1, 2), (2, 3), (3, 4), (4, 1)])
RING4_VALUES = (9, 3, 9, 3)

SEVEN_GRAPH = Digraph.from_arcs(
    7,
    [
        (1, 2), (1, 5), (2, 1), (2, 5), (3, 1), (3, 5), (4, 2),
        (4, 5), (5, 6), (5, 7), (6, 3), (7, 4), (7, 6),
    ],
)
SEVEN_VALUES = (5, 4, 8, 3, 5, 2, 7)

BUILTINS = {
    b.name: b
    for b in (
        Builtin("example1", EXAMPLE1_GRAPH, EXAMPLE1_VALUES, "4-node digraph, randomized protocol example"),
        Builtin("ring4", RING4_GRAPH, RING4_VALUES, "directed 4-ring, partial mass summation example"),
        Builtin("seven", SEVEN_GRAPH, SEVEN_VALUES, "7-node comparison digraph"),
    )
}


def example1_schedule() -> Schedule:
    """Transmissions of the scripted randomized run; nodes not listed in a
    round hold no mass in that round."""
    sched = Schedule()
    for k, j, target in [
        (0, 1, 2), (0, 2, None), (0, 3, 1), (0, 4, 3),
        (1, 1, 3), (1, 2, 4), (1, 3, None),
        (2, 4, 3), (2, 3, None),
        (3, 3, 1),
        (4, 1, 2),
        (5, 2, 4),
    ]:
        sched.set(k, j, target)
    return sched


@dataclass(frozen=True)
class GoldenTable:
    label: str
    round: int  # trace round the table is compared with
    rows: tuple[tuple[int, int, int, int], ...]  # (y, z, y_s, z_s) per node


# Tables 1-4 are rounds 0-3.  Table 5 shows the merged mass at node 4 after
# the transmissions made in rounds 3, 4 and 5, which is the round-6 snapshot.
EXAMPLE1_GOLDEN = (
    GoldenTable("I", 0, ((5, 1, 5, 1), (3, 1, 3, 1), (7, 1, 7, 1), (2, 1, 2, 1))),
    GoldenTable("II", 1, ((7, 1, 7, 1), (8, 2, 8, 2), (2, 1, 2, 1), (0, 0, 2, 1))),
    GoldenTable("III", 2, ((0, 0, 7, 1), (0, 0, 8, 2), (9, 2, 9, 2), (8, 2, 8, 2))),
    GoldenTable("IV", 3, ((0, 0, 7, 1), (0, 0, 8, 2), (17, 4, 17, 4), (0, 0, 8, 2))),
    GoldenTable("V", 6, ((0, 0, 17, 4), (0, 0, 17, 4), (0, 0, 17, 4), (17, 4, 17, 4))),
)

EXAMPLE2_GOLDEN = (
    GoldenTable("VI", 0, ((9, 1, 9, 1), (3, 1, 3, 1), (9, 1, 9, 1), (3, 1, 3, 1))),
    GoldenTable("VII", 1, ((3, 1, 9, 1), (9, 1, 9, 1), (3, 1, 9, 1), (9, 1, 9, 1))),
    GoldenTable("VIII", 2, ((12, 2, 12, 2), (0, 0, 9, 1), (12, 2, 12, 2), (0, 0, 9, 1))),
    GoldenTable("IX", 3, ((0, 0, 12, 2), (12, 2, 12, 2), (0, 0, 12, 2), (12, 2, 12, 2))),
)
