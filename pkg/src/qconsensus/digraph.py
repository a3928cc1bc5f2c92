"""Static directed communication graphs.

Nodes are numbered ``1..n``.  Internally an edge is stored as the pair
``(receiver, sender)``, i.e. ``(j, i)`` means node ``j`` can receive from
node ``i``.  The text format reads the other way round, ``sender ->
receiver``, because that is how arrows are usually drawn::

    # directed 4-ring
    nodes 4
    1 -> 2
    2 -> 3
    3 -> 4
    4 -> 1

The order in which a sender's edges appear fixes the order of its
out-neighbor list, and that order is the default round-robin priority.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence


class DigraphError(ValueError):
    """Invalid graph structure or malformed edge-list text."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Digraph:
    n: int
    out_adj: tuple[tuple[int, ...], ...]  # out_adj[j - 1] = out-neighbors of j
    in_adj: tuple[tuple[int, ...], ...]   # sorted ascending

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable[tuple[int, int]]) -> Digraph:
        """Build from ``(sender, receiver)`` pairs, keeping their order."""
        if n < 2:
            raise DigraphError(f"need at least 2 nodes, got {n}")
        out: list[list[int]] = [[] for _ in range(n)]
        seen: set[tuple[int, int]] = set()
        for src, dst in arcs:
            _check_arc(n, src, dst, seen)
            out[src - 1].append(dst)
        inn: list[list[int]] = [[] for _ in range(n)]
        for src in range(1, n + 1):
            for dst in out[src - 1]:
                inn[dst - 1].append(src)
        return cls(
            n=n,
            out_adj=tuple(tuple(x) for x in out),
            in_adj=tuple(tuple(sorted(x)) for x in inn),
        )

    @property
    def nodes(self) -> range:
        return range(1, self.n + 1)

    @property
    def edges(self) -> frozenset[tuple[int, int]]:
        """All edges as ``(receiver, sender)`` pairs."""
        return frozenset(
            (dst, src) for src in self.nodes for dst in self.out_adj[src - 1]
        )

    def arcs(self) -> list[tuple[int, int]]:
        """``(sender, receiver)`` pairs in canonical (sender, list) order."""
        return [(src, dst) for src in self.nodes for dst in self.out_adj[src - 1]]

    def out_neighbors(self, j: int) -> tuple[int, ...]:
        return self.out_adj[j - 1]

    def in_neighbors(self, j: int) -> tuple[int, ...]:
        return self.in_adj[j - 1]

    def out_degree(self, j: int) -> int:
        return len(self.out_adj[j - 1])

    def in_degree(self, j: int) -> int:
        return len(self.in_adj[j - 1])

    def reversed(self) -> Digraph:
        return Digraph.from_arcs(self.n, [(dst, src) for src, dst in self.arcs()])


def _check_arc(n: int, src: int, dst: int, seen: set, line: int | None = None) -> None:
    if not (1 <= src <= n and 1 <= dst <= n):
        raise DigraphError(f"edge {src} -> {dst} has an endpoint outside 1..{n}", line)
    if src == dst:
        raise DigraphError(f"self-edge {src} -> {dst} is not allowed", line)
    if (src, dst) in seen:
        raise DigraphError(f"duplicate edge {src} -> {dst}", line)
    seen.add((src, dst))


def parse_edge_list(text: str) -> Digraph:
    """Parse the ``nodes N`` / ``a -> b`` edge-list format.

    Blank lines and lines starting with ``#`` are ignored.  Every error
    carries the 1-based line number it was found on.
    """
    n: int | None = None
    arcs: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if n is None:
            parts = line.split()
            if len(parts) != 2 or parts[0] != "nodes":
                raise DigraphError(f"expected header 'nodes N', got {line!r}", lineno)
            try:
                n = int(parts[1])
            except ValueError:
                raise DigraphError(f"bad node count {parts[1]!r}", lineno) from None
            if n < 2:
                raise DigraphError(f"need at least 2 nodes, got {n}", lineno)
            continue
        src_text, arrow, dst_text = line.partition("->")
        if not arrow:
            raise DigraphError(f"expected 'a -> b', got {line!r}", lineno)
        try:
            src, dst = int(src_text), int(dst_text)
        except ValueError:
            raise DigraphError(f"expected 'a -> b', got {line!r}", lineno) from None
        _check_arc(n, src, dst, seen, lineno)
        arcs.append((src, dst))
    if n is None:
        raise DigraphError("missing 'nodes N' header")
    return Digraph.from_arcs(n, arcs)


def serialize_edge_list(g: Digraph) -> str:
    lines = [f"nodes {g.n}"]
    lines.extend(f"{src} -> {dst}" for src, dst in g.arcs())
    return "\n".join(lines) + "\n"


def load_edge_list(path) -> Digraph:
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh.read())


def _reachable(adj: Sequence[Sequence[int]], root: int) -> set[int]:
    seen = {root}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in adj[u - 1]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def is_strongly_connected(g: Digraph) -> bool:
    """Forward and backward reachability from node 1 both cover all nodes."""
    return (
        len(_reachable(g.out_adj, 1)) == g.n
        and len(_reachable(g.in_adj, 1)) == g.n
    )


def random_strongly_connected(n: int, density: float, seed: int) -> Digraph:
    """Random digraph built on a Hamiltonian cycle backbone.

    A seeded permutation fixes the cycle ``p0 -> p1 -> ... -> p0``; every
    other ordered pair (in lexicographic order) is then added independently
    with probability ``density``.  Cycle edges come first in each node's
    out-neighbor list.
    """
    if n < 2:
        raise ValueError(f"need at least 2 nodes, got {n}")
    if not 0.0 <= density <= 1.0:
        raise ValueError(f"density must lie in [0, 1], got {density}")
    rng = random.Random(seed)
    perm = list(range(1, n + 1))
    rng.shuffle(perm)
    cycle = [(perm[i], perm[(i + 1) % n]) for i in range(n)]
    present = set(cycle)
    extra = []
    for src in range(1, n + 1):
        for dst in range(1, n + 1):
            if src == dst or (src, dst) in present:
                continue
            if rng.random() < density:
                extra.append((src, dst))
    return Digraph.from_arcs(n, cycle + extra)
