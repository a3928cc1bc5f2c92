"""Per-node state machines for the two mass-transfer protocols.

``prob`` is the randomized protocol: each round a node holding mass either
keeps it or pushes all of it to one out-neighbor chosen at random, then sums
whatever arrives and adopts the result as its estimate if the counter mass
did not shrink.

``det`` is the event-triggered protocol: a node sums what arrives, and only
if the summed mass "beats" its current estimate (larger counter, or equal
counter and value not smaller) does it adopt it and forward the whole mass
to the next out-neighbor in round-robin order.

Both keep two pairs per node: the mass ``(y, z)`` that moves, and the state
``(y_s, z_s)`` that is the node's estimate ``q_s = y_s / z_s``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .digraph import Digraph
from .numerics import QuantizedFraction


@dataclass(frozen=True)
class MassMessage:
    y: int
    z: int
    dest: int
    src: int


@dataclass
class ProbRouting:
    """Transmission probabilities of one node.

    ``targets[0]`` is the node itself (keep); the rest are out-neighbors in
    adjacency order.  ``probs`` are exact fractions aligned with ``targets``.
    """

    targets: tuple[int, ...]
    probs: tuple[Fraction, ...]
    cumulative: tuple[float, ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if len(self.targets) != len(self.probs):
            raise ValueError("targets and probs must have the same length")
        for p in self.probs:
            if not 0 < p < 1:
                raise ValueError(f"every probability must lie in (0, 1), got {p}")
        if sum(self.probs) != 1:
            raise ValueError(f"probabilities sum to {sum(self.probs)}, not 1")
        acc = Fraction(0)
        cum = []
        for p in self.probs:
            acc += p
            cum.append(float(acc))
        cum[-1] = 1.0
        self.cumulative = tuple(cum)

    @property
    def self_prob(self) -> Fraction:
        return self.probs[0]

    @classmethod
    def uniform(cls, node: int, out_neighbors: Sequence[int]) -> ProbRouting:
        p = Fraction(1, 1 + len(out_neighbors))
        return cls((node, *out_neighbors), (p,) * (1 + len(out_neighbors)))

    @classmethod
    def from_weights(
        cls, node: int, out_neighbors: Sequence[int], weights: Mapping[int, Fraction]
    ) -> ProbRouting:
        """Explicit ``b_lj`` per target; ``weights[node]`` is the keep weight."""
        targets = (node, *out_neighbors)
        if set(weights) != set(targets):
            raise ValueError(
                f"node {node}: weights must cover exactly {sorted(targets)}, "
                f"got {sorted(weights)}"
            )
        return cls(targets, tuple(Fraction(weights[t]) for t in targets))


@dataclass
class RoundRobinRouting:
    order: tuple[int, ...]  # out-neighbors sorted by priority P_lj
    cursor: int = 0

    @property
    def priority(self) -> dict[int, int]:
        return {v: i for i, v in enumerate(self.order)}

    @classmethod
    def from_priority(cls, out_neighbors: Sequence[int], priority: Mapping[int, int] | None = None):
        if priority is None:
            return cls(tuple(out_neighbors))
        if set(priority) != set(out_neighbors):
            raise ValueError("priority must assign every out-neighbor exactly once")
        if sorted(priority.values()) != list(range(len(out_neighbors))):
            raise ValueError("priorities must be a bijection onto 0..D-1")
        return cls(tuple(sorted(out_neighbors, key=priority.__getitem__)))

    def next_target(self) -> int:
        target = self.order[self.cursor]
        self.cursor = (self.cursor + 1) % len(self.order)
        return target


@dataclass
class NodeState:
    node: int
    y: int
    z: int
    y_s: int
    z_s: int
    routing: Union[ProbRouting, RoundRobinRouting]

    @property
    def q_s(self) -> QuantizedFraction:
        return QuantizedFraction(self.y_s, self.z_s)

    @property
    def cursor(self) -> int | None:
        if isinstance(self.routing, RoundRobinRouting):
            return self.routing.cursor
        return None


# -- randomized protocol ------------------------------------------------------

def init_prob(node: int, y0: int, g: Digraph, weights: Mapping[int, Fraction] | None = None) -> NodeState:
    outs = g.out_neighbors(node)
    if weights is None:
        routing = ProbRouting.uniform(node, outs)
    else:
        routing = ProbRouting.from_weights(node, outs, weights)
    return NodeState(node=node, y=y0, z=1, y_s=y0, z_s=1, routing=routing)


def prob_choose_target(state: NodeState, draw: float) -> int | None:
    """Map a uniform draw in ``[0, 1)`` to an out-neighbor, or ``None`` to keep.

    The unit interval is split into consecutive half-open buckets: the keep
    bucket first, then one per out-neighbor in adjacency order.  A node with
    no counter mass always keeps.
    """
    if state.z == 0:
        return None
    routing = state.routing
    for target, upper in zip(routing.targets, routing.cumulative):
        if draw < upper:
            return None if target == state.node else target
    target = routing.targets[-1]
    return None if target == state.node else target


def emit_and_clear(state: NodeState, target: int) -> MassMessage:
    if state.z == 0:
        raise ValueError(f"node {state.node} has no mass to transmit")
    msg = MassMessage(y=state.y, z=state.z, dest=target, src=state.node)
    state.y = 0
    state.z = 0
    return msg


def receive_and_sum(state: NodeState, inbox: Iterable[MassMessage]) -> None:
    for msg in inbox:
        if msg.dest != state.node:
            raise ValueError(f"message for node {msg.dest} delivered to node {state.node}")
        state.y += msg.y
        state.z += msg.z


def prob_update_state(state: NodeState) -> bool:
    if state.z >= state.z_s:
        state.y_s = state.y
        state.z_s = state.z
        return True
    return False


# -- event-triggered protocol -------------------------------------------------

def init_det(
    node: int, y0: int, g: Digraph, priority: Mapping[int, int] | None = None
) -> tuple[NodeState, MassMessage]:
    """Initialize and perform the unconditional first transmission."""
    routing = RoundRobinRouting.from_priority(g.out_neighbors(node), priority)
    state = NodeState(node=node, y=y0, z=1, y_s=y0, z_s=1, routing=routing)
    return state, emit_and_clear(state, routing.next_target())


def det_event_conditions(state: NodeState) -> bool:
    return state.z > state.z_s or (state.z == state.z_s and state.y >= state.y_s)


def det_commit(state: NodeState) -> bool:
    """Adopt the held mass as the estimate if the event conditions hold."""
    if det_event_conditions(state):
        state.y_s = state.y
        state.z_s = state.z
        return True
    return False


def det_emit(state: NodeState) -> MassMessage:
    return emit_and_clear(state, state.routing.next_target())


def det_step(state: NodeState) -> MassMessage | None:
    if det_commit(state):
        return det_emit(state)
    return None
