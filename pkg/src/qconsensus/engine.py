"""Synchronous round-based execution of either protocol.

Round ``k`` snapshots are taken at the round boundary: after the messages
emitted in round ``k - 1`` have been delivered and estimates updated, and
before anything is transmitted in round ``k``.  Messages emitted in round
``k`` are stored with that snapshot and delivered at the start of ``k + 1``.

For ``det`` the round-0 transmission is the unconditional initial send, so
the round-0 snapshot still shows every node holding ``(y_j[0], 1)``.

Randomness: node ``j`` under master seed ``s`` draws from
``numpy.random.PCG64(SeedSequence([s, j]))``; round ``k`` uses the ``k``-th
double of that stream (``Generator.random``).  Every node draws once per
round whether or not the draw is needed, so schedules and trace output
never shift the sequence.
"""

from __future__ import annotations

import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence, Union

import numpy as np

from . import analysis
from .digraph import Digraph, is_strongly_connected, random_strongly_connected
from .numerics import check_value_bounds, exact_average
from .protocol import (
    MassMessage,
    NodeState,
    det_commit,
    det_emit,
    emit_and_clear,
    init_det,
    init_prob,
    prob_choose_target,
    prob_update_state,
    receive_and_sum,
)

logger = logging.getLogger(__name__)

ALGORITHMS = ("prob", "det")
_BLOCK = 256


class ConfigError(ValueError):
    """Invalid run configuration, schedule, or config/graph mismatch."""


# -- randomness ---------------------------------------------------------------

def _generator(seed: int, node: int) -> np.random.Generator:
    if seed < 0:
        raise ValueError(f"seed must be >= 0, got {seed}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, node])))


def rng_draw(seed: int, node: int, round: int) -> float:
    """The uniform draw node ``node`` uses in round ``round`` under ``seed``."""
    if seed < 0:
        raise ValueError(f"seed must be >= 0, got {seed}")
    bitgen = np.random.PCG64(np.random.SeedSequence([seed, node]))
    bitgen.advance(round)
    return float(np.random.Generator(bitgen).random())


class NodeStream:
    """Sequential view of one node's draws, buffered in blocks."""

    def __init__(self, seed: int, node: int):
        self._gen = _generator(seed, node)
        self._buf: list[float] = []
        self._pos = 0

    def next(self) -> float:
        if self._pos == len(self._buf):
            self._buf = self._gen.random(_BLOCK).tolist()
            self._pos = 0
        value = self._buf[self._pos]
        self._pos += 1
        return value


# -- schedules and configs ----------------------------------------------------

KEEP = None


@dataclass
class Schedule:
    """Scripted decisions: ``decisions[(k, j)]`` is a target node or ``KEEP``.

    Any ``(k, j)`` not present is left to the node's own random rule.
    """

    decisions: dict[tuple[int, int], int | None] = field(default_factory=dict)

    def set(self, k: int, j: int, target: int | None) -> None:
        self.decisions[(k, j)] = target

    def has(self, k: int, j: int) -> bool:
        return (k, j) in self.decisions

    def get(self, k: int, j: int) -> int | None:
        return self.decisions[(k, j)]

    @property
    def last_round(self) -> int:
        return max((k for k, _ in self.decisions), default=-1)

    def validate(self, g: Digraph) -> None:
        for (k, j), target in sorted(self.decisions.items()):
            if not 1 <= j <= g.n:
                raise ConfigError(f"schedule round {k}: node {j} not in graph")
            if target is not None and target not in g.out_neighbors(j):
                raise ConfigError(f"schedule round {k}: {target} is not an out-neighbor of {j}")


def parse_schedule(text: str) -> Schedule:
    """Lines ``k j keep`` or ``k j -> l``; ``#`` starts a comment line."""
    sched = Schedule()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.replace("->", " -> ").split()
        try:
            if len(parts) == 3 and parts[2] == "keep":
                target = KEEP
            elif len(parts) == 4 and parts[2] == "->":
                target = int(parts[3])
            else:
                raise ValueError
            k, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise ConfigError(f"line {lineno}: expected 'k j keep' or 'k j -> l', got {line!r}") from None
        if k < 0:
            raise ConfigError(f"line {lineno}: negative round {k}")
        if sched.has(k, j):
            raise ConfigError(f"line {lineno}: duplicate decision for node {j} at round {k}")
        sched.set(k, j, target)
    return sched


def serialize_schedule(sched: Schedule) -> str:
    lines = []
    for (k, j), target in sorted(sched.decisions.items()):
        lines.append(f"{k} {j} keep" if target is None else f"{k} {j} -> {target}")
    return "\n".join(lines) + ("\n" if lines else "")


@dataclass
class RunConfig:
    algorithm: str
    initial_values: list[int]
    max_steps: int = 10_000
    seed: int = 0
    schedule: Schedule | None = None
    snapshot_every: int = 1
    window: int | None = None  # persistence window; defaults to n
    priorities: dict[int, dict[int, int]] | None = None  # det: node -> {out-neighbor: P_lj}
    probabilities: dict[int, dict[int, Fraction]] | None = None  # prob: node -> {target: b_lj}

    def validate(self, g: Digraph | None = None) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be a positive integer")
        if self.snapshot_every < 1:
            raise ConfigError("snapshot_every must be a positive integer")
        if self.window is not None and self.window < 1:
            raise ConfigError("window must be a positive integer")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        if self.algorithm == "det" and self.schedule is not None:
            raise ConfigError("schedules only apply to the prob algorithm")
        try:
            check_value_bounds(self.initial_values)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if g is not None:
            if len(self.initial_values) != g.n:
                raise ConfigError(
                    f"{len(self.initial_values)} initial values for a {g.n}-node graph"
                )
            if self.schedule is not None:
                self.schedule.validate(g)


def parse_run_config(text: str) -> RunConfig:
    """Flat ``key=value`` file.  Keys: algorithm, values, max_steps, seed,
    snapshot_every, window.  ``values`` is a comma-separated integer list."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        raw[key.strip()] = value.strip()
    known = {"algorithm", "values", "max_steps", "seed", "snapshot_every", "window"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "algorithm" not in raw:
        raise ConfigError("config needs an 'algorithm' key")
    try:
        cfg = RunConfig(
            algorithm=raw["algorithm"],
            initial_values=parse_values(raw.get("values", "")),
            max_steps=int(raw.get("max_steps", 10_000)),
            seed=int(raw.get("seed", 0)),
            snapshot_every=int(raw.get("snapshot_every", 1)),
            window=int(raw["window"]) if "window" in raw else None,
        )
    except ValueError as exc:
        raise ConfigError(f"bad config value: {exc}") from None
    return cfg


def parse_values(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    return [int(v) for v in text.split(",")]


# -- traces -------------------------------------------------------------------

@dataclass(frozen=True)
class Snapshot:
    round: int
    y: tuple[int, ...]
    z: tuple[int, ...]
    y_s: tuple[int, ...]
    z_s: tuple[int, ...]
    cursor: tuple[int, ...] | None = None


@dataclass
class RunTrace:
    algorithm: str
    initial_values: list[int]
    snapshots: list[Snapshot]
    messages: list[tuple[MassMessage, ...]]  # messages[i] emitted at snapshots[i].round
    metrics: analysis.MetricsRecord | None = None

    @property
    def n(self) -> int:
        return len(self.initial_values)

    def snapshot_at(self, k: int) -> Snapshot:
        for snap in self.snapshots:
            if snap.round == k:
                return snap
        raise KeyError(f"round {k} not in trace")

    def to_csv(self) -> str:
        lines = ["round,node,y,z,y_s,z_s,q_s"]
        for snap in self.snapshots:
            for j in range(self.n):
                lines.append(
                    f"{snap.round},{j + 1},{snap.y[j]},{snap.z[j]},"
                    f"{snap.y_s[j]},{snap.z_s[j]},{snap.y_s[j]}/{snap.z_s[j]}"
                )
        return "\n".join(lines) + "\n"


def _snapshot(k: int, states: Sequence[NodeState], outgoing: Sequence[MassMessage] = ()) -> Snapshot:
    y = [s.y for s in states]
    z = [s.z for s in states]
    for msg in outgoing:
        y[msg.src - 1] += msg.y
        z[msg.src - 1] += msg.z
    cursor = None
    if states and states[0].cursor is not None:
        cursor = tuple(s.cursor for s in states)
    return Snapshot(
        round=k,
        y=tuple(y),
        z=tuple(z),
        y_s=tuple(s.y_s for s in states),
        z_s=tuple(s.z_s for s in states),
        cursor=cursor,
    )


def _deliver(states: Sequence[NodeState], messages: Sequence[MassMessage]) -> None:
    inboxes: dict[int, list[MassMessage]] = {}
    for msg in sorted(messages, key=lambda m: m.src):
        inboxes.setdefault(msg.dest, []).append(msg)
    for dest, inbox in inboxes.items():
        receive_and_sum(states[dest - 1], inbox)


# -- runs ---------------------------------------------------------------------

def run(g: Digraph, cfg: RunConfig) -> RunTrace:
    if not is_strongly_connected(g):
        raise ConfigError("graph is not strongly connected")
    cfg.validate(g)
    window = cfg.window if cfg.window is not None else g.n
    monitor = analysis.ConvergenceMonitor(exact_average(cfg.initial_values), window, cfg.algorithm)
    snaps: list[Snapshot] = []
    msgs: list[tuple[MassMessage, ...]] = []
    # scripted decisions are always played out in full
    min_rounds = cfg.schedule.last_round + 1 if cfg.schedule is not None else 0

    if cfg.algorithm == "prob":
        probs = cfg.probabilities or {}
        states = [init_prob(j, y0, g, probs.get(j)) for j, y0 in zip(g.nodes, cfg.initial_values)]
        streams = [NodeStream(cfg.seed, j) for j in g.nodes]
        sched = cfg.schedule
        snap = _snapshot(0, states)
        stop = monitor.observe(snap)
        snaps.append(snap)
        k = 0
        while k < cfg.max_steps and not (stop and k >= min_rounds):
            emitted = []
            for state, stream in zip(states, streams):
                draw = stream.next()
                if sched is not None and sched.has(k, state.node):
                    target = sched.get(k, state.node) if state.z > 0 else KEEP
                else:
                    target = prob_choose_target(state, draw)
                if target is not None:
                    emitted.append(emit_and_clear(state, target))
            msgs.append(tuple(emitted))
            _deliver(states, emitted)
            for state in states:
                prob_update_state(state)
            k += 1
            snap = _snapshot(k, states)
            stop = monitor.observe(snap)
            snaps.append(snap)
        msgs.append(())
    else:
        prios = cfg.priorities or {}
        states, emitted = [], []
        for j, y0 in zip(g.nodes, cfg.initial_values):
            state, msg = init_det(j, y0, g, prios.get(j))
            states.append(state)
            emitted.append(msg)
        k = 0
        snap = _snapshot(0, states, emitted)
        # cursor in a snapshot is the value before this round's send
        snap = replace(snap, cursor=tuple(0 for _ in states))
        stop = monitor.observe(snap)
        snaps.append(snap)
        msgs.append(tuple(emitted))
        while not stop and k < cfg.max_steps:
            _deliver(states, emitted)
            k += 1
            cursors = tuple(s.cursor for s in states)
            emitted = [det_emit(s) for s in states if det_commit(s)]
            snap = replace(_snapshot(k, states, emitted), cursor=cursors)
            stop = monitor.observe(snap)
            snaps.append(snap)
            msgs.append(tuple(emitted))

    trace = RunTrace(cfg.algorithm, list(cfg.initial_values), snaps, msgs)
    trace.metrics = analysis.compute_metrics(trace, window)
    if cfg.snapshot_every > 1:
        keep = [
            i for i, s in enumerate(snaps)
            if s.round % cfg.snapshot_every == 0 or i == len(snaps) - 1
        ]
        trace.snapshots = [snaps[i] for i in keep]
        trace.messages = [msgs[i] for i in keep]
    return trace


# -- batches ------------------------------------------------------------------

@dataclass(frozen=True)
class GeneratorSpec:
    """Draw a fresh random strongly connected graph per seed."""

    n: int
    density: float = 0.0
    value_range: tuple[int, int] = (-10, 10)


@dataclass
class BatchResult:
    seed: int
    n: int
    metrics: analysis.MetricsRecord | None
    error: str | None = None
    initial_values: list[int] | None = None

    @property
    def converged(self) -> bool:
        return self.metrics is not None and self.metrics.converged


def random_values(n: int, seed: int, value_range: tuple[int, int] = (-10, 10)) -> list[int]:
    rng = random.Random(f"values/{seed}")
    lo, hi = value_range
    return [rng.randint(lo, hi) for _ in range(n)]


def _run_one(source: Union[Digraph, GeneratorSpec], template: RunConfig, seed: int) -> BatchResult:
    n = source.n
    try:
        if isinstance(source, GeneratorSpec):
            g = random_strongly_connected(source.n, source.density, seed)
            values = list(template.initial_values) or random_values(n, seed, source.value_range)
        else:
            g = source
            values = list(template.initial_values)
        cfg = replace(template, seed=seed, initial_values=values)
        trace = run(g, cfg)
    except Exception as exc:  # per-run errors are recorded, the batch continues
        logger.warning("seed %d failed: %s", seed, exc)
        return BatchResult(seed, n, None, error=str(exc))
    return BatchResult(seed, n, trace.metrics, initial_values=values)


def run_batch(
    source: Union[Digraph, GeneratorSpec],
    template: RunConfig,
    seeds: Sequence[int],
    jobs: int = 1,
) -> list[BatchResult]:
    """One independent run per seed; results come back in ``seeds`` order."""
    seeds = list(seeds)
    if not seeds:
        return []
    if jobs <= 1:
        return [_run_one(source, template, s) for s in seeds]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_one, [source] * len(seeds), [template] * len(seeds), seeds))
