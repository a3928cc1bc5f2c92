"""Observer-side checks over run traces.

Everything here reads snapshots and never touches protocol code, so a bug
in the engine shows up as a violation instead of being reproduced.  A
snapshot is anything with ``round``, ``y``, ``z``, ``y_s``, ``z_s`` (tuples
indexed by node - 1) and ``cursor`` (tuple or ``None``); a trace is anything
with ``algorithm``, ``initial_values`` and ``snapshots``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

from .digraph import Digraph
from .numerics import QuantizedFraction, exact_average

FULL = "full"
PARTIAL = "partial"
UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class SummationClass:
    kind: str
    alpha: int | None = None
    period: int | None = None
    since: int | None = None  # round where the full merge or the cycle starts
    alpha_varies: bool = False

    def __str__(self) -> str:
        if self.kind == PARTIAL:
            return f"partial(alpha={self.alpha}, T={self.period})"
        return self.kind


@dataclass(frozen=True)
class Violation:
    round: int
    quantity: str
    expected: object
    actual: object

    def __str__(self) -> str:
        return f"round {self.round}: {self.quantity} expected {self.expected}, got {self.actual}"


@dataclass
class MetricsRecord:
    convergence_step: int | None
    token_count_series: list[int]
    summation_class: SummationClass
    violations: list[Violation] = field(default_factory=list)
    rounds: int = 0
    final_q_s: list[QuantizedFraction] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.convergence_step is not None

    def as_dict(self) -> dict[str, str]:
        cls = self.summation_class
        return {
            "converged": str(self.converged).lower(),
            "convergence_step": "" if self.convergence_step is None else str(self.convergence_step),
            "rounds": str(self.rounds),
            "summation_class": cls.kind,
            "alpha": "" if cls.alpha is None else str(cls.alpha),
            "period": "" if cls.period is None else str(cls.period),
            "alpha_varies": str(cls.alpha_varies).lower(),
            "violations": str(len(self.violations)),
            "final_q_s": ";".join(str(q) for q in self.final_q_s),
            "token_counts": ";".join(str(c) for c in self.token_count_series),
        }

    def to_kv(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.as_dict().items())


def token_count(snapshot) -> int:
    return sum(1 for z in snapshot.z if z > 0)


def _at_target(snapshot, q: QuantizedFraction) -> bool:
    return all(ys * q.den == q.num * zs for ys, zs in zip(snapshot.y_s, snapshot.z_s))


def check_conservation(trace) -> list[Violation]:
    """Total value mass and total counter mass at every round boundary."""
    S = sum(trace.initial_values)
    n = len(trace.initial_values)
    out = []
    for snap in trace.snapshots:
        if sum(snap.y) != S:
            out.append(Violation(snap.round, "sum(y)", S, sum(snap.y)))
        if sum(snap.z) != n:
            out.append(Violation(snap.round, "sum(z)", n, sum(snap.z)))
    return out


def check_token_monotonicity(trace) -> list[Violation]:
    """Token count must never grow and never reach zero."""
    out = []
    prev = None
    for snap in trace.snapshots:
        c = token_count(snap)
        if c < 1:
            out.append(Violation(snap.round, "token_count", ">= 1", c))
        if prev is not None and c > prev:
            out.append(Violation(snap.round, "token_count", f"<= {prev}", c))
        prev = c
    return out


def check_state_monotonicity(trace) -> list[Violation]:
    """``z_s`` never decreases; under ``det`` neither does ``y_s`` at fixed ``z_s``."""
    out = []
    snaps = trace.snapshots
    for a, b in zip(snaps, snaps[1:]):
        for j, (za, zb) in enumerate(zip(a.z_s, b.z_s), start=1):
            if zb < za:
                out.append(Violation(b.round, f"z_s[{j}]", f">= {za}", zb))
            elif trace.algorithm == "det" and zb == za and b.y_s[j - 1] < a.y_s[j - 1]:
                out.append(Violation(b.round, f"y_s[{j}]", f">= {a.y_s[j - 1]}", b.y_s[j - 1]))
    return out


def check_mass_sanity(trace) -> list[Violation]:
    out = []
    for snap in trace.snapshots:
        for j, (y, z, zs) in enumerate(zip(snap.y, snap.z, snap.z_s), start=1):
            if z < 0:
                out.append(Violation(snap.round, f"z[{j}]", ">= 0", z))
            if z == 0 and y != 0:
                out.append(Violation(snap.round, f"y[{j}]", 0, y))
            if zs < 1:
                out.append(Violation(snap.round, f"z_s[{j}]", ">= 1", zs))
    return out


def detect_convergence(trace, q: QuantizedFraction, window: int) -> int | None:
    """Smallest round ``k0`` whose next ``window`` observed rounds are all at ``q``.

    The window must be fully observed: a run of fewer than ``window``
    qualifying snapshots at the end of the trace does not count.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    streak_start = None
    streak = 0
    for snap in trace.snapshots:
        if _at_target(snap, q):
            if streak == 0:
                streak_start = snap.round
            streak += 1
            if streak >= window:
                return streak_start
        else:
            streak = 0
    return None


def stable_after(trace, q: QuantizedFraction, k0: int) -> bool:
    """Every snapshot from ``k0`` to the end of the trace is at ``q``."""
    return all(_at_target(s, q) for s in trace.snapshots if s.round >= k0)


def _configuration(snap) -> tuple:
    return (snap.y, snap.z, snap.y_s, snap.z_s, snap.cursor)


def _held_pairs(snap) -> set[tuple[int, int]]:
    return {(y, z) for y, z in zip(snap.y, snap.z) if z > 0}


def classify_summation(trace) -> SummationClass:
    """Full merge, periodic partial summation, or undetermined.

    Periodicity is only diagnosed for ``det`` traces, where a repeated
    configuration (masses, estimates, round-robin cursors) implies the run
    repeats forever.  Requires a full-rate trace.
    """
    n = len(trace.initial_values)
    snaps = trace.snapshots
    for snap in snaps:
        if n in snap.z:
            return SummationClass(FULL, alpha=1, since=snap.round)
    if trace.algorithm != "det":
        return SummationClass(UNDETERMINED)
    seen: dict[tuple, int] = {}
    for idx, snap in enumerate(snaps):
        key = _configuration(snap)
        if key in seen:
            start = seen[key]
            cycle = snaps[start:idx]
            if any(len(_held_pairs(s)) != 1 for s in cycle):
                return SummationClass(UNDETERMINED, since=snaps[start].round)
            counts = {token_count(s) for s in cycle}
            return SummationClass(
                PARTIAL,
                alpha=token_count(snaps[start]),
                period=snap.round - snaps[start].round,
                since=snaps[start].round,
                alpha_varies=len(counts) > 1,
            )
        seen[key] = idx
    return SummationClass(UNDETERMINED)


def compute_metrics(trace, window: int) -> MetricsRecord:
    q = exact_average(trace.initial_values)
    snaps = trace.snapshots
    violations = (
        check_conservation(trace)
        + check_token_monotonicity(trace)
        + check_state_monotonicity(trace)
        + check_mass_sanity(trace)
    )
    last = snaps[-1] if snaps else None
    return MetricsRecord(
        convergence_step=detect_convergence(trace, q, window),
        token_count_series=[token_count(s) for s in snaps],
        summation_class=classify_summation(trace),
        violations=violations,
        rounds=last.round if last else 0,
        final_q_s=[QuantizedFraction(ys, zs) for ys, zs in zip(last.y_s, last.z_s)] if last else [],
    )


class ConvergenceMonitor:
    """Online stop signal for the engine.

    ``prob`` runs stop once every estimate has sat at ``q`` for ``window``
    consecutive rounds.  ``det`` runs additionally wait for either a full
    merge (afterwards the only token is ``(S, n)``, so no estimate can leave
    ``q``) or a repeated configuration, after which the estimates can no
    longer change; if they are not at ``q`` by then the run can never
    converge and stops too.
    """

    def __init__(self, q: QuantizedFraction, window: int, algorithm: str):
        self.q = q
        self.window = window
        self.algorithm = algorithm
        self.streak = 0
        self.cycle_found = False
        self.merged = False
        self._seen: set[tuple] = set()

    def observe(self, snap) -> bool:
        at_q = _at_target(snap, self.q)
        self.streak = self.streak + 1 if at_q else 0
        if self.algorithm != "det":
            return self.streak >= self.window
        self.merged = self.merged or len(snap.z) in snap.z
        if self.merged:
            return self.streak >= self.window
        if not self.cycle_found:
            key = _configuration(snap)
            if key in self._seen:
                self.cycle_found = True
                self._seen.clear()
            else:
                self._seen.add(key)
        if not self.cycle_found:
            return False
        return self.streak >= self.window or not at_q


class OracleBudgetError(RuntimeError):
    pass


def brute_force_reachability_oracle(
    g: Digraph,
    initial_values: Sequence[int],
    max_depth: int,
    max_states: int = 500_000,
) -> bool:
    """Can some sequence of randomized-protocol choices merge all mass in one node?

    Breadth-first search over joint configurations, where each node holding
    mass independently keeps it or pushes it to one out-neighbor.  Works on
    the adjacency lists directly, not through the protocol module.
    """
    n = g.n
    if n > 4:
        raise ValueError(f"oracle limited to n <= 4, got {n}")
    if not 0 <= max_depth <= 12:
        raise ValueError(f"oracle limited to depth 0..12, got {max_depth}")
    if len(initial_values) != n:
        raise ValueError("need one initial value per node")

    start = tuple((y, 1) for y in initial_values)
    if any(z == n for _, z in start):
        return True
    visited = {start}
    frontier = deque([start])
    for _ in range(max_depth):
        nxt: deque = deque()
        while frontier:
            cfg = frontier.popleft()
            options = [
                (j,) + g.out_adj[j - 1] if cfg[j - 1][1] > 0 else (j,)
                for j in range(1, n + 1)
            ]
            for choice in product(*options):
                y = [0] * n
                z = [0] * n
                for j, dest in enumerate(choice, start=1):
                    yj, zj = cfg[j - 1]
                    y[dest - 1] += yj
                    z[dest - 1] += zj
                if n in z:
                    return True
                new = tuple(zip(y, z))
                if new not in visited:
                    visited.add(new)
                    if len(visited) > max_states:
                        raise OracleBudgetError(f"explored more than {max_states} states")
                    nxt.append(new)
        frontier = nxt
    return False
