"""Command-line front end.

Exit codes: 0 converged (or replay matched), 1 input/usage error,
2 no convergence within ``--max-steps``, 3 replay mismatch.
"""

from __future__ import annotations

import argparse
import statistics
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import cases
from .digraph import Digraph, DigraphError, load_edge_list, random_strongly_connected
from .engine import (
    ConfigError,
    GeneratorSpec,
    RunConfig,
    RunTrace,
    parse_run_config,
    parse_schedule,
    parse_values,
    random_values,
    run,
    run_batch,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NO_CONVERGENCE = 2
EXIT_GOLDEN_MISMATCH = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which would read as "no convergence"
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass
class GraphSource:
    graph: Digraph | None = None
    default_values: tuple[int, ...] | None = None
    # generator source
    n_range: range | None = None
    density: float = 0.0
    gen_seed: int | None = None


def _parse_range(text: str) -> range:
    lo, sep, hi = text.partition("..")
    if not sep:
        v = int(text)
        return range(v, v + 1)
    return range(int(lo), int(hi) + 1)


def _parse_gen(text: str) -> dict[str, str]:
    fields = {}
    for part in text.split(","):
        key, sep, value = part.partition("=")
        if not sep or key.strip() not in {"n", "density", "seed"}:
            raise UsageError(f"bad --gen field {part!r}; expected n=..,density=..,seed=..")
        fields[key.strip()] = value.strip()
    if "n" not in fields:
        raise UsageError("--gen needs n=...")
    return fields


def _graph_source(args) -> GraphSource:
    given = [x for x in (args.graph, args.builtin, args.gen) if x is not None]
    if len(given) != 1:
        raise UsageError("give exactly one of --graph, --builtin, --gen")
    if args.graph is not None:
        return GraphSource(graph=load_edge_list(args.graph))
    if args.builtin is not None:
        try:
            b = cases.BUILTINS[args.builtin]
        except KeyError:
            raise UsageError(f"unknown builtin {args.builtin!r}; choose from {sorted(cases.BUILTINS)}") from None
        return GraphSource(graph=b.graph, default_values=b.values)
    gen = _parse_gen(args.gen)
    density = float(gen.get("density", 0.0))
    gen_seed = int(gen["seed"]) if "seed" in gen else None
    return GraphSource(n_range=_parse_range(gen["n"]), density=density, gen_seed=gen_seed)


def _base_config(args, n: int, default_values) -> RunConfig:
    if args.config is not None:
        cfg = parse_run_config(Path(args.config).read_text())
    else:
        cfg = RunConfig(algorithm=args.algo or "prob", initial_values=[])
    if args.algo is not None:
        cfg.algorithm = args.algo
    if args.values is not None:
        cfg.initial_values = parse_values(args.values)
    elif not cfg.initial_values and default_values is not None:
        cfg.initial_values = list(default_values)
    if args.max_steps is not None:
        cfg.max_steps = args.max_steps
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if args.window is not None:
        cfg.window = args.window
    if getattr(args, "snapshot_every", None) is not None:
        cfg.snapshot_every = args.snapshot_every
    if args.schedule is not None:
        cfg.schedule = parse_schedule(Path(args.schedule).read_text())
    return cfg


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# -- run ----------------------------------------------------------------------

def cmd_run(args) -> int:
    if args.trace_out and args.metrics_out and args.trace_out == args.metrics_out:
        raise UsageError("--trace-out and --metrics-out must differ")
    source = _graph_source(args)
    if source.graph is None:
        if len(source.n_range) != 1:
            raise UsageError("run takes a single n in --gen")
        n = source.n_range[0]
        seed = source.gen_seed if source.gen_seed is not None else 0
        g = random_strongly_connected(n, source.density, seed)
        cfg = _base_config(args, n, None)
        if not cfg.initial_values:
            cfg.initial_values = random_values(n, seed)
    else:
        g = source.graph
        cfg = _base_config(args, g.n, source.default_values)
    trace = run(g, cfg)
    if args.trace_out:
        _write(args.trace_out, trace.to_csv())
    _write(args.metrics_out, trace.metrics.to_kv())
    return EXIT_OK if trace.metrics.converged else EXIT_NO_CONVERGENCE


# -- replay -------------------------------------------------------------------

HEADER = ("y", "z", "y_s", "z_s", "q_s")


def format_table(label: str, k: int, rows: Sequence[tuple[int, int, int, int]]) -> str:
    lines = [
        f"Table {label}: mass and state variables (round {k})",
        "v_j | " + " | ".join(f"{h}[{k}]" for h in HEADER),
    ]
    for j, (y, z, ys, zs) in enumerate(rows, start=1):
        lines.append(f"v{j} | {y} | {z} | {ys} | {zs} | {ys} / {zs}")
    return "\n".join(lines) + "\n"


def _trace_rows(trace: RunTrace, k: int) -> tuple[tuple[int, int, int, int], ...]:
    s = trace.snapshot_at(k)
    return tuple(zip(s.y, s.z, s.y_s, s.z_s))


def replay(example: int) -> tuple[RunTrace, tuple]:
    if example == 1:
        cfg = RunConfig(
            "prob", list(cases.EXAMPLE1_VALUES), schedule=cases.example1_schedule()
        )
        return run(cases.EXAMPLE1_GRAPH, cfg), cases.EXAMPLE1_GOLDEN
    if example == 2:
        cfg = RunConfig("det", list(cases.RING4_VALUES))
        return run(cases.RING4_GRAPH, cfg), cases.EXAMPLE2_GOLDEN
    raise UsageError(f"replay takes 1 or 2, got {example}")


def first_mismatch(trace: RunTrace, golden) -> str | None:
    for table in golden:
        try:
            rows = _trace_rows(trace, table.round)
        except KeyError:
            return f"table {table.label}: round {table.round} missing from trace"
        for j, (got, want) in enumerate(zip(rows, table.rows), start=1):
            for name, g, w in zip(HEADER, got, want):
                if g != w:
                    return f"table {table.label}, v{j}, {name}: expected {w}, got {g}"
    return None


def cmd_replay(args) -> int:
    trace, golden = replay(args.example)
    for table in golden:
        sys.stdout.write(format_table(table.label, table.round, _trace_rows(trace, table.round)))
        sys.stdout.write("\n")
    m = trace.metrics
    sys.stdout.write(f"convergence_step={m.convergence_step} class={m.summation_class}\n")
    mismatch = first_mismatch(trace, golden)
    if mismatch is not None:
        sys.stderr.write(f"golden mismatch: {mismatch}\n")
        return EXIT_GOLDEN_MISMATCH
    return EXIT_OK


# -- batch --------------------------------------------------------------------

BATCH_COLUMNS = ("seed", "n", "convergence_step", "class", "alpha", "period", "within_n5", "error")


def batch_csv(results) -> str:
    lines = [",".join(BATCH_COLUMNS)]
    for r in results:
        if r.metrics is None:
            row = (r.seed, r.n, "", "", "", "", "", r.error.replace(",", ";"))
        else:
            m, cls = r.metrics, r.metrics.summation_class
            step = m.convergence_step
            row = (
                r.seed, r.n, "" if step is None else step, cls.kind,
                "" if cls.alpha is None else cls.alpha,
                "" if cls.period is None else cls.period,
                "" if step is None else str(step <= r.n**5).lower(), "",
            )
        lines.append(",".join(str(x) for x in row))
    return "\n".join(lines) + "\n"


def batch_summary(results) -> str:
    steps = [r.metrics.convergence_step for r in results if r.converged]
    failures = len(results) - len(steps)
    if steps:
        return (
            f"runs={len(results)} min={min(steps)} median={statistics.median(steps)} "
            f"max={max(steps)} failures={failures}\n"
        )
    return f"runs={len(results)} min= median= max= failures={failures}\n"


def cmd_batch(args) -> int:
    seeds = list(_parse_range(args.seeds)) if args.seeds else [args.seed or 0]
    source = _graph_source(args)
    results = []
    if source.graph is None:
        for n in source.n_range:
            cfg = _base_config(args, n, None)
            spec = GeneratorSpec(n=n, density=source.density)
            results.extend(run_batch(spec, cfg, seeds, jobs=args.jobs))
    else:
        cfg = _base_config(args, source.graph.n, source.default_values)
        cfg.validate(source.graph)
        results = run_batch(source.graph, cfg, seeds, jobs=args.jobs)
    _write(args.metrics_out, batch_csv(results))
    sys.stderr.write(batch_summary(results))
    return EXIT_OK if all(r.converged for r in results) else EXIT_NO_CONVERGENCE


# -- entry point --------------------------------------------------------------

def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", help="edge-list file")
    p.add_argument("--builtin", help=f"built-in graph: {', '.join(sorted(cases.BUILTINS))}")
    p.add_argument("--gen", help="generator spec n=N[..M],density=D[,seed=S]")
    p.add_argument("--config", help="key=value run config file")
    p.add_argument("--algo", choices=("prob", "det"))
    p.add_argument("--values", help="comma-separated initial values")
    p.add_argument("--schedule", help="schedule file (prob only)")
    p.add_argument("--max-steps", type=int)
    p.add_argument("--window", type=int, help="convergence persistence window (default n)")
    p.add_argument("--metrics-out", help="metrics output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qconsensus", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_run = sub.add_parser("run", help="run one experiment")
    _add_experiment_flags(p_run)
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--trace-out", help="trace CSV output file")
    p_run.add_argument("--snapshot-every", type=int)
    p_run.set_defaults(func=cmd_run)

    p_replay = sub.add_parser("replay", help="replay a built-in worked example")
    p_replay.add_argument("example", type=int)
    p_replay.set_defaults(func=cmd_replay)

    p_batch = sub.add_parser("batch", help="run one experiment per seed")
    _add_experiment_flags(p_batch)
    p_batch.add_argument("--seed", type=int)
    p_batch.add_argument("--seeds", help="seed range A..B (inclusive)")
    p_batch.add_argument("--jobs", type=int, default=1)
    p_batch.set_defaults(func=cmd_batch)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
    except (ConfigError, DigraphError, ValueError) as exc:
        sys.stderr.write(f"input error: {exc}\n")
    except OSError as exc:
        sys.stderr.write(f"input error: {exc}\n")
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
