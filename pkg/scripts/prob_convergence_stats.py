"""Convergence-time distribution of the randomized protocol on the
seven-node digraph over a range of seeds."""

import argparse
import statistics

from qconsensus.cases import SEVEN_GRAPH, SEVEN_VALUES
from qconsensus.engine import RunConfig, run_batch


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=100, help="run seeds 1..N")
    ap.add_argument("--max-steps", type=int, default=10_000)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--csv", help="write seed,convergence_step rows here")
    args = ap.parse_args()

    cfg = RunConfig("prob", list(SEVEN_VALUES), max_steps=args.max_steps)
    results = run_batch(SEVEN_GRAPH, cfg, range(1, args.seeds + 1), jobs=args.jobs)
    steps = [r.metrics.convergence_step for r in results if r.converged]
    failures = len(results) - len(steps)

    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write("seed,convergence_step\n")
            for r in results:
                step = r.metrics.convergence_step if r.converged else ""
                fh.write(f"{r.seed},{step}\n")

    print(f"runs={len(results)} failures={failures}")
    if steps:
        q = statistics.quantiles(steps, n=10) if len(steps) > 1 else steps
        print(f"min={min(steps)} median={statistics.median(steps)} mean={statistics.fmean(steps):.1f} "
              f"p90={q[-1]} max={max(steps)}")


if __name__ == "__main__":
    main()
