"""Sweep the event-triggered protocol over generated digraphs and compare
convergence steps with n**5.  Also reports how runs split between full and
partial mass summation."""

import argparse
from collections import Counter, defaultdict

from qconsensus.digraph import random_strongly_connected
from qconsensus.engine import RunConfig, random_values, run


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-min", type=int, default=3)
    ap.add_argument("--n-max", type=int, default=8)
    ap.add_argument("--densities", default="0,0.2,0.5")
    ap.add_argument("--per-cell", type=int, default=20, help="instances per (n, density)")
    ap.add_argument("--seed-base", type=int, default=0)
    args = ap.parse_args()

    densities = [float(d) for d in args.densities.split(",")]
    classes = Counter()
    worst = defaultdict(int)
    over = []
    seed = args.seed_base
    for n in range(args.n_min, args.n_max + 1):
        for d in densities:
            for _ in range(args.per_cell):
                g = random_strongly_connected(n, d, seed)
                trace = run(g, RunConfig("det", random_values(n, seed), max_steps=n**5 + n))
                m = trace.metrics
                classes[m.summation_class.kind] += 1
                k0 = m.convergence_step
                if k0 is None or k0 > n**5:
                    over.append((n, d, seed, k0))
                else:
                    worst[n, d] = max(worst[n, d], k0)
                seed += 1

    print("n,density,worst_step,n5,ratio")
    for (n, d), k in sorted(worst.items()):
        print(f"{n},{d},{k},{n**5},{k / n**5:.2e}")
    print(f"classes: {dict(classes)}")
    print(f"over bound or unconverged: {len(over)}")
    for row in over:
        print("  n=%d density=%s seed=%d step=%s" % row)


if __name__ == "__main__":
    main()
