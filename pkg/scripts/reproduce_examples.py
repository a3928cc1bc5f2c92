"""Replay both worked examples and print their mass/state tables.

Exit status is 0 when every golden table matches, 3 otherwise.
"""

import sys

from qconsensus.cli import EXIT_GOLDEN_MISMATCH, EXIT_OK, first_mismatch, format_table, replay


def main() -> int:
    status = EXIT_OK
    for example in (1, 2):
        trace, golden = replay(example)
        print(f"== example {example} ({trace.algorithm}) ==")
        for table in golden:
            s = trace.snapshot_at(table.round)
            print(format_table(table.label, table.round, tuple(zip(s.y, s.z, s.y_s, s.z_s))))
        m = trace.metrics
        print(f"convergence_step={m.convergence_step} class={m.summation_class}")
        mismatch = first_mismatch(trace, golden)
        if mismatch:
            print(f"MISMATCH: {mismatch}")
            status = EXIT_GOLDEN_MISMATCH
        print()
    return status


if __name__ == "__main__":
    sys.exit(main())
