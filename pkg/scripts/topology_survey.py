#!/usr/bin/env python3
"""Survey resilience metrics across generated topologies.

Sweeps chains, grids, even cycles, stars, and seeded random trees,
printing one row per instance with ring structure, UR/SN/IR, and the
closed-form expectation when one is recognized. With --check, small
instances are cross-checked against the brute-force simulation oracles.

    python3 scripts/topology_survey.py
    python3 scripts/topology_survey.py --check --max-n 9 --csv out.csv
"""

import argparse
import csv
import sys

from ring_resilience import (
    analyze_scenario,
    brute_force_sn,
    brute_force_ur,
    generate,
)


def instances(max_tree_seed: int):
    for n in range(2, 9):
        yield f"chain-{n}", generate("chain", nodes=n)
    for rows in range(1, 5):
        for cols in range(rows, 6):
            yield f"grid-{rows}x{cols}", generate("grid", rows=rows, cols=cols)
    for n in (4, 6, 8, 10, 12):
        yield f"cycle-{n}", generate("cycle", nodes=n)
    for n in (3, 4, 5, 6):
        yield f"star-{n}", generate("star", nodes=n)
    for seed in range(max_tree_seed):
        n = 4 + seed % 7
        yield f"tree-{n}-s{seed}", generate("random_tree", nodes=n, seed=seed)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--check", action="store_true", help="brute-force cross-check")
    ap.add_argument("--max-n", type=int, default=10, help="cross-check size cap")
    ap.add_argument("--trees", type=int, default=8, help="random tree instances")
    ap.add_argument("--csv", help="also write rows to this CSV file")
    args = ap.parse_args()

    header = f"{'instance':<14} {'n':>3} {'rings':>5} {'caps':<14} {'UR':>3} {'SN':>3} {'IR':>3}  expectation"
    print(header)
    print("-" * len(header))
    rows = []
    mismatches = 0
    for label, scenario in instances(args.trees):
        a = analyze_scenario(scenario)
        if a.report is None:
            print(f"{label:<14} infeasible")
            continue
        r = a.report
        caps = ",".join(str(k) for k in r.ring_capacities)
        if r.expectation is None:
            note = "-"
        else:
            note = f"{r.expectation.kind} {'ok' if r.expectation_ok else 'MISMATCH'}"
        checked = ""
        if args.check and r.n <= args.max_n:
            sn = brute_force_sn(a.graph, a.schedule, bound=args.max_n)
            ur = brute_force_ur(a.schedule, a.ring_set, bound=args.max_n)
            if (sn, ur) == (r.sn, r.ur):
                checked = " [oracle ok]"
            else:
                checked = f" [ORACLE sn={sn} ur={ur}]"
                mismatches += 1
        print(
            f"{label:<14} {r.n:>3} {r.ring_count:>5} {caps:<14} "
            f"{r.ur:>3} {r.sn:>3} {r.ir:>3}  {note}{checked}"
        )
        rows.append(
            {
                "instance": label,
                "n": r.n,
                "rings": r.ring_count,
                "capacities": caps,
                "ur": r.ur,
                "sn": r.sn,
                "ir": r.ir,
                "expectation": note,
            }
        )
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
        print(f"\nwrote {len(rows)} rows to {args.csv}")
    if mismatches:
        print(f"\n{mismatches} oracle mismatches", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
