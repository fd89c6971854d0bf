#!/usr/bin/env python3
"""Tabulate exact circuit sizes against the classical baselines.

Writes one CSV per sparsity regime and prints the crossover points: the
smallest agent count at which the circuit undercuts each baseline, for a
few layer budgets.

Usage:
    python3 scripts/complexity_report.py --out results/complexity
"""

import argparse
from pathlib import Path

from csgp.analysis import S_MODES, complexity_table, write_complexity_csv
from csgp.qaoa import gate_count


def crossover(p: int, baseline, n_hi: int = 64) -> int | None:
    """First n (with sparse coupling) whose circuit beats the baseline for good."""
    best = None
    for n in range(2, n_hi + 1):
        if gate_count(n, p, (1 << n) - 1) < baseline(n):
            if best is None:
                best = n
        else:
            best = None
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="results/complexity", help="output directory")
    parser.add_argument("--n-max", type=int, default=64)
    parser.add_argument("--p", default="1,10,25,50", help="comma-separated layer counts")
    args = parser.parse_args()

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    ps = [int(part) for part in args.p.split(",")]

    for mode in S_MODES:
        rows = complexity_table(range(2, args.n_max + 1), ps, s_mode=mode)
        path = out_dir / f"gate_costs_{mode}.csv"
        with open(path, "w", encoding="utf-8") as fh:
            write_complexity_csv(rows, fh)
        print(f"wrote {path} ({len(rows)} rows)")

    print("\ncrossovers at sparse coupling (s = 2^n - 1):")
    print(f"{'p':>4}  {'beats 3^n from n':>18}  {'beats n^n from n':>18}")
    for p in ps:
        against_exhaustive = crossover(p, lambda n: 3**n, args.n_max)
        against_walk = crossover(p, lambda n: n**n, args.n_max)
        print(f"{p:>4}  {str(against_exhaustive):>18}  {str(against_walk):>18}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
