#!/usr/bin/env python3
"""Sweep the variational solver over small generated games.

For each value distribution, generate one game, scan layer depths until
the sampled optimum matches the exhaustive QUBO reference, and report the
depth needed plus agreement with the dynamic-programming optimum.

Usage:
    python3 scripts/qaoa_small_sweep.py --agents 2 --p-max 5 --out results/qaoa_n2.json
"""

import argparse
import json
from pathlib import Path

from csgp.game import DISTRIBUTION_KINDS, DistributionSpec, cs_value, generate_game
from csgp.qaoa import scan_layers
from csgp.solvers import solve_dp, solve_qubo_exhaustive
from csgp.transform import build_bilp, build_qubo, decode_solution, qubo_to_ising


def sweep_one(kind: str, n: int, seed: int, p_max: int, shots: int) -> dict:
    game = generate_game(n, DistributionSpec(kind=kind), seed)
    bilp = build_bilp(game)
    qubo = build_qubo(bilp)
    ising = qubo_to_ising(qubo)
    reference = solve_qubo_exhaustive(bilp, qubo)
    results, chosen = scan_layers(
        ising,
        p_max=p_max,
        shots=shots,
        seed=seed,
        target_energy=reference.metadata["best_energy"],
    )
    winner = min(
        results, key=lambda r: (r.metadata["best_sampled_qubo_energy"], r.best_params.p)
    )
    decoded = decode_solution(bilp, winner.best_bitstring)
    dp = solve_dp(game)
    value = cs_value(game, decoded.cs) if decoded.feasible else None
    return {
        "dist": kind,
        "n": n,
        "seed": seed,
        "chosen_p": chosen,
        "winner_p": winner.best_params.p,
        "expectation": winner.expectation,
        "best_bitstring": winner.best_bitstring,
        "feasible": decoded.feasible,
        "value": value,
        "dp_value": dp.best_value,
        "matches_dp": decoded.feasible and abs(value - dp.best_value) <= 1e-9 * max(1.0, abs(dp.best_value)),
        "expectation_by_p": [r.expectation for r in results],
    }


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--agents", type=int, default=2)
    parser.add_argument("--p-max", type=int, default=5)
    parser.add_argument("--shots", type=int, default=1024)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--dists", default="all", help="'all' or comma-separated names")
    parser.add_argument("--out", default=None, help="JSON output path (default stdout)")
    args = parser.parse_args()

    kinds = DISTRIBUTION_KINDS if args.dists == "all" else args.dists.split(",")
    rows = []
    for kind in kinds:
        row = sweep_one(kind, args.agents, args.seed, args.p_max, args.shots)
        status = "ok" if row["matches_dp"] else "MISS"
        print(f"{kind:>10}  p={row['winner_p']}  value={row['value']}  [{status}]")
        rows.append(row)

    matched = sum(r["matches_dp"] for r in rows)
    summary = {
        "agents": args.agents,
        "p_max": args.p_max,
        "shots": args.shots,
        "seed": args.seed,
        "matched": matched,
        "total": len(rows),
        "instances": rows,
    }
    print(f"matched dynamic programming on {matched}/{len(rows)} instances")
    if args.out:
        path = Path(args.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
