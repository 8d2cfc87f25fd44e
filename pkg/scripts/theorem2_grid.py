"""Threshold grid: least sufficient depth vs 5dk log2 k, plus the block-colouring depth."""

import argparse
from pathlib import Path

from treeramsey.coloring import Rng
from treeramsey.experiments import grid_csv, theorem2_grid


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d-max", type=int, default=10)
    ap.add_argument("--k-max", type=int, default=64)
    ap.add_argument("--seed", type=int, required=True)
    ap.add_argument("--out", default="results/theorem2_grid.csv")
    args = ap.parse_args()

    rows = theorem2_grid(range(2, args.d_max + 1), range(2, args.k_max + 1), Rng(args.seed))
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(grid_csv(rows))
    bad = [r for r in rows if not r.consistent]
    worst = max(rows, key=lambda r: r.n_sufficient / r.upper_5dk)
    print(f"{len(rows)} rows, {len(bad)} inconsistent; tightest at d={worst.d} k={worst.k}: "
          f"{worst.n_sufficient} vs {worst.upper_5dk}")


if __name__ == "__main__":
    main()
