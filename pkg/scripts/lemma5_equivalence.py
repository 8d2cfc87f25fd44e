"""Compare branch colours from the random split colouring with the random fit process."""

import argparse
import csv
import sys

from treeramsey.coloring import Rng
from treeramsey.experiments import fit_branch_samples, split_branch_samples, two_sample_chi2
from treeramsey.tree import level_range


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=6)
    ap.add_argument("--leaf", type=int, default=None, help="defaults to the middle leaf")
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--seed", type=int, required=True)
    args = ap.parse_args()

    leaves = level_range(args.n - 1)
    leaf = args.leaf or leaves[len(leaves) // 2 + 1]
    root = Rng(args.seed)
    split = split_branch_samples(args.n, leaf, args.trials, root.split(0))
    fit = fit_branch_samples(args.n, args.trials, root.split(1))

    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["position", "p_value"])
    for pos in range(args.n):
        out.writerow([pos, f"{two_sample_chi2([s[pos] for s in split], [f[pos] for f in fit]):.6f}"])
    out.writerow(["sequence", f"{two_sample_chi2(split, fit):.6f}"])


if __name__ == "__main__":
    main()
