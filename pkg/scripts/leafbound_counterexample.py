"""Leaf count versus s**(w(H) - 1) for the heaviest-children map.

Prints the smallest hand-built tree that breaks the bound, then the
violation rate over random trees.
"""

import argparse

import numpy as np

from treeramsey.sary import gmap_build, leafbound_check, leafbound_slack, random_general_tree, tree_from_levels
from treeramsey.tree import set_weight


def lopsided(n: int):
    # root -> (full binary side, bare path side)
    counts = [2]
    for level in range(1, n - 1):
        counts += [2] * (1 << (level - 1)) + [1]
    return tree_from_levels(2, n, counts)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, required=True)
    args = ap.parse_args()

    for n in range(3, 9):
        T = lopsided(n)
        r = gmap_build(T)
        w = set_weight(r.H)
        print(f"lopsided n={n}: leaves={T.leaf_count} w(H)={w} bound=2**{float(w) - 1:g} "
              f"holds={leafbound_check(T, r, 2)}")

    gen = np.random.default_rng(args.seed)
    for s in (2, 3, 4):
        for n in (6, 8):
            slack = []
            for _ in range(args.trials):
                T = random_general_tree(s, n, gen)
                slack.append(leafbound_slack(T, gmap_build(T), s))
            slack = np.array(slack)
            print(f"s={s} n={n}: violations {int((slack < 0).sum())}/{args.trials}, min slack {slack.min():+.3f} bits")


if __name__ == "__main__":
    main()
