"""Monte-Carlo check that the best neighbour's similarity approaches 1 as n grows.

    python scripts/consistency_check.py [--trials 50] [--beta 1]
"""
import argparse

import numpy as np

from swnn.synthetic import consistency_trials


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--beta", type=int, default=1)
    ap.add_argument("--dim", type=int, default=10)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    for small, large in ((100, 1000), (100, 10000), (1000, 10000)):
        trials = consistency_trials(args.seed, args.trials, small, large, dim=args.dim, beta=args.beta)
        a, b = np.array(trials).T
        wins = int(np.sum(b > a))
        print(f"n={small:>5} -> {large:>5}: median sim {np.median(a):.4f} -> {np.median(b):.4f}, "
              f"larger in {wins}/{args.trials} trials")


if __name__ == "__main__":
    main()
