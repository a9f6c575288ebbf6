"""Wiki10-31K reference check at S=20, alpha=1, beta=1, plus the hyper-parameter grid.

    python scripts/reproduce_wiki10.py DATA_DIR [--grid]

DATA_DIR holds train.txt / test.txt from the Extreme Classification Repository.
"""
import argparse
import sys
import time
from pathlib import Path

from swnn import HyperParams, build_index, evaluate, load_dataset
from swnn.cli import run

TARGET = {1: 84.89, 3: 74.65, 5: 64.88}
TARGET_MAX = {1: 100.0, 3: 99.99, 5: 99.93}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("data_dir", type=Path)
    ap.add_argument("--grid", action="store_true", help="also run the (alpha, beta) / S grid")
    args = ap.parse_args()
    train, test = args.data_dir / "train.txt", args.data_dir / "test.txt"

    t0 = time.perf_counter()
    idx = build_index(load_dataset(train))
    print(f"index: {idx.num_entries} entries, {idx.num_postings} postings, "
          f"{time.perf_counter() - t0:.1f}s including I/O")
    rep = evaluate(idx, load_dataset(test), HyperParams(S=20, alpha=1.0, beta=1), [1, 3, 5], workers=1)
    print(rep.to_text())
    for k in (1, 3, 5):
        got, gmax = 100 * rep.precision_at[k], 100 * rep.max_precision_at[k]
        print(f"P@{k}: {got:.2f} (reference {TARGET[k]:.2f}, diff {got - TARGET[k]:+.2f}); "
              f"max {gmax:.2f} (reference {TARGET_MAX[k]:.2f})")
    if args.grid:
        run(["eval", "--grid", "--train", str(train), "--test", str(test), "--workers", "1"])


if __name__ == "__main__":
    sys.exit(main())
