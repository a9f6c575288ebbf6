"""Single-thread latency on synthetic data at several training-set sizes.

    python scripts/bench_synthetic.py [--nnz 50] [--queries 500]

Shows that postings touched per query follow the posting-list lengths
(roughly n * nnz**2 / d) rather than n * d.
"""
import argparse
import time

import numpy as np

from swnn import HyperParams, build_index
from swnn.cli import bench_report
from swnn.synthetic import bench_dataset


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nnz", type=int, default=50)
    ap.add_argument("--dim", type=int, default=100_000)
    ap.add_argument("--queries", type=int, default=500)
    ap.add_argument("--sizes", default="10000,30000,100000")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    queries = bench_dataset(rng, args.queries, args.dim, args.nnz).features
    print(f"{'n':>8}{'build s':>9}{'mean ms':>9}{'p50':>8}{'p99':>8}{'q/s':>8}{'postings/q':>12}")
    for n in (int(s) for s in args.sizes.split(",")):
        train = bench_dataset(rng, n, args.dim, args.nnz)
        t0 = time.perf_counter()
        idx = build_index(train)
        rep = bench_report(idx, queries, HyperParams(S=20), time.perf_counter() - t0)
        lat = rep["latency"]
        print(f"{n:>8}{rep['index_build_seconds']:>9.2f}{lat['mean_ms']:>9.3f}{lat['p50_ms']:>8.3f}"
              f"{lat['p99_ms']:>8.3f}{lat['queries_per_sec']:>8.0f}{rep['postings_touched_per_query']:>12.0f}")


if __name__ == "__main__":
    main()
