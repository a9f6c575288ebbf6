"""``swnn`` command line: stats, index, predict, ovr-predict, eval, score, bench, kernel-check."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import classifier, dataset, evaluation, index, ovr, sparse, synthetic

log = logging.getLogger("swnn")

# (alpha, beta) pairs tried first, then S values tried with the best pair
GRID_ALPHA_BETA = ((0.0, 0), (0.5, 0), (1.0, 0), (1.0, 1), (2.0, 0), (2.0, 1))
GRID_S = (25, 50, 75)


class UsageError(Exception):
    pass


@dataclass
class Config:
    subcommand: str
    train: Optional[str] = None
    test: Optional[str] = None
    index: Optional[str] = None
    weights: Optional[str] = None
    out: Optional[str] = None
    S: Optional[int] = None
    alpha: float = 1.0
    beta: int = 1
    topk: int = 5
    ks: list = field(default_factory=lambda: [1, 3, 5])
    workers: Optional[int] = None
    fallback: str = "none"
    grid: bool = False
    seed: int = 0
    query_support: str = "full"
    synthetic: Optional[tuple] = None
    queries: int = 1000
    sample: int = 30

    def hyper_params(self, idx: index.TrainingIndex) -> sparse.HyperParams:
        S = self.S if self.S is not None else classifier.default_neighbourhood(idx)
        return sparse.HyperParams(S=S, alpha=self.alpha, beta=self.beta, top_k=self.topk)


def _int_list(text: str) -> list[int]:
    try:
        values = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}")
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("values must be positive integers")
    return values


def _beta(text: str) -> int:
    try:
        return sparse.parse_beta(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _synthetic(text: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected N,D,NNZ")
    return tuple(_positive(p) for p in parts)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--train", help="training set (repository text format)")
    common.add_argument("--test", help="test set / queries (repository text format)")
    common.add_argument("--index", help="binary index file")
    common.add_argument("--weights", help="one-vs-rest weight file")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--S", type=_positive, default=None,
                        help="neighbourhood size (default: mean labels per entry, rounded up)")
    common.add_argument("--alpha", type=float, default=1.0, help="vote weight exponent on sim")
    common.add_argument("--beta", type=_beta, default=1, help="Jaccard exponent (non-negative integer)")
    common.add_argument("--topk", type=_positive, default=5, help="labels per prediction")
    common.add_argument("--k", dest="ks", type=_int_list, default=[1, 3, 5], help="comma-separated K values for P@K")
    common.add_argument("--workers", type=_positive, default=None, help="query threads (bench always uses 1)")
    common.add_argument("--fallback", choices=("none", "popular"), default="none",
                        help="'popular' ranks frequent training labels for queries "
                             "with no candidates (extension)")
    common.add_argument("--grid", action="store_true", help="eval: sweep the (alpha, beta) and S grid")
    common.add_argument("--seed", type=int, default=0, help="RNG seed for sampling and synthetic data")
    common.add_argument("--query-support", choices=("full", "indexed"), default="full",
                        help="count out-of-range query features in the Jaccard union (full) or not")
    common.add_argument("--synthetic", type=_synthetic, default=None, metavar="N,D,NNZ",
                        help="bench: synthetic training set instead of --train")
    common.add_argument("--queries", type=_positive, default=1000, help="bench: number of synthetic queries")
    common.add_argument("--sample", type=_positive, default=30, help="kernel-check: vectors sampled")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="swnn", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, help_ in (
        ("stats", "five-number summaries of a dataset"),
        ("index", "build and save the binary index"),
        ("predict", "ranked labels per query"),
        ("ovr-predict", "ranked labels from sparse one-vs-rest weights"),
        ("eval", "Precision@K report"),
        ("score", "score a prediction file against --test"),
        ("bench", "single-thread latency benchmark"),
        ("kernel-check", "minimum Gram eigenvalue of sampled vectors"),
    ):
        sub.add_parser(name, parents=[common], help=help_)
    return parser


def parse_config(argv: Sequence[str]) -> Config:
    ns = vars(build_parser().parse_args(argv))
    ns.pop("verbose")
    return Config(**ns)


def _open_out(path: Optional[str]):
    return open(path, "w", encoding="utf-8") if path else sys.stdout


def _require(cfg: Config, *names: str) -> None:
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise UsageError(f"{cfg.subcommand}: missing --{', --'.join(missing)}")


def _load_index(cfg: Config) -> index.TrainingIndex:
    if cfg.index and not cfg.train:
        return index.load_index(cfg.index)
    if not cfg.train:
        raise UsageError(f"{cfg.subcommand}: need --train or --index")
    t0 = time.perf_counter()
    idx = index.build_index(dataset.load_dataset(cfg.train))
    log.info("index built in %.2fs", time.perf_counter() - t0)
    return idx


def format_ranked(ranked) -> str:
    return "\t".join(f"{l}:{s:.6g}" for l, s in ranked)


def parse_ranked(line: str) -> list[int]:
    return [int(tok.split(":")[0]) for tok in line.rstrip("\r\n").split("\t") if tok]


def cmd_stats(cfg: Config) -> int:
    path = cfg.train or cfg.test
    if not path:
        raise UsageError("stats: need --train or --test")
    stats = dataset.dataset_statistics(dataset.load_dataset(path))
    print(dataset.statistics_table(stats))
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(dataset.statistics_json(stats) + "\n")
    return 0


def cmd_index(cfg: Config) -> int:
    _require(cfg, "train", "index")
    t0 = time.perf_counter()
    idx = index.build_index(dataset.load_dataset(cfg.train))
    index.save_index(idx, cfg.index)
    print(f"indexed {idx.num_entries} entries, {idx.num_postings} postings "
          f"in {time.perf_counter() - t0:.2f}s -> {cfg.index}")
    return 0


def cmd_predict(cfg: Config) -> int:
    if not (cfg.train or cfg.index):
        raise UsageError("predict: need --train or --index")
    _require(cfg, "test")
    idx = _load_index(cfg)
    test = dataset.load_dataset(cfg.test)
    hp = cfg.hyper_params(idx)
    res = classifier.predict_batch(idx, test.features, hp, cfg.workers or classifier.default_workers(),
                                   fallback=None if cfg.fallback == "none" else cfg.fallback,
                                   query_support=cfg.query_support)
    out = _open_out(cfg.out)
    try:
        for p in res.predictions:
            out.write(format_ranked(p.ranked) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_ovr_predict(cfg: Config) -> int:
    _require(cfg, "weights", "test")
    w = ovr.load_weights(cfg.weights)
    test = dataset.load_dataset(cfg.test)
    out = _open_out(cfg.out)
    try:
        for x in test.features:
            out.write(format_ranked(ovr.ovr_scores(w, x, cfg.topk)) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _eval_one(idx, test, cfg: Config, hp) -> evaluation.EvalReport:
    return evaluation.evaluate(idx, test, hp, cfg.ks, cfg.workers or classifier.default_workers(),
                               fallback=None if cfg.fallback == "none" else cfg.fallback,
                               query_support=cfg.query_support)


def cmd_eval(cfg: Config) -> int:
    if not (cfg.train or cfg.index):
        raise UsageError("eval: need --train or --index")
    _require(cfg, "test")
    idx = _load_index(cfg)
    test = dataset.load_dataset(cfg.test)
    if cfg.grid:
        return _grid(cfg, idx, test)
    report = _eval_one(idx, test, cfg, cfg.hyper_params(idx))
    print(report.to_text())
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(report.to_json() + "\n")
    return 0


def _grid(cfg: Config, idx, test) -> int:
    S0 = cfg.S if cfg.S is not None else classifier.default_neighbourhood(idx)
    rows = []
    for a, b in GRID_ALPHA_BETA:
        hp = sparse.HyperParams(S0, a, b, cfg.topk)
        rows.append((hp, _eval_one(idx, test, cfg, hp)))
    k0 = min(cfg.ks)
    best = max(rows, key=lambda r: r[1].precision_at[k0])[0]
    for S in GRID_S:
        hp = sparse.HyperParams(S, best.alpha, best.beta, cfg.topk)
        rows.append((hp, _eval_one(idx, test, cfg, hp)))
    head = f"{'S':>4}{'alpha':>7}{'beta':>5}" + "".join(f"{'P@' + str(k):>9}" for k in cfg.ks)
    print(head)
    for hp, rep in rows:
        print(f"{hp.S:>4}{hp.alpha:>7.1f}{hp.beta:>5}"
              + "".join(f"{100 * rep.precision_at[k]:>9.2f}" for k in sorted(set(cfg.ks))))
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            json.dump([r.as_dict() for _, r in rows], fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def cmd_score(cfg: Config) -> int:
    """Standalone scorer: P@K of a ``predict`` output file (given as --out)."""
    _require(cfg, "test", "out")
    truths = dataset.load_dataset(cfg.test).labels
    with open(cfg.out, encoding="utf-8") as fh:
        preds = [parse_ranked(line) for line in fh]
    for k in sorted(set(cfg.ks)):
        p = evaluation.precision_at_k(preds, truths, k)
        m = evaluation.max_precision_at_k(truths, k)
        print(f"P@{k}\t{100 * p:.2f}\tmax\t{100 * m:.2f}")
    return 0


def bench_report(idx, queries, hp, build_seconds: float) -> dict:
    res = classifier.predict_batch(idx, queries, hp, workers=1, benchmark=True, count_postings=True)
    nq = max(len(queries), 1)
    return {
        "num_entries": idx.num_entries,
        "num_features": idx.num_features,
        "num_postings": idx.num_postings,
        "num_queries": len(queries),
        "index_build_seconds": build_seconds,
        "hyper_params": {"S": hp.S, "alpha": hp.alpha, "beta": hp.beta, "top_k": hp.top_k},
        "latency": res.latency.as_dict(),
        "postings_touched_per_query": res.postings_touched / nq,
        "candidates_per_query": res.candidates / nq,
        "n_times_d": idx.num_entries * idx.num_features,
    }


def cmd_bench(cfg: Config) -> int:
    rng = np.random.default_rng(cfg.seed)
    if cfg.synthetic:
        n, d, nnz = cfg.synthetic
        train = synthetic.bench_dataset(rng, n, d, nnz)
        queries = synthetic.bench_dataset(rng, cfg.queries, d, nnz).features
        t0 = time.perf_counter()
        idx = index.build_index(train)
        build = time.perf_counter() - t0
    else:
        if not (cfg.train or cfg.index):
            raise UsageError("bench: need --train/--index or --synthetic")
        _require(cfg, "test")
        t0 = time.perf_counter()
        idx = _load_index(cfg)
        build = time.perf_counter() - t0
        queries = dataset.load_dataset(cfg.test).features[: cfg.queries]
    rep = bench_report(idx, queries, cfg.hyper_params(idx), build)
    lat = rep["latency"]
    print(f"entries={rep['num_entries']} features={rep['num_features']} "
          f"postings={rep['num_postings']} queries={rep['num_queries']} (1 thread)")
    print(f"index build: {rep['index_build_seconds']:.2f}s")
    print(f"latency ms/query: mean={lat['mean_ms']:.3f} p50={lat['p50_ms']:.3f} "
          f"p99={lat['p99_ms']:.3f}  queries/sec={lat['queries_per_sec']:.1f}")
    print(f"postings touched/query={rep['postings_touched_per_query']:.1f} "
          f"candidates/query={rep['candidates_per_query']:.1f} (n*d={rep['n_times_d']})")
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            json.dump(rep, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def cmd_kernel_check(cfg: Config) -> int:
    path = cfg.train or cfg.test
    if not path:
        raise UsageError("kernel-check: need --train or --test")
    vectors = [x for x in dataset.load_dataset(path).features if len(x)]
    if not vectors:
        raise ValueError("no non-empty vectors to sample")
    rng = np.random.default_rng(cfg.seed)
    m = min(cfg.sample, len(vectors), sparse.GRAM_CAP)
    pick = rng.choice(len(vectors), size=m, replace=False)
    sample = [vectors[i] for i in sorted(pick)]
    result = {}
    for beta in (0, 1, 2, 3):
        result[beta] = sparse.gram_min_eigenvalue(sample, beta)
        print(f"beta={beta}\tmin_eigenvalue={result[beta]:.3e}")
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            json.dump({"sample": m, "seed": cfg.seed,
                       "min_eigenvalue": {str(k): v for k, v in result.items()}}, fh, indent=2)
            fh.write("\n")
    return 0


COMMANDS = {
    "stats": cmd_stats,
    "index": cmd_index,
    "predict": cmd_predict,
    "ovr-predict": cmd_ovr_predict,
    "eval": cmd_eval,
    "score": cmd_score,
    "bench": cmd_bench,
    "kernel-check": cmd_kernel_check,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if ("-v" in argv or "--verbose" in argv) else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[cfg.subcommand](cfg)
    except UsageError as exc:
        print(f"swnn: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"swnn: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
