"""Random sparse multi-label data for tests, benchmarks and sanity checks."""
from __future__ import annotations

import numpy as np

from .dataset import Dataset
from .sparse import SparseVector


def random_vector(rng: np.random.Generator, dim: int, nnz: int,
                  nonneg: bool = True, integer: bool = False) -> SparseVector:
    nnz = min(nnz, dim)
    ids = np.sort(rng.choice(dim, size=nnz, replace=False))
    if integer:
        vals = rng.integers(1, 4, size=nnz).astype(np.float64)
    else:
        vals = rng.uniform(0.05, 1.0, size=nnz)
    if not nonneg:
        vals = vals * rng.choice((-1.0, 1.0), size=nnz)
    return SparseVector(ids, vals)


def random_dataset(rng: np.random.Generator, n: int, dim: int, num_labels: int,
                   max_nnz: int = 20, max_labels: int = 10, nonneg: bool = True) -> Dataset:
    """Entries with 1..max_nnz features and 0..max_labels labels each."""
    entries = []
    for _ in range(n):
        x = random_vector(rng, dim, int(rng.integers(1, max_nnz + 1)), nonneg)
        k = int(rng.integers(0, min(max_labels, num_labels) + 1))
        y = tuple(sorted(rng.choice(num_labels, size=k, replace=False).tolist()))
        entries.append((x, y))
    return Dataset(dim, num_labels, entries)


def bench_dataset(rng: np.random.Generator, n: int, dim: int, nnz: int,
                  num_labels: int = 1000, labels_per_entry: int = 5) -> Dataset:
    """Fixed-``nnz`` entries built in bulk; for large benchmark sizes."""
    nnz = min(nnz, dim)
    # sampling with replacement then dedup keeps this O(n * nnz)
    raw = np.sort(rng.integers(0, dim, size=(n, nnz)), axis=1)
    vals = rng.uniform(0.05, 1.0, size=(n, nnz))
    labs = np.sort(rng.integers(0, num_labels, size=(n, labels_per_entry)), axis=1)
    entries = []
    for i in range(n):
        ids = raw[i]
        keep = np.r_[True, ids[1:] != ids[:-1]]
        lab = labs[i]
        lab = lab[np.r_[True, lab[1:] != lab[:-1]]]
        entries.append((SparseVector(ids[keep], vals[i][keep]), tuple(lab.tolist())))
    return Dataset(dim, num_labels, entries)


def _dense_sim(queries: np.ndarray, train: np.ndarray, beta: int) -> np.ndarray:
    """Pairwise Jaccard**beta * cosine between rows of two dense matrices."""
    qs, ts = queries != 0, train != 0
    inter = qs.astype(np.float64) @ ts.T.astype(np.float64)
    union = qs.sum(1)[:, None] + ts.sum(1)[None, :] - inter
    qn = np.linalg.norm(queries, axis=1)[:, None]
    tn = np.linalg.norm(train, axis=1)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        cos = np.where((qn > 0) & (tn > 0), (queries @ train.T) / (qn * tn), 0.0)
        jac = np.where(union > 0, inter / union, 0.0)
    return cos if beta == 0 else jac ** beta * cos


def unit_nonneg_sample(rng: np.random.Generator, n: int, dim: int, density: float) -> np.ndarray:
    """Unit-length non-negative vectors; each coordinate non-zero with prob ``density``."""
    x = rng.uniform(0.0, 1.0, size=(n, dim)) * (rng.uniform(size=(n, dim)) < density)
    empty = ~x.any(axis=1)
    x[empty, rng.integers(0, dim, size=int(empty.sum()))] = 1.0
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def nearest_sim_median(rng: np.random.Generator, queries: np.ndarray, n: int,
                       beta: int = 1, density: float = 0.8) -> float:
    """Median over ``queries`` of the similarity to the closest of ``n`` fresh samples."""
    train = unit_nonneg_sample(rng, n, queries.shape[1], density)
    return float(np.median(_dense_sim(queries, train, beta).max(axis=1)))


def consistency_trials(seed: int, trials: int = 50, small: int = 100, large: int = 10000,
                       n_queries: int = 25, dim: int = 10, beta: int = 1,
                       density: float = 0.8) -> list[tuple[float, float]]:
    """(median at ``small``, median at ``large``) per trial, same queries for both."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(trials):
        queries = unit_nonneg_sample(rng, n_queries, dim, density)
        out.append((nearest_sim_median(rng, queries, small, beta, density),
                    nearest_sim_median(rng, queries, large, beta, density)))
    return out
