"""Weighted top-S neighbour voting over the inverted index."""
from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .index import Candidates, TrainingIndex, score_candidates
from .sparse import HyperParams, SparseVector


@dataclass(frozen=True)
class Prediction:
    ranked: tuple  # of (label_id, score), score descending, label ascending on ties
    neighbor_ids: tuple = ()
    fallback: bool = False

    @property
    def labels(self) -> list[int]:
        return [l for l, _ in self.ranked]


# Scores this close (relative) count as equal, so mathematically tied values
# that differ only by rounding are ordered by ID rather than by float noise.
TIE_RTOL = 1e-12


def tie_rank(values: np.ndarray) -> np.ndarray:
    """Rank of each value's tie group, 0 for the largest group.

    Values are sorted descending and a new group starts whenever a value falls
    more than ``TIE_RTOL`` (relative) below its predecessor.
    """
    if values.size == 0:
        return np.empty(0, np.int64)
    order = np.argsort(-values, kind="stable")
    v = values[order]
    gap = (v[:-1] - v[1:]) > TIE_RTOL * np.abs(v[:-1])
    groups = np.empty(values.size, np.int64)
    groups[order] = np.r_[0, np.cumsum(gap)]
    return groups


def top_s(cands: Candidates, S: int) -> np.ndarray:
    """Positions of the S best candidates ordered by similarity, then entry ID.

    A partition around the S-th largest similarity limits the sort to the
    candidates that can make the cut.
    """
    m = len(cands)
    sims, ids = cands.sims, cands.entry_ids
    pool = np.arange(m)
    if m > S:
        threshold = -np.partition(-sims, S - 1)[S - 1]
        pool = np.flatnonzero(sims >= threshold * (1 - 1e-9))
    order = np.lexsort((ids[pool], tie_rank(sims[pool])))
    return pool[order[:S]]


def vote(idx: TrainingIndex, neighbors: np.ndarray, weights: np.ndarray,
         top_k: int) -> tuple:
    if neighbors.size == 0:
        return ()
    starts = idx.label_ptr[neighbors]
    lengths = idx.label_ptr[neighbors + 1] - starts
    total = int(lengths.sum())
    if total == 0:
        return ()
    pos = np.repeat(starts - np.cumsum(lengths) + lengths, lengths) + np.arange(total)
    labels, inverse = np.unique(idx.label_ids[pos], return_inverse=True)
    scores = np.bincount(inverse, weights=np.repeat(weights, lengths), minlength=labels.size)
    groups = tie_rank(scores)
    order = np.lexsort((labels, groups))[:top_k]
    # report one value per tie group so listed scores never increase
    top = np.full(groups.max() + 1, -np.inf)
    np.maximum.at(top, groups, scores)
    return tuple(zip(labels[order].tolist(), top[groups[order]].tolist()))


def predict(idx: TrainingIndex, x: SparseVector, hp: HyperParams, *,
            fallback: Optional[str] = None, query_support: str = "full") -> Prediction:
    cands = score_candidates(idx, x, hp.beta, query_support=query_support)
    chosen = top_s(cands, hp.S)
    sims = cands.sims[chosen]
    # sims are strictly positive here, so alpha = 0 gives weight 1
    weights = sims ** hp.alpha
    ranked = vote(idx, cands.entry_ids[chosen], weights, hp.top_k)
    neighbors = tuple(cands.entry_ids[chosen].tolist())
    if not ranked and fallback == "popular":
        return Prediction(tuple(idx.popular_labels(hp.top_k)), neighbors, fallback=True)
    return Prediction(ranked, neighbors)


@dataclass
class LatencyStats:
    mean_ms: float
    p50_ms: float
    p99_ms: float
    queries_per_sec: float
    n: int

    @classmethod
    def from_seconds(cls, seconds: Sequence[float]) -> "LatencyStats":
        if not len(seconds):
            return cls(0.0, 0.0, 0.0, 0.0, 0)
        ms = np.asarray(seconds) * 1e3
        total = float(np.sum(seconds))
        return cls(float(ms.mean()), float(np.percentile(ms, 50)), float(np.percentile(ms, 99)),
                   len(ms) / total if total > 0 else float("inf"), len(ms))

    def as_dict(self) -> dict:
        return {"mean_ms": self.mean_ms, "p50_ms": self.p50_ms, "p99_ms": self.p99_ms,
                "queries_per_sec": self.queries_per_sec, "n": self.n}


@dataclass
class BatchResult:
    predictions: list
    latency: Optional[LatencyStats] = None
    postings_touched: int = 0
    skipped_features: int = 0
    candidates: int = 0
    per_query_seconds: list = field(default_factory=list, repr=False)


def _timed_predict(idx, x, hp, fallback, query_support):
    t0 = time.perf_counter()
    p = predict(idx, x, hp, fallback=fallback, query_support=query_support)
    return p, time.perf_counter() - t0


def predict_batch(idx: TrainingIndex, queries: Sequence[SparseVector], hp: HyperParams,
                  workers: int = 1, *, fallback: Optional[str] = None,
                  query_support: str = "full", benchmark: bool = False,
                  count_postings: bool = False) -> BatchResult:
    """Predict every query; output is independent of ``workers``.

    ``benchmark=True`` records per-query wall-clock latency around
    :func:`predict`; ``count_postings=True`` adds candidate-generation counters
    (a second, untimed scoring pass).
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    args = (hp, fallback, query_support)
    if workers == 1 or len(queries) < 2:
        results = [_timed_predict(idx, q, *args) for q in queries]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda q: _timed_predict(idx, q, *args), queries))
    out = BatchResult([p for p, _ in results])
    if benchmark:
        secs = [t for _, t in results]
        out.latency = LatencyStats.from_seconds(secs)
        out.per_query_seconds = secs
    if count_postings:
        for q in queries:
            c = score_candidates(idx, q, hp.beta, query_support=query_support)
            out.postings_touched += c.postings_touched
            out.skipped_features += c.skipped_features
            out.candidates += len(c)
    return out


def default_workers() -> int:
    return os.cpu_count() or 1


def default_neighbourhood(idx: TrainingIndex) -> int:
    """Average number of labels per training entry, rounded up (at least 1)."""
    return max(1, int(np.ceil(idx.average_labels_per_entry())))
