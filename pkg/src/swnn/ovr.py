"""Sparse one-vs-rest linear scoring through a feature -> (label, weight) index.

Weight file format::

    <num_features> <num_labels>
    <feature_id> <label_id>:<weight> <label_id>:<weight> ...

Features without a line have no non-zero weights.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import TextIO, Union

import numpy as np

from .dataset import ParseError
from .sparse import SparseVector


@dataclass(frozen=True, eq=False)
class SparseWeightIndex:
    num_features: int
    num_labels: int
    ptr: np.ndarray
    label_ids: np.ndarray
    weights: np.ndarray

    def row(self, feature: int) -> list[tuple[int, float]]:
        lo, hi = self.ptr[feature], self.ptr[feature + 1]
        return list(zip(self.label_ids[lo:hi].tolist(), self.weights[lo:hi].tolist()))

    @property
    def nnz(self) -> int:
        return int(self.weights.size)

    @classmethod
    def from_rows(cls, num_features: int, num_labels: int,
                  rows: dict[int, dict[int, float]]) -> "SparseWeightIndex":
        ptr = np.zeros(num_features + 1, dtype=np.int64)
        labels, weights = [], []
        for f in range(num_features):
            row = sorted((l, w) for l, w in rows.get(f, {}).items() if w != 0.0)
            for l, w in row:
                if not 0 <= l < num_labels:
                    raise ValueError(f"label ID {l} out of range")
                labels.append(l)
                weights.append(w)
            ptr[f + 1] = len(labels)
        bad = [f for f in rows if not 0 <= f < num_features]
        if bad:
            raise ValueError(f"feature ID {bad[0]} out of range")
        return cls(num_features, num_labels, ptr,
                   np.array(labels, dtype=np.int64), np.array(weights, dtype=np.float64))

    @classmethod
    def from_dense(cls, W: np.ndarray) -> "SparseWeightIndex":
        """From an ``L x d`` matrix."""
        L, d = W.shape
        rows = {f: {int(l): float(W[l, f]) for l in np.flatnonzero(W[:, f])} for f in range(d)}
        return cls.from_rows(d, L, rows)


def parse_weights(stream: TextIO) -> SparseWeightIndex:
    header = stream.readline().split()
    if len(header) != 2:
        raise ParseError(1, "expected '<num_features> <num_labels>'")
    try:
        d, L = int(header[0]), int(header[1])
    except ValueError:
        raise ParseError(1, "non-integer header") from None
    rows: dict[int, dict[int, float]] = {}
    for lineno, line in enumerate(stream, start=2):
        tokens = line.split()
        if not tokens:
            continue
        try:
            f = int(tokens[0])
        except ValueError:
            raise ParseError(lineno, f"bad feature ID {tokens[0]!r}") from None
        if not 0 <= f < d:
            raise ParseError(lineno, f"feature ID {f} out of range [0, {d})")
        row = rows.setdefault(f, {})
        for tok in tokens[1:]:
            l, colon, w = tok.partition(":")
            try:
                if not colon:
                    raise ValueError
                l, w = int(l), float(w)
            except ValueError:
                raise ParseError(lineno, f"expected label_id:weight, got {tok!r}") from None
            if not math.isfinite(w):
                raise ParseError(lineno, f"non-finite weight {tok!r}")
            if not 0 <= l < L:
                raise ParseError(lineno, f"label ID {l} out of range [0, {L})")
            if l in row:
                raise ParseError(lineno, f"duplicate pair (feature {f}, label {l})")
            row[l] = w
    return SparseWeightIndex.from_rows(d, L, rows)


def load_weights(path_or_stream: Union[str, Path, TextIO]) -> SparseWeightIndex:
    if isinstance(path_or_stream, (str, Path)):
        with open(path_or_stream, encoding="utf-8") as fh:
            return parse_weights(fh)
    return parse_weights(path_or_stream)


def dumps_weights(w: SparseWeightIndex) -> str:
    buf = io.StringIO()
    buf.write(f"{w.num_features} {w.num_labels}\n")
    for f in range(w.num_features):
        row = w.row(f)
        if row:
            buf.write(f"{f} " + " ".join(f"{l}:{v!r}" for l, v in row) + "\n")
    return buf.getvalue()


def ovr_scores(w: SparseWeightIndex, x: SparseVector, top_k: int,
               counter: dict | None = None) -> list[tuple[int, float]]:
    """Top ``top_k`` labels of ``W x`` summing over the query's non-zeros only.

    Ranking is score descending, label ascending on ties, over all labels;
    untouched labels score 0.  If ``counter`` is given, ``counter["postings"]``
    is increased by the number of weight entries read.
    """
    keep = x.ids < w.num_features
    qids, qvals = x.ids[keep], x.values[keep]
    starts = w.ptr[qids]
    lengths = w.ptr[qids + 1] - starts
    total = int(lengths.sum())
    if counter is not None:
        counter["postings"] = counter.get("postings", 0) + total
    if total:
        pos = np.repeat(starts - np.cumsum(lengths) + lengths, lengths) + np.arange(total)
        labels, inverse = np.unique(w.label_ids[pos], return_inverse=True)
        scores = np.bincount(inverse, weights=w.weights[pos] * np.repeat(qvals, lengths),
                             minlength=labels.size)
    else:
        labels, scores = np.empty(0, np.int64), np.empty(0)

    def ranked(mask):
        order = np.lexsort((labels[mask], -scores[mask]))
        return list(zip(labels[mask][order].tolist(), scores[mask][order].tolist()))

    out = ranked(scores > 0)
    if len(out) >= top_k:
        return out[:top_k]
    # zero-score group: untouched labels plus touched ones that cancelled to 0
    nonzero = set(labels[~(scores == 0)].tolist())
    l = 0
    while len(out) < top_k and l < w.num_labels:
        if l not in nonzero:
            out.append((l, 0.0))
        l += 1
    if len(out) < top_k:
        out.extend(ranked(scores < 0))
    return out[:top_k]
