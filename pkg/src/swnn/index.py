"""Feature -> postings index over the training set.

Postings are stored column-compressed: ``posting_ptr[f]:posting_ptr[f + 1]``
slices ``posting_entries`` / ``posting_values`` for feature ``f``, entry IDs
ascending.  Label sets use the same layout keyed by entry.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterator, NamedTuple, Union

import numpy as np

from .dataset import Dataset, LabelSet
from .sparse import SparseVector

MAGIC = b"SWNN"
FORMAT_VERSION = 1


class CandidateScore(NamedTuple):
    entry_id: int
    dot: float
    intersection: int
    sim: float


@dataclass(frozen=True, eq=False)
class Candidates:
    """Positive-similarity candidates of one query, as parallel arrays.

    Iterating yields :class:`CandidateScore` tuples.  ``postings_touched`` is the
    number of posting items read, ``skipped_features`` the query features that
    lie outside the index dimension.
    """

    entry_ids: np.ndarray
    dots: np.ndarray
    intersections: np.ndarray
    sims: np.ndarray
    postings_touched: int = 0
    skipped_features: int = 0

    def __len__(self) -> int:
        return int(self.entry_ids.size)

    def __iter__(self) -> Iterator[CandidateScore]:
        for row in zip(self.entry_ids.tolist(), self.dots.tolist(),
                       self.intersections.tolist(), self.sims.tolist()):
            yield CandidateScore(*row)

    @classmethod
    def none(cls, skipped: int = 0) -> "Candidates":
        e = np.empty(0, np.int64)
        return cls(e, np.empty(0), e, np.empty(0), 0, skipped)


@dataclass(frozen=True, eq=False)
class TrainingIndex:
    num_entries: int
    num_features: int
    num_labels: int
    posting_ptr: np.ndarray
    posting_entries: np.ndarray
    posting_values: np.ndarray
    norms: np.ndarray
    support_sizes: np.ndarray
    label_ptr: np.ndarray
    label_ids: np.ndarray
    label_counts: np.ndarray = field(init=False)

    def __post_init__(self):
        for name in ("posting_ptr", "posting_entries", "posting_values", "norms",
                     "support_sizes", "label_ptr", "label_ids"):
            getattr(self, name).setflags(write=False)
        counts = np.bincount(self.label_ids, minlength=self.num_labels)
        counts.setflags(write=False)
        object.__setattr__(self, "label_counts", counts)

    def postings(self, feature: int) -> list[tuple[int, float]]:
        lo, hi = self.posting_ptr[feature], self.posting_ptr[feature + 1]
        return list(zip(self.posting_entries[lo:hi].tolist(), self.posting_values[lo:hi].tolist()))

    def label_set(self, entry: int) -> LabelSet:
        return tuple(self.label_ids[self.label_ptr[entry]:self.label_ptr[entry + 1]].tolist())

    @property
    def num_postings(self) -> int:
        return int(self.posting_entries.size)

    def average_labels_per_entry(self) -> float:
        return self.label_ids.size / max(self.num_entries, 1)

    def popular_labels(self, k: int) -> list[tuple[int, float]]:
        """Most frequent training labels, count descending then label ascending."""
        order = np.lexsort((np.arange(self.num_labels), -self.label_counts))[:k]
        order = order[self.label_counts[order] > 0]
        return [(int(l), float(self.label_counts[l])) for l in order]


def build_index(ds: Dataset) -> TrainingIndex:
    n = ds.num_entries
    sizes = np.fromiter((len(x) for x, _ in ds.entries), dtype=np.int64, count=n)
    if n:
        feats = np.concatenate([x.ids for x, _ in ds.entries])
        vals = np.concatenate([x.values for x, _ in ds.entries])
    else:
        feats, vals = np.empty(0, np.int64), np.empty(0)
    rows = np.repeat(np.arange(n, dtype=np.int64), sizes)
    # stable sort keeps entry IDs ascending inside each feature's postings
    order = np.argsort(feats, kind="stable")
    ptr = np.zeros(ds.num_features + 1, dtype=np.int64)
    np.cumsum(np.bincount(feats, minlength=ds.num_features), out=ptr[1:])

    norms = np.sqrt(np.bincount(rows, weights=vals * vals, minlength=n))

    n_labels = np.fromiter((len(y) for _, y in ds.entries), dtype=np.int64, count=n)
    label_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(n_labels, out=label_ptr[1:])
    label_ids = np.fromiter((l for _, y in ds.entries for l in y), dtype=np.int64,
                            count=int(label_ptr[-1]))
    return TrainingIndex(
        num_entries=n, num_features=ds.num_features, num_labels=ds.num_labels,
        posting_ptr=ptr, posting_entries=rows[order], posting_values=vals[order],
        norms=norms, support_sizes=sizes,
        label_ptr=label_ptr, label_ids=label_ids,
    )


def score_candidates(idx: TrainingIndex, x: SparseVector, beta: int,
                     query_support: str = "full") -> Candidates:
    """Score every training entry that shares a feature with ``x``.

    ``query_support`` picks the query support size used in the Jaccard term:
    ``"full"`` counts features outside the index dimension, ``"indexed"`` does not.
    Entries with similarity <= 0 are dropped.
    """
    if query_support not in ("full", "indexed"):
        raise ValueError(f"query_support must be 'full' or 'indexed', got {query_support!r}")
    in_dim = x.ids < idx.num_features
    skipped = int(x.ids.size - np.count_nonzero(in_dim))
    qids, qvals = x.ids[in_dim], x.values[in_dim]
    qnorm = float(np.sqrt(np.sum(x.values * x.values))) if len(x) else 0.0
    if qids.size == 0 or qnorm == 0.0:
        return Candidates.none(skipped)
    qsize = len(x) if query_support == "full" else int(qids.size)

    starts = idx.posting_ptr[qids]
    lengths = idx.posting_ptr[qids + 1] - starts
    total = int(lengths.sum())
    if total == 0:
        return Candidates.none(skipped)
    # positions of every posting item hit by the query, feature by feature
    offsets = np.repeat(starts - np.cumsum(lengths) + lengths, lengths)
    pos = offsets + np.arange(total)
    hit_entries = idx.posting_entries[pos]
    contrib = idx.posting_values[pos] * np.repeat(qvals, lengths)

    entries, inverse = np.unique(hit_entries, return_inverse=True)
    dots = np.bincount(inverse, weights=contrib, minlength=entries.size)
    inter = np.bincount(inverse, minlength=entries.size)

    norms = idx.norms[entries]
    sizes = idx.support_sizes[entries]
    cos = dots / (qnorm * norms)
    if beta == 0:
        sims = cos
    else:
        sims = (inter / (qsize + sizes - inter)) ** beta * cos
    keep = sims > 0
    return Candidates(entries[keep], dots[keep], inter[keep], sims[keep], total, skipped)


# --- binary serialization -------------------------------------------------------
#
# little-endian throughout:
#   b"SWNN" | u32 version | u64 num_entries | u64 num_features | u64 num_labels
#   then seven sections, each ``u64 count`` followed by ``count`` items:
#   norms f64, support_sizes i64, label_ptr i64, label_ids i64,
#   posting_ptr i64, posting_entries i64, posting_values f64

_SECTIONS = (
    ("norms", "<f8"),
    ("support_sizes", "<i8"),
    ("label_ptr", "<i8"),
    ("label_ids", "<i8"),
    ("posting_ptr", "<i8"),
    ("posting_entries", "<i8"),
    ("posting_values", "<f8"),
)


class IndexFormatError(ValueError):
    pass


def write_index(idx: TrainingIndex, fh: BinaryIO) -> None:
    fh.write(MAGIC)
    fh.write(struct.pack("<IQQQ", FORMAT_VERSION, idx.num_entries, idx.num_features, idx.num_labels))
    for name, dtype in _SECTIONS:
        arr = np.ascontiguousarray(getattr(idx, name), dtype=dtype)
        fh.write(struct.pack("<Q", arr.size))
        fh.write(arr.tobytes())


def read_index(fh: BinaryIO) -> TrainingIndex:
    if fh.read(4) != MAGIC:
        raise IndexFormatError("not an index file (bad magic)")
    head = fh.read(struct.calcsize("<IQQQ"))
    if len(head) != struct.calcsize("<IQQQ"):
        raise IndexFormatError("truncated header")
    version, n, d, L = struct.unpack("<IQQQ", head)
    if version != FORMAT_VERSION:
        raise IndexFormatError(f"unsupported index version {version}")
    arrays = {}
    for name, dtype in _SECTIONS:
        raw = fh.read(8)
        if len(raw) != 8:
            raise IndexFormatError(f"truncated section {name}")
        (count,) = struct.unpack("<Q", raw)
        nbytes = count * np.dtype(dtype).itemsize
        buf = fh.read(nbytes)
        if len(buf) != nbytes:
            raise IndexFormatError(f"truncated section {name}")
        arrays[name] = np.frombuffer(buf, dtype=dtype).astype(dtype[1:])
    if arrays["posting_ptr"].size != d + 1 or arrays["label_ptr"].size != n + 1:
        raise IndexFormatError("section sizes do not match header dimensions")
    return TrainingIndex(num_entries=n, num_features=d, num_labels=L, **arrays)


def save_index(idx: TrainingIndex, path: Union[str, Path]) -> None:
    with open(path, "wb") as fh:
        write_index(idx, fh)


def load_index(path: Union[str, Path]) -> TrainingIndex:
    with open(path, "rb") as fh:
        return read_index(fh)
