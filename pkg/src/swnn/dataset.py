"""Reader/writer for the Extreme Classification Repository text format.

Header line ``<num_entries> <num_features> <num_labels>``, then one entry per
line: comma separated label IDs, a space, then ``feature_id:value`` tokens::

    2 5 3
    0,2 1:1.5 4:2
     3:1
"""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO, Union

import numpy as np

from .sparse import SparseVector

LabelSet = tuple  # strictly ascending tuple of label IDs


class ParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def label_set(ids: Iterable[int]) -> LabelSet:
    out = tuple(sorted(int(i) for i in ids))
    if any(a == b for a, b in zip(out, out[1:])):
        raise ValueError(f"duplicate label in {out}")
    if out and out[0] < 0:
        raise ValueError("label IDs must be non-negative")
    return out


@dataclass(frozen=True, eq=False)
class Dataset:
    num_features: int
    num_labels: int
    entries: tuple  # of (SparseVector, LabelSet)

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        for i, (x, y) in enumerate(self.entries):
            if len(x) and x.ids[-1] >= self.num_features:
                raise ValueError(f"entry {i}: feature ID {x.ids[-1]} >= {self.num_features}")
            if y and y[-1] >= self.num_labels:
                raise ValueError(f"entry {i}: label ID {y[-1]} >= {self.num_labels}")

    @property
    def num_entries(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def features(self) -> list[SparseVector]:
        return [x for x, _ in self.entries]

    @property
    def labels(self) -> list[LabelSet]:
        return [y for _, y in self.entries]


def _parse_header(line: str) -> tuple[int, int, int]:
    parts = line.split()
    if len(parts) != 3:
        raise ParseError(1, f"expected '<num_entries> <num_features> <num_labels>', got {line.strip()!r}")
    try:
        n, d, L = (int(p) for p in parts)
    except ValueError:
        raise ParseError(1, f"non-integer header field in {line.strip()!r}") from None
    if min(n, d, L) < 0:
        raise ParseError(1, "header values must be non-negative")
    return n, d, L


def parse_line(line: str, num_features: int, num_labels: int, lineno: int = 0):
    """Parse one entry line into ``(SparseVector, LabelSet)``."""
    line = line.rstrip("\r\n")
    head, sep, rest = line.partition(" ")
    if ":" in head:
        # no label field and no leading space: the first token is a feature
        head, rest = "", line
    try:
        labels = tuple(int(t) for t in head.split(",")) if head else ()
    except ValueError:
        raise ParseError(lineno, f"bad label field {head!r}") from None
    labels_sorted = tuple(sorted(labels))
    if any(a == b for a, b in zip(labels_sorted, labels_sorted[1:])):
        raise ParseError(lineno, "duplicate label ID")
    if labels_sorted and (labels_sorted[0] < 0 or labels_sorted[-1] >= num_labels):
        raise ParseError(lineno, f"label ID out of range [0, {num_labels})")

    tokens = rest.split()
    if not tokens:
        return SparseVector.empty(), labels_sorted
    flat = rest.replace(":", " ").split()
    try:
        if len(flat) != 2 * len(tokens) or rest.count(":") != len(tokens):
            raise ValueError
        ids = np.array(flat[0::2]).astype(np.int64)
        vals = np.array(flat[1::2]).astype(np.float64)
        if not np.isfinite(vals).all():
            raise ValueError
    except ValueError:
        ids, vals = _parse_features_slow(tokens, lineno)
    order = np.argsort(ids, kind="stable")
    ids, vals = ids[order], vals[order]
    if ids.size > 1 and np.any(ids[1:] == ids[:-1]):
        dup = ids[1:][ids[1:] == ids[:-1]][0]
        raise ParseError(lineno, f"duplicate feature ID {dup}")
    if ids[0] < 0 or ids[-1] >= num_features:
        raise ParseError(lineno, f"feature ID out of range [0, {num_features})")
    keep = vals != 0.0
    if not keep.all():
        ids, vals = ids[keep], vals[keep]
    return SparseVector(ids, vals), labels_sorted


def _parse_features_slow(tokens, lineno):
    # token-by-token pass, only used to locate the offending token
    ids = np.empty(len(tokens), dtype=np.int64)
    vals = np.empty(len(tokens), dtype=np.float64)
    for k, tok in enumerate(tokens):
        j, colon, v = tok.partition(":")
        if not colon:
            raise ParseError(lineno, f"expected feature_id:value, got {tok!r}")
        try:
            ids[k] = int(j)
            vals[k] = float(v)
        except ValueError:
            raise ParseError(lineno, f"non-numeric token {tok!r}") from None
        if not math.isfinite(vals[k]):
            raise ParseError(lineno, f"non-finite value in {tok!r}")
    return ids, vals


def parse_dataset(stream: TextIO) -> Dataset:
    header = stream.readline()
    if not header:
        raise ParseError(1, "empty input")
    n, d, L = _parse_header(header)
    entries = []
    for lineno, line in enumerate(stream, start=2):
        if not line.strip("\r\n") and lineno - 1 > n:
            continue  # trailing blank lines
        if len(entries) >= n:
            raise ParseError(lineno, f"more entries than the {n} declared in the header")
        entries.append(parse_line(line, d, L, lineno))
    if len(entries) != n:
        raise ParseError(len(entries) + 2, f"header declares {n} entries, found {len(entries)}")
    return Dataset(d, L, entries)


def load_dataset(path: Union[str, Path]) -> Dataset:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_dataset(fh)


def loads_dataset(text: str) -> Dataset:
    return parse_dataset(io.StringIO(text))


def _fmt_value(v: float) -> str:
    return str(int(v)) if v.is_integer() and abs(v) < 1e15 else repr(v)


def format_entry(x: SparseVector, y: LabelSet) -> str:
    feats = " ".join(f"{j}:{_fmt_value(v)}" for j, v in x)
    return ",".join(map(str, y)) + (" " + feats if feats else " ")


def write_dataset(ds: Dataset, stream: TextIO) -> None:
    stream.write(f"{ds.num_entries} {ds.num_features} {ds.num_labels}\n")
    for x, y in ds.entries:
        stream.write(format_entry(x, y) + "\n")


def dumps_dataset(ds: Dataset) -> str:
    buf = io.StringIO()
    write_dataset(ds, buf)
    return buf.getvalue()


# --- descriptive statistics ---------------------------------------------------


@dataclass(frozen=True)
class FiveNumberSummary:
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    average: float

    def as_dict(self) -> dict:
        return {"min": self.minimum, "q1": self.q1, "median": self.median,
                "q3": self.q3, "max": self.maximum, "avg": self.average}


def _quantile(sorted_vals: np.ndarray, p: float) -> float:
    # linear interpolation between order statistics at position (n - 1) * p
    h = (sorted_vals.size - 1) * p
    lo = math.floor(h)
    hi = min(lo + 1, sorted_vals.size - 1)
    return float(sorted_vals[lo] + (h - lo) * (sorted_vals[hi] - sorted_vals[lo]))


def summarize(values) -> FiveNumberSummary:
    arr = np.sort(np.asarray(values, dtype=np.float64))
    if arr.size == 0:
        raise ValueError("cannot summarize an empty list")
    return FiveNumberSummary(
        float(arr[0]), _quantile(arr, 0.25), _quantile(arr, 0.5),
        _quantile(arr, 0.75), float(arr[-1]), float(arr.mean()),
    )


STAT_NAMES = (
    "label_occurrences",
    "labels_per_entry",
    "feature_activations",
    "feature_occurrences",
)


def dataset_statistics(ds: Dataset) -> dict[str, FiveNumberSummary]:
    """The four summaries: per-label occurrences, labels per entry,
    non-zero features per entry and per-feature occurrences.

    Labels and features that never occur are left out of the per-item counts.
    """
    if ds.num_entries == 0:
        raise ValueError("dataset is empty")
    labels_per_entry = np.array([len(y) for _, y in ds.entries])
    activations = np.array([len(x) for x, _ in ds.entries])
    all_labels = np.fromiter((l for _, y in ds.entries for l in y), dtype=np.int64,
                             count=int(labels_per_entry.sum()))
    all_feats = np.concatenate([x.ids for x, _ in ds.entries])
    label_counts = np.bincount(all_labels, minlength=ds.num_labels)
    feat_counts = np.bincount(all_feats, minlength=ds.num_features)
    label_counts = label_counts[label_counts > 0]
    feat_counts = feat_counts[feat_counts > 0]
    out = {
        "labels_per_entry": summarize(labels_per_entry),
        "feature_activations": summarize(activations),
    }
    # a dataset with no labels / no features has nothing to count
    out["label_occurrences"] = summarize(label_counts) if label_counts.size else summarize([0])
    out["feature_occurrences"] = summarize(feat_counts) if feat_counts.size else summarize([0])
    return {k: out[k] for k in STAT_NAMES}


def statistics_json(stats: dict[str, FiveNumberSummary]) -> str:
    return json.dumps({k: v.as_dict() for k, v in stats.items()}, indent=2)


def statistics_table(stats: dict[str, FiveNumberSummary]) -> str:
    cols = ("Minimum", "1st Qu.", "Median", "3rd Qu.", "Maximum", "Average")
    width = max(len(k) for k in stats) + 2
    lines = ["".ljust(width) + "".join(c.rjust(10) for c in cols)]
    for name, s in stats.items():
        row = (s.minimum, s.q1, s.median, s.q3, s.maximum, s.average)
        lines.append(name.ljust(width) + "".join(f"{v:10.6g}" for v in row))
    return "\n".join(lines)
