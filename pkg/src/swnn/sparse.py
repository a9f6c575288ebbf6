"""Sparse vectors and the similarity primitives used for neighbour search.

A :class:`SparseVector` keeps its non-zero coordinates as two parallel numpy
arrays (ascending feature IDs and float64 values).  Every similarity here is
computed over the intersection of supports only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

GRAM_CAP = 64


class KernelCheckError(RuntimeError):
    """Raised when the Gram matrix eigensolver fails."""


@dataclass(frozen=True, eq=False)
class SparseVector:
    ids: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        ids = np.ascontiguousarray(self.ids, dtype=np.int64)
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if ids.ndim != 1 or ids.shape != values.shape:
            raise ValueError("ids and values must be 1-d arrays of equal length")
        if ids.size:
            if ids[0] < 0:
                raise ValueError("feature IDs must be non-negative")
            if np.any(ids[1:] <= ids[:-1]):
                raise ValueError("feature IDs must be strictly increasing")
            if np.any(values == 0.0):
                raise ValueError("explicit zeros are not allowed in a sparse vector")
        ids.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, float]]) -> "SparseVector":
        """Build from (feature_id, value) pairs in any order; zeros are dropped."""
        items = sorted((int(j), float(v)) for j, v in pairs if v != 0.0)
        if not items:
            return cls.empty()
        ids, values = zip(*items)
        return cls(np.array(ids), np.array(values))

    @classmethod
    def from_dict(cls, mapping: Mapping[int, float]) -> "SparseVector":
        return cls.from_pairs(mapping.items())

    @classmethod
    def from_dense(cls, dense: Sequence[float]) -> "SparseVector":
        arr = np.asarray(dense, dtype=np.float64)
        nz = np.flatnonzero(arr)
        return cls(nz, arr[nz])

    @classmethod
    def empty(cls) -> "SparseVector":
        return cls(np.empty(0, np.int64), np.empty(0, np.float64))

    def __len__(self) -> int:
        return int(self.ids.size)

    def __iter__(self):
        return zip(self.ids.tolist(), self.values.tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseVector):
            return NotImplemented
        return np.array_equal(self.ids, other.ids) and np.array_equal(self.values, other.values)

    def __repr__(self) -> str:
        body = ", ".join(f"{j}:{v:g}" for j, v in self)
        return f"SparseVector({{{body}}})"

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self.ids.tolist())

    def scaled(self, c: float) -> "SparseVector":
        if c == 0.0:
            return SparseVector.empty()
        return SparseVector(self.ids, self.values * c)

    def to_dense(self, dim: int) -> np.ndarray:
        out = np.zeros(dim)
        out[self.ids] = self.values
        return out


@dataclass(frozen=True)
class HyperParams:
    """Neighbourhood size ``S``, vote exponent ``alpha``, Jaccard exponent ``beta``."""

    S: int = 20
    alpha: float = 1.0
    beta: int = 1
    top_k: int = 5

    def __post_init__(self):
        if isinstance(self.beta, float):
            if not self.beta.is_integer():
                raise ValueError(f"beta must be a non-negative integer, got {self.beta}")
            object.__setattr__(self, "beta", int(self.beta))
        if not isinstance(self.S, (int, np.integer)) or self.S < 1:
            raise ValueError(f"S must be a positive integer, got {self.S!r}")
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be a finite value >= 0, got {self.alpha!r}")
        if self.beta < 0:
            raise ValueError(f"beta must be a non-negative integer, got {self.beta}")
        if not isinstance(self.top_k, (int, np.integer)) or self.top_k < 1:
            raise ValueError(f"top_k must be a positive integer, got {self.top_k!r}")


def parse_beta(text: str) -> int:
    """Parse a Jaccard exponent; fractional values are rejected."""
    try:
        value = float(text)
    except ValueError:
        raise ValueError(f"beta must be a non-negative integer, got {text!r}") from None
    if not value.is_integer() or value < 0:
        raise ValueError(f"beta must be a non-negative integer, got {text!r}")
    return int(value)


def _intersect(x: SparseVector, y: SparseVector):
    # both id arrays are sorted and unique, so this is a merge of two sorted lists
    _, ix, iy = np.intersect1d(x.ids, y.ids, assume_unique=True, return_indices=True)
    return ix, iy


def dot(x: SparseVector, y: SparseVector) -> float:
    ix, iy = _intersect(x, y)
    if ix.size == 0:
        return 0.0
    return float(np.sum(x.values[ix] * y.values[iy]))


def norm2(x: SparseVector) -> float:
    if not len(x):
        return 0.0
    return math.sqrt(float(np.sum(x.values * x.values)))


def jaccard(x: SparseVector, y: SparseVector) -> float:
    """Support overlap |A & B| / |A | B|; 0.0 when both supports are empty."""
    inter = _intersect(x, y)[0].size
    union = len(x) + len(y) - inter
    if union == 0:
        return 0.0
    return inter / union


def combine(dot_xy: float, inter: int, size_x: int, size_y: int,
            norm_x: float, norm_y: float, beta: int) -> float:
    """Jaccard**beta times cosine from precomputed parts.

    Shared by the pairwise path and the inverted index so both agree bit for bit
    given the same inputs.
    """
    if norm_x == 0.0 or norm_y == 0.0:
        return 0.0
    cos = dot_xy / (norm_x * norm_y)
    if beta == 0:
        return cos
    union = size_x + size_y - inter
    return (inter / union) ** beta * cos


def sim(x: SparseVector, y: SparseVector, beta: int) -> float:
    ix, iy = _intersect(x, y)
    d = float(np.sum(x.values[ix] * y.values[iy])) if ix.size else 0.0
    return combine(d, int(ix.size), len(x), len(y), norm2(x), norm2(y), beta)


def cosine(x: SparseVector, y: SparseVector) -> float:
    return sim(x, y, 0)


def gram_matrix(vectors: Sequence[SparseVector], beta: int) -> np.ndarray:
    n = len(vectors)
    g = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            g[i, j] = g[j, i] = sim(vectors[i], vectors[j], beta)
    return g


def gram_min_eigenvalue(vectors: Sequence[SparseVector], beta: int, cap: int = GRAM_CAP) -> float:
    """Smallest eigenvalue of the matrix ``G[i, j] = sim(v_i, v_j, beta)``."""
    if not 1 <= len(vectors) <= cap:
        raise ValueError(f"need between 1 and {cap} vectors, got {len(vectors)}")
    if int(beta) != beta or beta < 0:
        raise ValueError(f"beta must be a non-negative integer, got {beta!r}")
    g = gram_matrix(vectors, int(beta))
    try:
        eig = np.linalg.eigvalsh(g)
    except np.linalg.LinAlgError as exc:
        raise KernelCheckError(f"eigensolver did not converge: {exc}") from exc
    return float(eig[0])
