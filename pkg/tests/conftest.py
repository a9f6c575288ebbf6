"""Shared brute-force oracles.

These work on dense numpy rows and Python sets so they share no code with the
sparse merge or the inverted index.
"""
import math

import numpy as np
import pytest

from swnn.synthetic import random_dataset


def dense_rows(vectors, dim):
    out = np.zeros((len(vectors), dim))
    for i, v in enumerate(vectors):
        for j, val in v:
            out[i, j] = val
    return out


def oracle_sim(a, b, beta):
    """Jaccard**beta * cosine on dense rows."""
    sa, sb = set(np.flatnonzero(a)), set(np.flatnonzero(b))
    na, nb = math.sqrt(sum(v * v for v in a)), math.sqrt(sum(v * v for v in b))
    if na == 0 or nb == 0:
        return 0.0
    union = len(sa | sb)
    jac = len(sa & sb) / union if union else 0.0
    return (jac ** beta if beta else 1.0) * float(np.dot(a, b)) / (na * nb)


def tie_sorted(items, rtol=1e-12):
    """Sort (value, key) pairs by value descending, chaining values within
    ``rtol`` of their predecessor into one group ordered by key."""
    items = sorted(items, key=lambda vk: -vk[0])
    out, group, prev = [], 0, None
    for v, k in items:
        if prev is not None and prev - v > rtol * abs(prev):
            group += 1
        out.append((group, k, v))
        prev = v
    return [(v, k) for _, k, v in sorted(out)]


def oracle_predict(train_rows, train_labels, query_row, S, alpha, beta, top_k):
    """Full scan: sim against every entry, keep positives, sort, vote."""
    sims = [(oracle_sim(query_row, r, beta), i) for i, r in enumerate(train_rows)]
    cands = tie_sorted((s, i) for s, i in sims if s > 0)[:S]
    scores = {}
    for s, i in cands:
        for l in train_labels[i]:
            scores[l] = scores.get(l, 0.0) + s ** alpha
    ranked = tie_sorted((v, l) for l, v in scores.items())[:top_k]
    return [i for _, i in cands], [(l, v) for v, l in ranked]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_dataset(rng):
    return random_dataset(rng, n=60, dim=80, num_labels=30, max_nnz=8, max_labels=4)


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{status:<5} {name}: {detail}")
