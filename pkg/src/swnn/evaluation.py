"""Precision@K, its achievable ceiling, and evaluation reports."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

from .classifier import LatencyStats, predict_batch
from .dataset import Dataset
from .index import TrainingIndex
from .sparse import HyperParams


def _labels_of(p) -> Sequence[int]:
    if hasattr(p, "ranked"):
        return [l for l, _ in p.ranked]
    return [l[0] if isinstance(l, tuple) else int(l) for l in p]


def precision_at_k(predictions: Sequence, truths: Sequence, K: int) -> float:
    """Mean over entries of hits among the first K predicted labels, divided by K.

    ``predictions`` items may be :class:`Prediction` objects or label
    sequences; missing ranks count as misses.
    """
    if len(predictions) != len(truths):
        raise ValueError(f"{len(predictions)} predictions for {len(truths)} test entries")
    if not truths:
        raise ValueError("empty test set")
    if K < 1:
        raise ValueError("K must be >= 1")
    total = 0
    for p, y in zip(predictions, truths):
        y = set(y)
        total += sum(1 for l in _labels_of(p)[:K] if l in y)
    return total / (K * len(truths))


def max_precision_at_k(truths: Sequence, K: int) -> float:
    if not truths:
        raise ValueError("empty test set")
    if K < 1:
        raise ValueError("K must be >= 1")
    return sum(min(K, len(y)) for y in truths) / (K * len(truths))


@dataclass
class EvalReport:
    precision_at: dict
    max_precision_at: dict
    n_test: int
    hyper_params: HyperParams
    latency: Optional[LatencyStats] = None
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self, include_latency: bool = True) -> dict:
        out = {
            "n_test": self.n_test,
            "hyper_params": asdict(self.hyper_params),
            "precision_at": {str(k): v for k, v in sorted(self.precision_at.items())},
            "max_precision_at": {str(k): v for k, v in sorted(self.max_precision_at.items())},
            "diagnostics": dict(sorted(self.diagnostics.items())),
        }
        if include_latency and self.latency is not None:
            out["latency"] = self.latency.as_dict()
        return out

    def to_json(self, include_latency: bool = True) -> str:
        return json.dumps(self.as_dict(include_latency), indent=2, sort_keys=True)

    def to_text(self, include_latency: bool = True) -> str:
        hp = self.hyper_params
        lines = [f"n_test={self.n_test}  S={hp.S} alpha={hp.alpha} beta={hp.beta}",
                 f"{'K':>4}{'P@K (%)':>12}{'Max (%)':>12}"]
        for k in sorted(self.precision_at):
            lines.append(f"{k:>4}{100 * self.precision_at[k]:>12.2f}{100 * self.max_precision_at[k]:>12.2f}")
        if include_latency and self.latency is not None:
            lat = self.latency
            lines.append(f"latency ms/query: mean={lat.mean_ms:.3f} p50={lat.p50_ms:.3f} "
                         f"p99={lat.p99_ms:.3f}  ({lat.queries_per_sec:.1f} q/s)")
        return "\n".join(lines)


def evaluate(idx: TrainingIndex, test: Dataset, hp: HyperParams, Ks: Sequence[int] = (1, 3, 5),
             workers: int = 1, *, fallback: Optional[str] = None,
             query_support: str = "full", timing: bool = True) -> EvalReport:
    Ks = sorted(set(int(k) for k in Ks))
    if not Ks or Ks[0] < 1:
        raise ValueError("Ks must be positive integers")
    # rank deep enough for the largest K regardless of the requested top_k
    run_hp = HyperParams(hp.S, hp.alpha, hp.beta, max(hp.top_k, Ks[-1]))
    res = predict_batch(idx, test.features, run_hp, workers, fallback=fallback,
                        query_support=query_support, benchmark=timing)
    truths = test.labels
    diagnostics = {
        "empty_predictions": sum(1 for p in res.predictions if not p.ranked),
        "unlabelled_test_entries": sum(1 for y in truths if not y),
        "skipped_query_features": sum(int((x.ids >= idx.num_features).sum()) for x in test.features),
    }
    return EvalReport(
        precision_at={k: precision_at_k(res.predictions, truths, k) for k in Ks},
        max_precision_at={k: max_precision_at_k(truths, k) for k in Ks},
        n_test=len(truths),
        hyper_params=hp,
        latency=res.latency,
        diagnostics=diagnostics,
    )
