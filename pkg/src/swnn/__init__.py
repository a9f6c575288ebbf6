"""Sparse weighted nearest-neighbour classifier for extreme multi-label data."""
from .classifier import Prediction, predict, predict_batch
from .dataset import Dataset, FiveNumberSummary, ParseError, dataset_statistics, load_dataset, summarize
from .evaluation import EvalReport, evaluate, max_precision_at_k, precision_at_k
from .index import CandidateScore, TrainingIndex, build_index, load_index, save_index, score_candidates
from .ovr import SparseWeightIndex, load_weights, ovr_scores
from .sparse import HyperParams, SparseVector, cosine, dot, gram_min_eigenvalue, jaccard, norm2, sim

__version__ = "0.1.0"

__all__ = [
    "Prediction",
    "predict",
    "predict_batch",
    "Dataset",
    "FiveNumberSummary",
    "ParseError",
    "dataset_statistics",
    "load_dataset",
    "summarize",
    "EvalReport",
    "evaluate",
    "max_precision_at_k",
    "precision_at_k",
    "CandidateScore",
    "TrainingIndex",
    "build_index",
    "load_index",
    "save_index",
    "score_candidates",
    "SparseWeightIndex",
    "load_weights",
    "ovr_scores",
    "HyperParams",
    "SparseVector",
    "cosine",
    "dot",
    "gram_min_eigenvalue",
    "jaccard",
    "norm2",
    "sim",
]
