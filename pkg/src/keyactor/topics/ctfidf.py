"""Class-based term weighting over clustered documents.

Each non-noise cluster is treated as one concatenated pseudo-document. A
term x in cluster c gets weight tf(x, c) * ln(1 + A / f(x)), where tf is the
raw count of x inside c, f(x) its total count across all clusters and A the
average number of words per cluster. Weights are accumulated in one pass
over the documents.
"""

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ClusterNotFoundError, TopicModelError
from ..text import tokenize
from .cluster import ClusterAssignment


@dataclass(frozen=True)
class DocumentSet:
    doc_ids: tuple[str, ...]
    texts: tuple[str, ...]  # already preprocessed
    owners: tuple[str, ...]
    kind: str  # "thread" or "reply"

    def __post_init__(self):
        lengths = {len(self.doc_ids), len(self.texts), len(self.owners)}
        if len(lengths) != 1:
            raise ValueError(f"parallel document lists differ in length: {lengths}")

    def __len__(self):
        return len(self.doc_ids)


@dataclass(frozen=True)
class TopicModel:
    cluster_ids: tuple[int, ...]
    vocabulary: tuple[str, ...]
    term_freq: dict[int, Counter]  # tf(x, c) per cluster
    corpus_freq: Counter  # f(x) across clusters
    avg_words_per_cluster: float  # A
    doc_counts: dict[int, int]
    weights: dict[int, dict[str, float]] = field(repr=False)

    def weight(self, term: str, cluster: int) -> float:
        if cluster not in self.weights:
            raise ClusterNotFoundError(f"unknown cluster {cluster}")
        return self.weights[cluster].get(term, 0.0)


def ctfidf_weights(docs: DocumentSet, assignment: ClusterAssignment) -> TopicModel:
    """Term weights per cluster; noise documents are ignored entirely."""
    labels = np.asarray(assignment.labels)
    if len(labels) != len(docs):
        raise ValueError(f"{len(labels)} labels for {len(docs)} documents")
    tf: dict[int, Counter] = {}
    for label, text in zip(labels, docs.texts):
        if label < 0:
            continue
        counter = tf.setdefault(int(label), Counter())
        counter.update(tokenize(text))
    if not tf:
        raise TopicModelError("no non-noise cluster: every document is noise")

    corpus_freq: Counter = Counter()
    for counter in tf.values():
        corpus_freq.update(counter)
    total_words = sum(corpus_freq.values())
    avg_words = total_words / len(tf)

    weights = {
        c: {term: count * math.log(1.0 + avg_words / corpus_freq[term]) for term, count in counter.items()}
        for c, counter in tf.items()
    }
    doc_counts = {c: int((labels == c).sum()) for c in tf}
    return TopicModel(
        cluster_ids=tuple(sorted(tf)),
        vocabulary=tuple(sorted(corpus_freq)),
        term_freq=tf,
        corpus_freq=corpus_freq,
        avg_words_per_cluster=avg_words,
        doc_counts=doc_counts,
        weights=weights,
    )


def top_terms(model: TopicModel, cluster: int, k: int) -> list[tuple[str, float]]:
    """k heaviest (term, weight) pairs of a cluster, ties lexicographic."""
    if cluster not in model.weights:
        raise ClusterNotFoundError(f"unknown cluster {cluster}")
    if k <= 0:
        return []
    ranked = sorted(model.weights[cluster].items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:k]


def model_to_json(model: TopicModel, params: dict, top_k: int = 10) -> dict:
    return {
        "schema": "keyactor/topic-model/v1",
        "parameters": params,
        "clusters": [
            {
                "cluster_id": c,
                "size": model.doc_counts[c],
                "terms": [{"term": t, "weight": w} for t, w in top_terms(model, c, top_k)],
            }
            for c in model.cluster_ids
        ],
    }


def save_model(model: TopicModel, params: dict, path, top_k: int = 10) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(model_to_json(model, params, top_k), fh, sort_keys=True, indent=2)
        fh.write("\n")
