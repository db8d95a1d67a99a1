"""Per-user topic extraction: embed -> reduce -> cluster -> term weights.

Thread documents are thread titles, reply documents are post bodies; both
are normalized before counting. Topics are modeled corpus-wide per document
kind and then attributed to every user who owns at least one document in a
cluster.
"""

from dataclasses import asdict, dataclass

import numpy as np

from ..corpus import ForumCorpus
from ..text import preprocess_text
from .cluster import ClusterAssignment, cluster_density
from .ctfidf import DocumentSet, TopicModel, ctfidf_weights, top_terms
from .reduce import Reducer, reduce_dimensions


@dataclass(frozen=True)
class TopicParams:
    target_dim: int = 5
    min_cluster_size: int = 10
    top_k: int = 10
    seed: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def collect_documents(corpus: ForumCorpus, kind: str) -> DocumentSet:
    """Document set of one kind; empty-after-normalization texts are dropped
    (they carry no countable terms)."""
    if kind == "thread":
        raw = [(t.thread_id, t.title, t.author_id) for t in corpus.threads]
    elif kind == "reply":
        raw = [(p.post_id, p.body, p.author_id) for p in corpus.posts]
    else:
        raise ValueError(f"kind must be 'thread' or 'reply', got {kind!r}")
    ids, texts, owners = [], [], []
    for doc_id, text, owner in raw:
        clean = preprocess_text(text)
        if clean:
            ids.append(doc_id)
            texts.append(clean)
            owners.append(owner)
    return DocumentSet(doc_ids=tuple(ids), texts=tuple(texts), owners=tuple(owners), kind=kind)


def embed_documents(docs: DocumentSet, provider) -> np.ndarray:
    """Mean-pooled token vectors per document, (n_docs, provider.dimension)."""
    out = np.empty((len(docs), provider.dimension))
    for i, text in enumerate(docs.texts):
        vectors = provider.encode_tokens(provider.tokenize(text))
        out[i] = vectors.mean(axis=0)
    return out


def build_topic_model(
    docs: DocumentSet,
    provider,
    params: TopicParams = TopicParams(),
    reducer: Reducer | None = None,
) -> tuple[TopicModel | None, ClusterAssignment]:
    """Run the full workflow for one document kind.

    Returns (None, all-noise assignment) when no stable cluster exists; small
    corpora are a normal condition for callers, not an error.
    """
    if len(docs) == 0:
        return None, ClusterAssignment(labels=np.empty(0, dtype=np.int64), n_clusters=0)
    matrix = embed_documents(docs, provider)
    target = min(params.target_dim, matrix.shape[1])
    reduced = reduce_dimensions(matrix, target, reducer)
    assignment = cluster_density(reduced, params.min_cluster_size)
    if assignment.n_clusters == 0:
        return None, assignment
    return ctfidf_weights(docs, assignment), assignment


def attribute_topics(
    docs: DocumentSet,
    model: TopicModel,
    assignment: ClusterAssignment,
    top_k: int,
) -> dict[str, list[str]]:
    """Merge the top-k terms of every cluster a user contributed a document
    to, ordered by weight (ties lexicographic), deduplicated."""
    cluster_terms = {c: top_terms(model, c, top_k) for c in model.cluster_ids}
    user_clusters: dict[str, set[int]] = {}
    for owner, label in zip(docs.owners, assignment.labels):
        if label >= 0:
            user_clusters.setdefault(owner, set()).add(int(label))

    out: dict[str, list[str]] = {}
    for user, clusters in user_clusters.items():
        merged: list[tuple[str, float]] = []
        for c in sorted(clusters):
            merged.extend(cluster_terms[c])
        merged.sort(key=lambda kv: (-kv[1], kv[0]))
        seen: set[str] = set()
        ordered = []
        for term, _w in merged:
            if term not in seen:
                seen.add(term)
                ordered.append(term)
        out[user] = ordered
    return out


def user_topics(
    corpus: ForumCorpus,
    provider,
    kind: str,
    params: TopicParams = TopicParams(),
    reducer: Reducer | None = None,
) -> dict[str, list[str]]:
    """Topic terms per user for one document kind; users with no documents
    of the kind (or no stable clusters at all) get an empty list."""
    docs = collect_documents(corpus, kind)
    model, assignment = build_topic_model(docs, provider, params, reducer)
    topics: dict[str, list[str]] = {u.user_id: [] for u in corpus.users}
    if model is None:
        return topics
    for user, terms in attribute_topics(docs, model, assignment, params.top_k).items():
        if user in topics:
            topics[user] = terms
    return topics
