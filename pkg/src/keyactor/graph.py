"""Typed user-interaction graph and adjacency normalization.

Three relations connect users: ``quoted_reply`` (a user quoted another
user's post), ``thread`` (a thread author and someone who replied in that
thread), and ``contract`` (an initiated agreement). Edges are stored
directed with multiplicity collapsed into an integer weight; message passing
always sees the symmetric closure, and same-user interactions never create
an edge.
"""

import json
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .corpus import ForumCorpus
from .rng import rng_for

RELATIONS = ("quoted_reply", "thread", "contract")

LABEL_KEY = 1
LABEL_NON_KEY = 0
LABEL_UNLABELED = -1

SPLIT_TRAIN, SPLIT_VAL, SPLIT_TEST, SPLIT_NONE = 0, 1, 2, -1
_SPLIT_NAMES = {SPLIT_TRAIN: "train", SPLIT_VAL: "val", SPLIT_TEST: "test", SPLIT_NONE: None}
_LABEL_NAMES = {LABEL_KEY: "key", LABEL_NON_KEY: "non-key", LABEL_UNLABELED: None}


@dataclass(frozen=True)
class ForumGraph:
    user_ids: tuple[str, ...]
    edges: dict  # relation -> (m, 3) int64 array of (src, dst, weight)
    labels: np.ndarray  # (n,) int: 1 key / 0 non-key / -1 unlabeled
    splits: np.ndarray  # (n,) int: 0 train / 1 val / 2 test / -1 none
    features: np.ndarray | None = field(default=None, repr=False)

    @property
    def num_nodes(self) -> int:
        return len(self.user_ids)

    @cached_property
    def _index(self) -> dict[str, int]:
        return {u: i for i, u in enumerate(self.user_ids)}

    def index_of(self, user_id: str) -> int:
        return self._index[user_id]

    def propagation_edges(self, relation: str | None = None) -> tuple[np.ndarray, np.ndarray]:
        """(src, dst) arrays of the symmetric closure, deduplicated and
        sorted; one relation or the merged edge set."""
        rels = (relation,) if relation is not None else RELATIONS
        pairs: set[tuple[int, int]] = set()
        for rel in rels:
            for s, d, _w in self.edges.get(rel, np.empty((0, 3), dtype=np.int64)):
                pairs.add((int(s), int(d)))
                pairs.add((int(d), int(s)))
        if not pairs:
            return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
        arr = np.array(sorted(pairs), dtype=np.int64)
        return arr[:, 0], arr[:, 1]

    def edge_count(self, relation: str) -> int:
        return len(self.edges.get(relation, ()))


def build_graph(corpus: ForumCorpus) -> ForumGraph:
    """Graph over all corpus users; labels and splits start unassigned."""
    user_ids = tuple(u.user_id for u in corpus.users)
    index = {u: i for i, u in enumerate(user_ids)}
    counters: dict[str, dict[tuple[int, int], int]] = {rel: {} for rel in RELATIONS}

    def bump(rel: str, src: str, dst: str):
        if src == dst:
            return
        key = (index[src], index[dst])
        counters[rel][key] = counters[rel].get(key, 0) + 1

    for post in corpus.posts:
        thread = corpus.threads_by_id.get(post.thread_id)
        if thread is not None:
            bump("thread", thread.author_id, post.author_id)
        if post.quoted_post_id is not None:
            quoted = corpus.posts_by_id.get(post.quoted_post_id)
            if quoted is not None:
                bump("quoted_reply", post.author_id, quoted.author_id)
    for contract in corpus.contracts:
        bump("contract", contract.initiator_id, contract.counterparty_id)

    edges = {}
    for rel, counter in counters.items():
        rows = sorted((s, d, w) for (s, d), w in counter.items())
        edges[rel] = np.array(rows, dtype=np.int64).reshape(-1, 3)

    n = len(user_ids)
    return ForumGraph(
        user_ids=user_ids,
        edges=edges,
        labels=np.full(n, LABEL_UNLABELED, dtype=np.int64),
        splits=np.full(n, SPLIT_NONE, dtype=np.int64),
    )


@dataclass(frozen=True)
class NormalizedAdjacency:
    relation: str | None
    mode: str  # "symmetric" or "row"
    matrix: sp.csr_matrix
    self_loops: bool


def normalize_adjacency(graph: ForumGraph, mode: str = "symmetric", relation: str | None = None) -> NormalizedAdjacency:
    """symmetric: D^-1/2 (A+I) D^-1/2 over the (merged or single-relation)
    undirected adjacency. row: each row of one relation's adjacency divided
    by its degree, no self loops, isolated rows all-zero."""
    n = graph.num_nodes
    if n == 0:
        raise ValueError("cannot normalize an empty graph")
    src, dst = graph.propagation_edges(relation)
    if mode == "symmetric":
        src = np.concatenate([src, np.arange(n)])
        dst = np.concatenate([dst, np.arange(n)])
        a = sp.csr_matrix((np.ones(len(src)), (dst, src)), shape=(n, n))
        a.sum_duplicates()
        deg = np.asarray(a.sum(axis=1)).ravel()
        inv_sqrt = np.where(deg > 0, 1.0 / np.sqrt(np.maximum(deg, 1e-300)), 0.0)
        norm = sp.diags(inv_sqrt) @ a @ sp.diags(inv_sqrt)
        return NormalizedAdjacency(relation=relation, mode=mode, matrix=sp.csr_matrix(norm), self_loops=True)
    if mode == "row":
        a = sp.csr_matrix((np.ones(len(src)), (dst, src)), shape=(n, n))
        a.sum_duplicates()
        deg = np.asarray(a.sum(axis=1)).ravel()
        inv = np.where(deg > 0, 1.0 / np.maximum(deg, 1e-300), 0.0)
        norm = sp.diags(inv) @ a
        return NormalizedAdjacency(relation=relation, mode=mode, matrix=sp.csr_matrix(norm), self_loops=False)
    raise ValueError(f"unknown normalization mode {mode!r}")


def with_labels(graph: ForumGraph, label_by_user: dict[str, str]) -> ForumGraph:
    labels = np.full(graph.num_nodes, LABEL_UNLABELED, dtype=np.int64)
    for i, uid in enumerate(graph.user_ids):
        lab = label_by_user.get(uid)
        if lab == "key":
            labels[i] = LABEL_KEY
        elif lab == "non-key":
            labels[i] = LABEL_NON_KEY
    return replace(graph, labels=labels)


def with_features(graph: ForumGraph, feature_by_user: dict[str, np.ndarray]) -> ForumGraph:
    dims = {np.asarray(v).shape[0] for v in feature_by_user.values()}
    if len(dims) != 1:
        raise ValueError(f"feature vectors differ in dimension: {dims}")
    dim = dims.pop()
    feats = np.zeros((graph.num_nodes, dim))
    missing = []
    for i, uid in enumerate(graph.user_ids):
        vec = feature_by_user.get(uid)
        if vec is None:
            missing.append(uid)
        else:
            feats[i] = np.asarray(vec, dtype=np.float64)
    if missing:
        raise ValueError(f"missing features for {len(missing)} users, e.g. {missing[:3]}")
    return replace(graph, features=feats)


def assign_splits(graph: ForumGraph, fractions=(0.6, 0.2, 0.2), seed: int = 0) -> ForumGraph:
    """Stratified-by-label seeded split of all labeled nodes."""
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError(f"split fractions must sum to 1, got {fractions}")
    splits = np.full(graph.num_nodes, SPLIT_NONE, dtype=np.int64)
    rng = rng_for(seed, "graph-split")
    for label in (LABEL_NON_KEY, LABEL_KEY):
        idx = np.flatnonzero(graph.labels == label)
        idx = rng.permutation(idx)
        n_train = int(round(fractions[0] * len(idx)))
        n_val = int(round(fractions[1] * len(idx)))
        splits[idx[:n_train]] = SPLIT_TRAIN
        splits[idx[n_train : n_train + n_val]] = SPLIT_VAL
        splits[idx[n_train + n_val :]] = SPLIT_TEST
    return replace(graph, splits=splits)


def graph_to_json(graph: ForumGraph) -> dict:
    return {
        "schema": "keyactor/graph/v1",
        "nodes": list(graph.user_ids),
        "edges": {rel: [[int(s), int(d), int(w)] for s, d, w in graph.edges[rel]] for rel in RELATIONS},
        "labels": [_LABEL_NAMES[int(l)] for l in graph.labels],
        "splits": [_SPLIT_NAMES[int(s)] for s in graph.splits],
    }


def graph_from_json(obj: dict) -> ForumGraph:
    label_codes = {"key": LABEL_KEY, "non-key": LABEL_NON_KEY, None: LABEL_UNLABELED}
    split_codes = {"train": SPLIT_TRAIN, "val": SPLIT_VAL, "test": SPLIT_TEST, None: SPLIT_NONE}
    return ForumGraph(
        user_ids=tuple(obj["nodes"]),
        edges={rel: np.array(obj["edges"].get(rel, []), dtype=np.int64).reshape(-1, 3) for rel in RELATIONS},
        labels=np.array([label_codes[l] for l in obj["labels"]], dtype=np.int64),
        splits=np.array([split_codes[s] for s in obj["splits"]], dtype=np.int64),
    )


def save_graph(graph: ForumGraph, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(graph_to_json(graph), fh, sort_keys=True)
        fh.write("\n")


def load_graph(path) -> ForumGraph:
    from .artifacts import read_json

    return graph_from_json(read_json(path, expect_schema="keyactor/graph/v1"))
