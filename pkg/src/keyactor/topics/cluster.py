"""Density clustering without a preset cluster count.

The procedure is the HDBSCAN core: core distances at ``min_cluster_size``
neighbors, a minimum spanning tree of the mutual-reachability graph, a
single-linkage hierarchy, condensation of that hierarchy, and excess-of-mass
cluster extraction. Points that never join a stable cluster are labeled -1.

The dense MST construction is the hot loop and lives in ``_kernels`` (two
interchangeable backends); everything after it is linear-ish bookkeeping.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .._kernels import mutual_reachability_mst


@dataclass(frozen=True)
class ClusterAssignment:
    labels: np.ndarray  # one label per point, -1 for noise
    n_clusters: int

    def __post_init__(self):
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=np.int64))

    def members(self, cluster: int) -> np.ndarray:
        return np.flatnonzero(self.labels == cluster)


def _all_noise(n: int) -> ClusterAssignment:
    return ClusterAssignment(labels=np.full(n, -1, dtype=np.int64), n_clusters=0)


def core_distances(points: np.ndarray, min_cluster_size: int) -> np.ndarray:
    """Distance to the min_cluster_size-th nearest neighbor, the point itself
    counted as its own first neighbor."""
    tree = cKDTree(points)
    dists, _ = tree.query(points, k=min_cluster_size)
    return np.ascontiguousarray(dists[:, -1] if min_cluster_size > 1 else dists)


class _UnionFind:
    """Union-find over linkage node ids (leaves 0..n-1, merges n..2n-2)."""

    def __init__(self, n):
        self.parent = np.arange(2 * n - 1, dtype=np.int64)
        self.size = np.concatenate([np.ones(n, dtype=np.int64), np.zeros(n - 1, dtype=np.int64)])
        self.next_label = n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> int:
        new = self.next_label
        self.next_label += 1
        self.parent[a] = self.parent[b] = new
        self.size[new] = self.size[a] + self.size[b]
        return new


def _single_linkage(edges: np.ndarray, weights: np.ndarray, n: int) -> np.ndarray:
    """Rows (left, right, distance, size), merge i creating node id n+i."""
    order = np.lexsort((edges[:, 1], edges[:, 0], weights))
    uf = _UnionFind(n)
    linkage = np.empty((n - 1, 4))
    for row, i in enumerate(order):
        a = uf.find(int(edges[i, 0]))
        b = uf.find(int(edges[i, 1]))
        linkage[row] = (a, b, weights[i], uf.size[a] + uf.size[b])
        uf.union(a, b)
    return linkage


def _leaves_under(linkage: np.ndarray, node: int, n: int) -> list[int]:
    out, stack = [], [node]
    while stack:
        x = stack.pop()
        if x < n:
            out.append(x)
        else:
            stack.append(int(linkage[x - n, 0]))
            stack.append(int(linkage[x - n, 1]))
    return out


def _condense(linkage: np.ndarray, n: int, min_cluster_size: int):
    """Collapse the single-linkage tree into (parent, child, lambda, size)
    rows; children smaller than min_cluster_size dissolve into point rows."""
    root = 2 * n - 2
    relabel = {root: n}
    next_label = n + 1
    rows: list[tuple[int, int, float, int]] = []
    stack = [root]
    while stack:
        node = stack.pop()
        left, right, dist = int(linkage[node - n, 0]), int(linkage[node - n, 1]), linkage[node - n, 2]
        lam = 1.0 / dist if dist > 0.0 else np.inf
        sizes = [1 if c < n else int(linkage[c - n, 3]) for c in (left, right)]
        cluster = relabel[node]
        big_enough = [s >= min_cluster_size for s in sizes]
        if all(big_enough):
            for child in (left, right):
                relabel[child] = next_label
                rows.append((cluster, next_label, lam, 1 if child < n else int(linkage[child - n, 3])))
                next_label += 1
                if child >= n:
                    stack.append(child)
        elif not any(big_enough):
            for child in (left, right):
                for leaf in _leaves_under(linkage, child, n):
                    rows.append((cluster, leaf, lam, 1))
        else:
            keep, shed = (left, right) if big_enough[0] else (right, left)
            relabel[keep] = cluster
            if keep >= n:
                stack.append(keep)
            for leaf in _leaves_under(linkage, shed, n):
                rows.append((cluster, leaf, lam, 1))
    return rows, next_label


def _gap(lam: float, birth: float) -> float:
    # inf - inf arises only on exactly-coincident points; their residence
    # time in the cluster is zero, not undefined.
    if np.isinf(lam) and np.isinf(birth):
        return 0.0
    return lam - birth


def _extract_eom(rows, n: int, next_label: int) -> tuple[np.ndarray, int]:
    births = {n: 0.0}
    children: dict[int, list[int]] = {}
    cluster_parent: dict[int, int] = {}
    for parent, child, lam, _size in rows:
        if child >= n:
            births[child] = lam
            children.setdefault(parent, []).append(child)
            cluster_parent[child] = parent

    stability = {c: 0.0 for c in range(n, next_label)}
    for parent, _child, lam, size in rows:
        stability[parent] += _gap(lam, births[parent]) * size

    selected: dict[int, bool] = {}
    for c in range(next_label - 1, n - 1, -1):
        kids = children.get(c, [])
        if not kids:
            selected[c] = True
            continue
        subtree = sum(stability[k] for k in kids)
        if stability[c] > subtree:
            selected[c] = True
            stack = list(kids)
            while stack:
                k = stack.pop()
                selected[k] = False
                stack.extend(children.get(k, []))
        else:
            stability[c] = subtree
            selected[c] = False

    chosen = sorted(c for c, keep in selected.items() if keep)
    label_of = {c: i for i, c in enumerate(chosen)}
    labels = np.full(n, -1, dtype=np.int64)
    for parent, child, _lam, _size in rows:
        if child >= n:
            continue
        q = parent
        while q is not None and q not in label_of:
            q = cluster_parent.get(q)
        if q is not None:
            labels[child] = label_of[q]
    return labels, len(chosen)


def cluster_density(points, min_cluster_size: int = 10) -> ClusterAssignment:
    """Cluster points of any dimensionality; degenerate input is all-noise,
    never an error."""
    if min_cluster_size < 2:
        raise ValueError(f"min_cluster_size must be >= 2, got {min_cluster_size}")
    points = np.ascontiguousarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    n = points.shape[0]
    if n < min_cluster_size:
        return _all_noise(n)

    core = core_distances(points, min_cluster_size)
    edges, weights = mutual_reachability_mst(points, core)
    linkage = _single_linkage(edges, weights, n)
    rows, next_label = _condense(linkage, n, min_cluster_size)
    labels, n_clusters = _extract_eom(rows, n, next_label)
    return ClusterAssignment(labels=labels, n_clusters=n_clusters)
