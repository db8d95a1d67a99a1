"""Pure-numpy kernels, used when the compiled extension is unavailable.

Same contract as the compiled versions. For narrow point matrices (fewer
than 8 columns, which covers the reduced topic space) the arithmetic order
matches the compiled kernel exactly, so both backends produce identical
spanning trees; at higher widths trees may differ in 1-ulp tie-breaks while
the resulting clustering stays the same.
"""

import numpy as np


def mutual_reachability_mst(points: np.ndarray, core: np.ndarray):
    """Prim's MST over the complete mutual-reachability graph.

    Distances are computed on the fly from ``points`` (n x d) so the n x n
    matrix is never materialized. ``core[i]`` is the core distance of point
    i; the edge weight between i and j is max(d(i,j), core[i], core[j]).

    Returns (edges, weights): ``edges`` is (n-1, 2) int64 with edge i added
    at step i, ``weights`` the matching mutual-reachability distances.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    core = np.ascontiguousarray(core, dtype=np.float64)
    n = points.shape[0]
    edges = np.empty((max(n - 1, 0), 2), dtype=np.int64)
    weights = np.empty(max(n - 1, 0), dtype=np.float64)
    if n <= 1:
        return edges, weights

    in_tree = np.zeros(n, dtype=bool)
    dist = np.full(n, np.inf)
    closest = np.zeros(n, dtype=np.int64)
    current = 0
    in_tree[0] = True
    for step in range(n - 1):
        diff = points - points[current]
        d = np.sqrt((diff * diff).sum(axis=1))
        reach = np.maximum(np.maximum(d, core[current]), core)
        better = ~in_tree & (reach < dist)
        dist[better] = reach[better]
        closest[better] = current
        best = int(np.argmin(np.where(in_tree, np.inf, dist)))
        edges[step, 0] = closest[best]
        edges[step, 1] = best
        weights[step] = dist[best]
        in_tree[best] = True
        current = best
    return edges, weights
