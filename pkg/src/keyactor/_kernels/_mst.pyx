# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Prim's MST over mutual-reachability distances.

Identical contract to keyactor._kernels._fallback.mutual_reachability_mst;
the inner loop is the clustering hot path (O(n^2 * d) distance evaluations).
"""

from libc.math cimport INFINITY, sqrt

import numpy as np


def mutual_reachability_mst(points, core):
    pts = np.ascontiguousarray(points, dtype=np.float64)
    cor = np.ascontiguousarray(core, dtype=np.float64)
    cdef double[:, ::1] p = pts
    cdef double[::1] c = cor
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t d = p.shape[1]

    edges_arr = np.empty((max(n - 1, 0), 2), dtype=np.int64)
    weights_arr = np.empty(max(n - 1, 0), dtype=np.float64)
    if n <= 1:
        return edges_arr, weights_arr

    in_tree_arr = np.zeros(n, dtype=np.uint8)
    dist_arr = np.full(n, np.inf)
    closest_arr = np.zeros(n, dtype=np.int64)

    cdef long long[:, ::1] edges = edges_arr
    cdef double[::1] weights = weights_arr
    cdef unsigned char[::1] in_tree = in_tree_arr
    cdef double[::1] dist = dist_arr
    cdef long long[::1] closest = closest_arr

    cdef Py_ssize_t current = 0, step, j, k, best
    cdef double s, diff, reach, bestd, cc

    in_tree[0] = 1
    for step in range(n - 1):
        cc = c[current]
        best = -1
        bestd = INFINITY
        for j in range(n):
            if in_tree[j]:
                continue
            s = 0.0
            for k in range(d):
                diff = p[current, k] - p[j, k]
                s += diff * diff
            reach = sqrt(s)
            if cc > reach:
                reach = cc
            if c[j] > reach:
                reach = c[j]
            if reach < dist[j]:
                dist[j] = reach
                closest[j] = current
            if dist[j] < bestd:
                bestd = dist[j]
                best = j
        edges[step, 0] = closest[best]
        edges[step, 1] = best
        weights[step] = dist[best]
        in_tree[best] = 1
        current = best
    return edges_arr, weights_arr
