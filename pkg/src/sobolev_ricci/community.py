"""Louvain modularity clustering, modularity and the adjusted Rand index."""
from __future__ import annotations

from collections import defaultdict

import numpy as np
from scipy.special import comb

from .exceptions import SizeMismatch
from .graph import WeightedGraph

RESOLUTION_GRID = (0.5, 0.75, 1.0, 1.5, 2.0)
MAX_SWEEPS = 1000


def _dense_labels(labels) -> np.ndarray:
    """Relabel to 0..K-1 in order of first appearance."""
    _, first, inv = np.unique(np.asarray(labels), return_index=True, return_inverse=True)
    rank = np.argsort(np.argsort(first))
    return rank[inv].astype(np.int64)


def _edge_weights(graph: WeightedGraph, weights) -> np.ndarray:
    w = graph.length if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (graph.m,):
        raise SizeMismatch("weight vector does not match edge count")
    if np.any(w < 0):
        raise ValueError("Louvain needs nonnegative similarity weights")
    return w


def modularity(graph: WeightedGraph, labels, weights=None, resolution: float = 1.0) -> float:
    """Newman modularity of a partition under similarity ``weights``.

    ``weights`` defaults to the graph's edge lengths.
    """
    w = _edge_weights(graph, weights)
    labels = np.asarray(labels)
    if labels.shape != (graph.node_count,):
        raise SizeMismatch("partition does not cover every node")
    two_m = 2.0 * w.sum()
    if two_m == 0:
        return 0.0
    lab = _dense_labels(labels)
    K = lab.max() + 1
    k = np.bincount(graph.u, w, graph.node_count) + np.bincount(graph.v, w, graph.node_count)
    tot = np.bincount(lab, k, K)
    inside = lab[graph.u] == lab[graph.v]
    internal = np.bincount(lab[graph.u][inside], w[inside], K)
    return float(np.sum(2.0 * internal / two_m - resolution * (tot / two_m) ** 2))


def _local_moves(nbrs, k, two_m, resolution, rng):
    n = len(nbrs)
    comm = list(range(n))
    tot = list(k)
    moved_any = False
    for _ in range(MAX_SWEEPS):
        moved = False
        for i in rng.permutation(n).tolist():
            ci = comm[i]
            ki = k[i]
            links = defaultdict(float)
            for j, wij in nbrs[i].items():
                links[comm[j]] += wij
            tot[ci] -= ki
            best = ci
            best_gain = links.get(ci, 0.0) - resolution * tot[ci] * ki / two_m
            for c, wc in links.items():
                gain = wc - resolution * tot[c] * ki / two_m
                if gain > best_gain:
                    best, best_gain = c, gain
            tot[best] += ki
            if best != ci:
                comm[i] = best
                moved = moved_any = True
        if not moved:
            break
    return comm, moved_any


def louvain(graph: WeightedGraph, weights=None, resolution: float = 1.0, seed=None) -> np.ndarray:
    """Louvain community detection on similarity ``weights``.

    Alternates greedy local node moves with aggregation of communities into
    super-nodes until no move improves modularity. The node sweep order of
    every level is shuffled with ``seed``.

    Returns
    -------
    labels : ndarray of int, dense in 0..K-1
    """
    w = _edge_weights(graph, weights)
    n = graph.node_count
    rng = np.random.default_rng(seed)
    nbrs: list[dict[int, float]] = [dict() for _ in range(n)]
    for a, b, x in zip(graph.u.tolist(), graph.v.tolist(), w.tolist()):
        if x > 0:
            nbrs[a][b] = nbrs[a].get(b, 0.0) + x
            nbrs[b][a] = nbrs[b].get(a, 0.0) + x
    loops = [0.0] * n  # diagonal of the aggregated adjacency (twice the internal weight)
    membership = np.arange(n)
    two_m = 2.0 * float(w.sum())
    if two_m == 0:
        return membership
    while True:
        k = [loops[i] + sum(nbrs[i].values()) for i in range(len(nbrs))]
        comm, moved = _local_moves(nbrs, k, two_m, resolution, rng)
        if not moved:
            break
        comm = _dense_labels(comm)
        K = int(comm.max()) + 1
        new_nbrs: list[dict[int, float]] = [defaultdict(float) for _ in range(K)]
        new_loops = [0.0] * K
        for i, d in enumerate(nbrs):
            ci = int(comm[i])
            new_loops[ci] += loops[i]
            for j, x in d.items():
                cj = int(comm[j])
                if ci == cj:
                    new_loops[ci] += x
                else:
                    new_nbrs[ci][cj] += x
        membership = comm[membership]
        nbrs = [dict(d) for d in new_nbrs]
        loops = new_loops
        if K == 1:
            break
    return _dense_labels(membership)


def louvain_grid(graph: WeightedGraph, weights=None, resolutions=RESOLUTION_GRID, seed=None):
    """Run Louvain over a resolution grid and keep the partition with the best modularity.

    Returns ``(labels, resolution, Q)``; Q is measured at resolution 1.
    """
    best = None
    for r in resolutions:
        lab = louvain(graph, weights, r, seed)
        q = modularity(graph, lab, weights)
        if best is None or q > best[2]:
            best = (lab, r, q)
    return best


def ari(p, q) -> float:
    """Adjusted Rand index between two labelings of the same nodes."""
    p = np.asarray(p)
    q = np.asarray(q)
    if p.shape != q.shape:
        raise SizeMismatch(f"partitions of different sizes: {p.shape} vs {q.shape}")
    n = len(p)
    if n < 2:
        return 1.0
    _, pi = np.unique(p, return_inverse=True)
    _, qi = np.unique(q, return_inverse=True)
    table = np.zeros((pi.max() + 1, qi.max() + 1), dtype=np.int64)
    np.add.at(table, (pi, qi), 1)
    sum_cells = comb(table, 2).sum()
    sum_rows = comb(table.sum(axis=1), 2).sum()
    sum_cols = comb(table.sum(axis=0), 2).sum()
    total = comb(n, 2)
    expected = sum_rows * sum_cols / total
    max_index = 0.5 * (sum_rows + sum_cols)
    if max_index == expected:
        # both partitions trivial (all-one or all-singletons) in the same way
        return 1.0
    return float((sum_cells - expected) / (max_index - expected))
