"""Weighted graphs, shortest paths, spanning trees and rooted-tree cut structure.

Node ids are dense integers ``0..n-1``. Edges are stored once with ``u < v``
and sorted lexicographically, so every edge has a stable integer index that
curvature fields, flow weights and pruning masks all share.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .exceptions import (
    DisconnectedGraph,
    DuplicateEdge,
    NonPositiveLength,
    NotATree,
    SelfLoop,
    UnknownNode,
)

# relative tolerance used to decide that two path lengths tie
TIE_RTOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class WeightedGraph:
    """Undirected graph with strictly positive edge lengths.

    Parameters
    ----------
    node_count : int
        Number of nodes; ids are ``0..node_count-1``.
    u, v : array of int
        Edge endpoints with ``u < v``, sorted lexicographically.
    length : array of float
        Positive edge lengths aligned with ``u``/``v``.
    labels : sequence, optional
        External node labels (id-remap table), ``labels[i]`` names node ``i``.
    """

    def __init__(self, node_count, u, v, length, labels=None):
        self.node_count = int(node_count)
        self.u = _frozen(np.asarray(u, dtype=np.int64).copy())
        self.v = _frozen(np.asarray(v, dtype=np.int64).copy())
        self.length = _frozen(np.asarray(length, dtype=float).copy())
        self.labels = list(labels) if labels is not None else None
        n_comp, comp = csgraph.connected_components(self.adjacency, directed=False)
        self.n_components = int(n_comp)
        self.component = _frozen(comp)
        self.connected = n_comp <= 1

    def __repr__(self):
        return (f"WeightedGraph(n={self.node_count}, m={self.edge_count}, "
                f"connected={self.connected})")

    @property
    def n(self) -> int:
        return self.node_count

    @property
    def edge_count(self) -> int:
        return len(self.u)

    @property
    def m(self) -> int:
        return len(self.u)

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        return [(int(a), int(b), float(w)) for a, b, w in zip(self.u, self.v, self.length)]

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric CSR matrix of edge lengths."""
        n = self.node_count
        rows = np.concatenate([self.u, self.v])
        cols = np.concatenate([self.v, self.u])
        data = np.concatenate([self.length, self.length])
        return sp.csr_matrix((data, (rows, cols)), shape=(n, n))

    @cached_property
    def neighbors(self) -> list[np.ndarray]:
        """Sorted one-hop neighbor ids per node."""
        A = self.adjacency
        return [_frozen(A.indices[A.indptr[i]:A.indptr[i + 1]].copy()) for i in range(self.node_count)]

    @cached_property
    def degree(self) -> np.ndarray:
        return _frozen(np.diff(self.adjacency.indptr))

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {(int(a), int(b)): i for i, (a, b) in enumerate(zip(self.u, self.v))}

    def find_edge(self, a: int, b: int) -> int:
        key = (a, b) if a < b else (b, a)
        try:
            return self.edge_index[key]
        except KeyError:
            raise UnknownNode(f"no edge between {a} and {b}") from None

    def check_node(self, x: int) -> int:
        if not 0 <= int(x) < self.node_count:
            raise UnknownNode(f"node {x} not in graph with {self.node_count} nodes")
        return int(x)

    def with_lengths(self, length) -> "WeightedGraph":
        """Same topology with new edge lengths (validated)."""
        length = np.asarray(length, dtype=float)
        if length.shape != self.length.shape:
            raise ValueError("length vector does not match edge count")
        if not np.all(np.isfinite(length)) or np.any(length <= 0):
            raise NonPositiveLength("edge lengths must be finite and > 0")
        return WeightedGraph(self.node_count, self.u, self.v, length, self.labels)

    def remove_edges(self, mask) -> "WeightedGraph":
        """Graph without the edges flagged in the boolean ``mask``."""
        keep = ~np.asarray(mask, dtype=bool)
        return WeightedGraph(self.node_count, self.u[keep], self.v[keep], self.length[keep], self.labels)

    def require_connected(self) -> None:
        if not self.connected:
            raise DisconnectedGraph(f"graph has {self.n_components} connected components")

    def shortest_paths(self, sources=None) -> np.ndarray:
        """Shortest-path distance rows from ``sources`` (all nodes if None)."""
        return csgraph.dijkstra(self.adjacency, directed=False, indices=sources)

    def edge_distances(self) -> np.ndarray:
        """Shortest-path distance d(u, v) between the endpoints of every edge."""
        if self.m == 0:
            return np.zeros(0)
        src, inv = np.unique(self.u, return_inverse=True)
        D = self.shortest_paths(src)
        return D[inv, self.v]


def build_graph(edge_list: Iterable[Sequence], node_count: int | None = None, labels=None) -> WeightedGraph:
    """Validate an edge list and build a :class:`WeightedGraph`.

    Each entry is ``(u, v)`` or ``(u, v, length)``; a missing length is 1.0.

    Raises
    ------
    NonPositiveLength, SelfLoop, DuplicateEdge
    """
    us, vs, ws = [], [], []
    seen = set()
    for item in edge_list:
        a, b = int(item[0]), int(item[1])
        w = float(item[2]) if len(item) > 2 else 1.0
        if a < 0 or b < 0:
            raise ValueError(f"node ids must be nonnegative, got ({a}, {b})")
        if a == b:
            raise SelfLoop(f"self-loop at node {a}")
        if not np.isfinite(w) or w <= 0:
            raise NonPositiveLength(f"edge ({a}, {b}) has length {w}")
        key = (min(a, b), max(a, b))
        if key in seen:
            raise DuplicateEdge(f"duplicate edge {key}")
        seen.add(key)
        us.append(key[0])
        vs.append(key[1])
        ws.append(w)
    max_id = max(max(us, default=-1), max(vs, default=-1))
    if node_count is None:
        node_count = max_id + 1 if labels is None else len(labels)
    if max_id >= node_count:
        raise UnknownNode(f"edge references node {max_id} but node_count={node_count}")
    order = np.lexsort((np.asarray(vs, dtype=np.int64), np.asarray(us, dtype=np.int64)))
    u = np.asarray(us, dtype=np.int64)[order]
    v = np.asarray(vs, dtype=np.int64)[order]
    w = np.asarray(ws, dtype=float)[order]
    return WeightedGraph(node_count, u, v, w, labels)


# ---------------------------------------------------------------------------
# rooted trees


@dataclass(frozen=True, eq=False)
class RootedTree:
    """Spanning tree rooted at ``root`` with Euler-interval subtree encoding.

    Tree edges are identified by their child node ``c``; the cut set of that
    edge (the side not containing the root) is the set of nodes ``v`` with
    ``dfs_in[c] <= dfs_in[v] < dfs_out[c]``.
    """

    root: int
    parent: np.ndarray          # parent[root] == root
    parent_length: np.ndarray   # length of edge (c, parent[c]); 0 at the root
    depth: np.ndarray
    dist_to_root: np.ndarray
    dfs_in: np.ndarray
    dfs_out: np.ndarray
    order: np.ndarray           # preorder node sequence

    @property
    def node_count(self) -> int:
        return len(self.parent)

    @property
    def children(self) -> np.ndarray:
        """Child node of every tree edge, in preorder."""
        return self.order[1:]

    @property
    def tree_edges(self) -> list[tuple[int, float]]:
        return [(int(c), float(self.parent_length[c])) for c in self.children]

    def edge_pairs(self) -> set[tuple[int, int]]:
        """Tree edges as sorted node pairs."""
        return {(min(int(c), int(self.parent[c])), max(int(c), int(self.parent[c]))) for c in self.children}

    def in_cut(self, c: int, v: int) -> bool:
        """True when ``v`` lies in the cut set of the tree edge above ``c``."""
        return bool(self.dfs_in[c] <= self.dfs_in[v] < self.dfs_out[c])

    def cut_set(self, c: int) -> np.ndarray:
        return self.order[self.dfs_in[c]:self.dfs_out[c]]

    def lca(self, a: int, b: int) -> int:
        parent, depth = self.parent, self.depth
        while depth[a] > depth[b]:
            a = parent[a]
        while depth[b] > depth[a]:
            b = parent[b]
        while a != b:
            a, b = parent[a], parent[b]
        return int(a)

    def path_length(self, a: int, b: int) -> float:
        n = self.node_count
        for x in (a, b):
            if not 0 <= x < n:
                raise UnknownNode(f"node {x} not in tree")
        if a == b:
            return 0.0
        c = self.lca(a, b)
        return float(self.dist_to_root[a] + self.dist_to_root[b] - 2.0 * self.dist_to_root[c])

    def path_lengths(self, a, b) -> np.ndarray:
        """Vectorised tree distances between node arrays ``a`` and ``b``."""
        a = np.array(a, dtype=np.int64)
        b = np.array(b, dtype=np.int64)
        x, y = a.copy(), b.copy()
        parent, depth = self.parent, self.depth
        while True:
            m = depth[x] > depth[y]
            if not m.any():
                break
            x[m] = parent[x[m]]
        while True:
            m = depth[y] > depth[x]
            if not m.any():
                break
            y[m] = parent[y[m]]
        while True:
            m = x != y
            if not m.any():
                break
            x[m] = parent[x[m]]
            y[m] = parent[y[m]]
        d = self.dist_to_root
        return d[a] + d[b] - 2.0 * d[x]

    @cached_property
    def ancestor_matrix(self) -> sp.csr_matrix:
        """Sparse 0/1 matrix ``A[v, c] = 1`` iff ``v`` is in the cut set of edge ``c``.

        Row ``v`` lists the child nodes of all tree edges on the path from ``v``
        to the root, so ``mu @ A`` gives cut masses. Column of the root is empty.
        """
        n = self.node_count
        rows, cols = [], []
        anc: list[list[int] | None] = [None] * n
        anc[self.root] = []
        for v in self.order[1:]:
            chain = anc[self.parent[v]] + [int(v)]
            anc[v] = chain
            rows.extend([int(v)] * len(chain))
            cols.extend(chain)
        data = np.ones(len(rows))
        return sp.csr_matrix((data, (rows, cols)), shape=(n, n))

    @property
    def mean_depth(self) -> float:
        return float(self.depth.mean()) if self.node_count else 0.0


def root_tree(node_count: int, tree_edges, lengths, root: int = 0) -> RootedTree:
    """Root a spanning tree and compute its DFS intervals.

    Children are visited in ascending node-id order.

    Parameters
    ----------
    node_count : int
    tree_edges : sequence of (u, v)
    lengths : sequence of float, aligned with ``tree_edges``
    root : int

    Raises
    ------
    NotATree
        When the edges contain a cycle or do not span all nodes.
    """
    n = int(node_count)
    if not 0 <= root < n:
        raise UnknownNode(f"root {root} not in 0..{n - 1}")
    tree_edges = list(tree_edges)
    lengths = np.asarray(lengths, dtype=float)
    if len(tree_edges) != n - 1:
        raise NotATree(f"expected {n - 1} tree edges, got {len(tree_edges)}")
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for (a, b), w in zip(tree_edges, lengths):
        a, b = int(a), int(b)
        adj[a].append((b, float(w)))
        adj[b].append((a, float(w)))
    for lst in adj:
        lst.sort()

    parent = np.full(n, -1, dtype=np.int64)
    parent_length = np.zeros(n)
    depth = np.zeros(n, dtype=np.int64)
    dist = np.zeros(n)
    dfs_in = np.zeros(n, dtype=np.int64)
    dfs_out = np.zeros(n, dtype=np.int64)
    order = []
    parent[root] = root
    # iterative preorder; stack holds (node, next-neighbor index)
    stack = [(root, 0)]
    dfs_in[root] = 0
    order.append(root)
    while stack:
        x, i = stack[-1]
        if i < len(adj[x]):
            stack[-1] = (x, i + 1)
            y, w = adj[x][i]
            if y == parent[x] and x != root:
                continue
            if parent[y] != -1:
                raise NotATree("tree edges contain a cycle")
            parent[y] = x
            parent_length[y] = w
            depth[y] = depth[x] + 1
            dist[y] = dist[x] + w
            dfs_in[y] = len(order)
            order.append(y)
            stack.append((y, 0))
        else:
            dfs_out[x] = len(order)
            stack.pop()
    if len(order) != n:
        raise NotATree("tree edges do not span all nodes")
    arrays = [_frozen(a) for a in (parent, parent_length, depth, dist, dfs_in, dfs_out, np.asarray(order, dtype=np.int64))]
    return RootedTree(int(root), *arrays)


def tree_path_length(tree: RootedTree, u: int, v: int) -> float:
    """Sum of edge lengths on the unique tree path between ``u`` and ``v``."""
    return tree.path_length(int(u), int(v))


# ---------------------------------------------------------------------------
# shortest paths and spanning trees


def dijkstra(graph: WeightedGraph, source: int = 0) -> tuple[np.ndarray, RootedTree]:
    """Single-source shortest paths and the shortest-path tree rooted at ``source``.

    Among several predecessors that realise the shortest distance the one
    with the smallest node id is chosen, so the tree is deterministic.

    Returns
    -------
    dist : ndarray of shape (n,)
    tree : RootedTree
    """
    graph.check_node(source)
    graph.require_connected()
    n = graph.node_count
    dist = csgraph.dijkstra(graph.adjacency, directed=False, indices=source)
    pred = np.full(n, n, dtype=np.int64)
    u, v, w = graph.u, graph.v, graph.length
    for a, b in ((u, v), (v, u)):
        # edge a -> b is tight when dist[a] + w == dist[b] up to rounding
        tight = np.abs(dist[a] + w - dist[b]) <= TIE_RTOL * np.maximum(1.0, dist[b])
        tight &= dist[a] < dist[b]
        np.minimum.at(pred, b[tight], a[tight])
    pred[source] = source
    children = np.flatnonzero(np.arange(n) != source)
    if np.any(pred[children] == n):
        raise DisconnectedGraph("unreachable node in shortest-path tree")
    parents = pred[children]
    lengths = np.asarray(graph.adjacency[children, parents]).ravel() if len(children) else np.zeros(0)
    tree = root_tree(n, list(zip(children, parents)), lengths, source)
    return dist, tree


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


def _accept_edges(graph: WeightedGraph, order) -> np.ndarray:
    uf = _UnionFind(graph.node_count)
    chosen = []
    u, v = graph.u.tolist(), graph.v.tolist()
    need = graph.node_count - 1
    for i in order:
        if uf.union(u[i], v[i]):
            chosen.append(i)
            if len(chosen) == need:
                break
    return np.sort(np.asarray(chosen, dtype=np.int64))


def kruskal_mst(graph: WeightedGraph) -> np.ndarray:
    """Edge indices of the minimum spanning tree.

    Edges are scanned in stable ``(length, min-id, max-id)`` order.
    """
    graph.require_connected()
    order = np.lexsort((graph.v, graph.u, graph.length))
    return _accept_edges(graph, order)


def random_spanning_tree(graph: WeightedGraph, seed=None) -> np.ndarray:
    """Edge indices of a spanning tree from a seeded random edge order."""
    graph.require_connected()
    rng = np.random.default_rng(seed)
    return _accept_edges(graph, rng.permutation(graph.m))


def tree_from_edges(graph: WeightedGraph, edge_ids, root: int = 0) -> RootedTree:
    edge_ids = np.asarray(edge_ids, dtype=np.int64)
    pairs = list(zip(graph.u[edge_ids].tolist(), graph.v[edge_ids].tolist()))
    return root_tree(graph.node_count, pairs, graph.length[edge_ids], root)


def reroot(tree: RootedTree, root: int) -> RootedTree:
    """The same spanning tree rooted at ``root``."""
    if int(root) == tree.root:
        return tree
    kids = tree.children
    pairs = list(zip(kids.tolist(), tree.parent[kids].tolist()))
    return root_tree(tree.node_count, pairs, tree.parent_length[kids], root)


def extract_tree(graph: WeightedGraph, mode: str = "spt", root: int = 0, seed=None) -> RootedTree:
    """Induce a rooted spanning tree: ``"spt"``, ``"mst"`` or ``"random"``."""
    mode = mode.lower()
    if mode == "spt":
        return dijkstra(graph, root)[1]
    if mode == "mst":
        return tree_from_edges(graph, kruskal_mst(graph), root)
    if mode == "random":
        return tree_from_edges(graph, random_spanning_tree(graph, seed), root)
    raise ValueError(f"unknown tree mode {mode!r}")
