"""Seeded synthetic data: stochastic block models and manifold point clouds.

Manifold samples carry their intrinsic coordinates so that every edge of a
kNN graph built on them can be labeled as a shortcut or not.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import CannotConnect, SizeMismatch, UnknownKind
from .graph import WeightedGraph
from .measures import knn_indices

MAX_ATTEMPTS = 20
MANIFOLD_KINDS = ("concentric_circles", "moons", "s_curve", "swiss_roll_3d")


@dataclass(eq=False)
class LabeledGraph:
    """A graph with ground truth.

    ``communities`` holds one label per node (SBM); ``shortcut`` holds one
    flag per edge (kNN graphs on manifolds).
    """

    graph: WeightedGraph
    communities: np.ndarray | None = None
    shortcut: np.ndarray | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.communities is not None and len(self.communities) != self.graph.node_count:
            raise SizeMismatch("community labels do not match node count")
        if self.shortcut is not None and len(self.shortcut) != self.graph.m:
            raise SizeMismatch("shortcut flags do not match edge count")


@dataclass(eq=False)
class PointCloud:
    """Sampled manifold points.

    ``intrinsic`` stores the chart coordinates of each point (one or two
    columns) and ``component`` the connected piece of the manifold it lies on.
    """

    kind: str
    points: np.ndarray
    intrinsic: np.ndarray
    component: np.ndarray
    params: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.points)

    def nearest_component(self) -> np.ndarray:
        """Piece of the noise-free manifold closest to each (noisy) point."""
        if self.kind not in _PIECE_DISTANCES:
            return self.component
        return np.argmin(_PIECE_DISTANCES[self.kind](self), axis=1).astype(np.int64)

    def intrinsic_distance(self, a, b) -> np.ndarray:
        """Geodesic distance along the noise-free manifold; ``inf`` across components."""
        a = np.asarray(a)
        b = np.asarray(b)
        out = np.full(len(a), np.inf)
        same = self.component[a] == self.component[b]
        ia, ib = a[same], b[same]
        out[same] = _GEODESICS[self.kind](self, ia, ib)
        return out


def sbm(n: int, K: int = 2, p_intra: float = 0.15, rho: float = 0.1, seed=None) -> LabeledGraph:
    """Stochastic block model with ``K`` equal blocks and unit edge lengths.

    Intra-block pairs are linked with probability ``p_intra`` and inter-block
    pairs with ``rho * p_intra``. Disconnected draws are discarded and redrawn
    with the next seed offset.

    Raises
    ------
    CannotConnect
        No connected draw within 20 attempts.
    """
    if n % K:
        raise ValueError(f"n={n} is not divisible by K={K}")
    p_inter = rho * p_intra
    if not (0 < p_intra <= 1 and 0 <= p_inter <= 1):
        raise ValueError("edge probabilities must lie in (0, 1]")
    labels = np.arange(n) // (n // K)
    iu, ju = np.triu_indices(n, k=1)
    prob = np.where(labels[iu] == labels[ju], p_intra, p_inter)
    base = 0 if seed is None else seed
    for attempt in range(MAX_ATTEMPTS):
        rng = np.random.default_rng([base, attempt]) if seed is not None else np.random.default_rng()
        keep = rng.random(len(iu)) < prob
        g = WeightedGraph(n, iu[keep], ju[keep], np.ones(int(keep.sum())))
        if g.connected:
            params = {"n": n, "K": K, "p_intra": p_intra, "rho": rho, "seed": seed, "attempt": attempt}
            return LabeledGraph(g, communities=labels, params=params)
    raise CannotConnect(f"no connected SBM draw in {MAX_ATTEMPTS} attempts")


def expected_sbm_degree(n: int, K: int, p_intra: float, rho: float) -> float:
    """Expected node degree of :func:`sbm`."""
    b = n // K
    return (b - 1) * p_intra + (n - b) * rho * p_intra


def _circles(rng, n, r1=1.0, r2=2.0):
    n1 = n // 2
    comp = np.repeat([0, 1], [n1, n - n1])
    theta = rng.uniform(0.0, 2 * np.pi, n)
    radius = np.where(comp == 0, r1, r2)
    pts = np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])
    return pts, theta[:, None], comp, {"r1": r1, "r2": r2}


def _moons(rng, n):
    n1 = n // 2
    comp = np.repeat([0, 1], [n1, n - n1])
    t = rng.uniform(0.0, np.pi, n)
    upper = np.column_stack([np.cos(t), np.sin(t)])
    lower = np.column_stack([1.0 - np.cos(t), 0.5 - np.sin(t)])
    pts = np.where((comp == 0)[:, None], upper, lower)
    return pts, t[:, None], comp, {}


def _s_curve(rng, n):
    t = rng.uniform(-1.5 * np.pi, 1.5 * np.pi, n)
    pts = np.column_stack([np.sin(t), np.sign(t) * (np.cos(t) - 1.0)])
    return pts, t[:, None], np.zeros(n, dtype=np.int64), {}


def _swiss_roll(rng, n, height=10.0):
    t = rng.uniform(1.5 * np.pi, 4.5 * np.pi, n)
    h = rng.uniform(0.0, height, n)
    pts = np.column_stack([t * np.cos(t), h, t * np.sin(t)])
    return pts, np.column_stack([t, h]), np.zeros(n, dtype=np.int64), {"height": height}


_SAMPLERS = {
    "concentric_circles": _circles,
    "moons": _moons,
    "s_curve": _s_curve,
    "swiss_roll_3d": _swiss_roll,
}


def _circle_geodesic(cloud, a, b):
    radius = np.where(cloud.component[a] == 0, cloud.params["r1"], cloud.params["r2"])
    d = np.abs(cloud.intrinsic[a, 0] - cloud.intrinsic[b, 0]) % (2 * np.pi)
    return radius * np.minimum(d, 2 * np.pi - d)


def _arc_geodesic(cloud, a, b):
    # unit-speed parameterizations: arclength equals the parameter gap
    return np.abs(cloud.intrinsic[a, 0] - cloud.intrinsic[b, 0])


def _spiral_arclength(t):
    return 0.5 * (t * np.sqrt(1.0 + t * t) + np.arcsinh(t))


def _swiss_geodesic(cloud, a, b):
    ds = np.abs(_spiral_arclength(cloud.intrinsic[a, 0]) - _spiral_arclength(cloud.intrinsic[b, 0]))
    dh = cloud.intrinsic[a, 1] - cloud.intrinsic[b, 1]
    return np.hypot(ds, dh)


def _arc_distance(points, center, radius, lo, hi):
    """Distance from points to the circular arc of angles [lo, hi] around ``center``."""
    rel = points - np.asarray(center)
    ang = np.arctan2(rel[:, 1], rel[:, 0]) % (2 * np.pi)
    on_arc = (ang >= lo) & (ang <= hi)
    radial = np.abs(np.hypot(rel[:, 0], rel[:, 1]) - radius)
    ends = np.array([[np.cos(lo), np.sin(lo)], [np.cos(hi), np.sin(hi)]]) * radius
    to_ends = np.linalg.norm(rel[:, None, :] - ends[None], axis=2).min(axis=1)
    return np.where(on_arc, radial, to_ends)


def _circle_pieces(cloud):
    r = np.hypot(cloud.points[:, 0], cloud.points[:, 1])
    return np.column_stack([np.abs(r - cloud.params["r1"]), np.abs(r - cloud.params["r2"])])


def _moon_pieces(cloud):
    return np.column_stack([
        _arc_distance(cloud.points, (0.0, 0.0), 1.0, 0.0, np.pi),
        _arc_distance(cloud.points, (1.0, 0.5), 1.0, np.pi, 2 * np.pi),
    ])


_PIECE_DISTANCES = {"concentric_circles": _circle_pieces, "moons": _moon_pieces}

_GEODESICS = {
    "concentric_circles": _circle_geodesic,
    "moons": _arc_geodesic,
    "s_curve": _arc_geodesic,
    "swiss_roll_3d": _swiss_geodesic,
}


def manifold(kind: str, n: int = 1000, noise: float = 0.05, seed=None, **shape) -> PointCloud:
    """Sample ``n`` points from a named manifold with Gaussian coordinate noise.

    Parameters
    ----------
    kind : {"concentric_circles", "moons", "s_curve", "swiss_roll_3d"}
    n : int
        Number of points, at least 100.
    noise : float
        Standard deviation of the isotropic noise added to every coordinate.
    seed : int, optional
    **shape
        Kind-specific shape parameters: ``r1``/``r2`` for circles,
        ``height`` for the swiss roll.

    Raises
    ------
    UnknownKind
    """
    if kind not in _SAMPLERS:
        raise UnknownKind(f"unknown manifold {kind!r}; choose from {MANIFOLD_KINDS}")
    if n < 100:
        raise ValueError("manifold samples need n >= 100")
    rng = np.random.default_rng(seed)
    pts, intrinsic, comp, params = _SAMPLERS[kind](rng, n, **shape)
    if noise > 0:
        pts = pts + rng.normal(0.0, noise, pts.shape)
    params.update({"n": n, "noise": noise, "seed": seed})
    return PointCloud(kind, pts, intrinsic, comp.astype(np.int64), params)


def knn_graph(points, k: int, p_norm: float = 2.0) -> WeightedGraph:
    """Symmetric kNN graph: an edge wherever either endpoint selects the other."""
    if k < 2:
        raise ValueError("kNN graphs need k >= 2")
    points = np.asarray(points, dtype=float)
    idx, _ = knn_indices(points, k, p_norm)
    a = np.repeat(np.arange(len(points)), k)
    b = idx.ravel()
    pairs = np.unique(np.column_stack([np.minimum(a, b), np.maximum(a, b)]), axis=0)
    u, v = pairs[:, 0], pairs[:, 1]
    length = np.linalg.norm(points[u] - points[v], ord=p_norm, axis=1)
    return WeightedGraph(len(points), u, v, length)


# manifolds made of several closed or separate pieces use the component rule only
COMPONENT_RULE = ("concentric_circles", "moons")


def label_shortcuts(cloud: PointCloud, graph: WeightedGraph, c_s: float = 3.0) -> np.ndarray:
    """Ground-truth shortcut flags for the edges of a graph on ``cloud``.

    On multi-piece manifolds an edge is a shortcut when it joins two pieces;
    each noisy point belongs to the piece it lies closest to.
    On single-chart manifolds it is a shortcut when the geodesic between its
    endpoints exceeds ``c_s`` times its length.
    """
    if cloud.kind in COMPONENT_RULE:
        piece = cloud.nearest_component()
        return piece[graph.u] != piece[graph.v]
    geo = cloud.intrinsic_distance(graph.u, graph.v)
    return geo > c_s * graph.length


def knn_graph_with_labels(cloud: PointCloud, k: int = 10, c_s: float = 3.0) -> LabeledGraph:
    """kNN graph on ``cloud`` with per-edge shortcut ground truth."""
    g = knn_graph(cloud.points, k)
    flags = label_shortcuts(cloud, g, c_s)
    params = {"kind": cloud.kind, "k": k, "c_s": c_s, **cloud.params}
    return LabeledGraph(g, shortcut=flags, params=params)
