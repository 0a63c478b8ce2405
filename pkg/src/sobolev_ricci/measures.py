"""Neighborhood probability measures attached to graph nodes."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, asdict
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

from .exceptions import DegenerateSigma, IsolatedNode, UnknownNode

MASS_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Sparse probability measure: sorted unique ``support`` with ``mass``.

    ``degenerate`` marks a Gaussian measure whose neighbor weights all
    underflowed, leaving a Dirac at the center.
    """

    support: np.ndarray
    mass: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        support = np.asarray(self.support, dtype=np.int64)
        mass = np.asarray(self.mass, dtype=float)
        if support.shape != mass.shape or support.ndim != 1:
            raise ValueError("support and mass must be 1-d arrays of equal length")
        if len(support) and np.any(np.diff(support) <= 0):
            raise ValueError("support ids must be unique and sorted")
        if np.any(mass < 0):
            raise ValueError("masses must be nonnegative")
        if abs(mass.sum() - 1.0) > MASS_ATOL * max(1, len(mass)):
            raise ValueError(f"masses sum to {mass.sum()!r}, not 1")
        support.setflags(write=False)
        mass.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "mass", mass)

    @classmethod
    def from_weights(cls, support, weights, degenerate=False) -> "DiscreteMeasure":
        """Normalize nonnegative weights; zero-weight points are dropped."""
        support = np.asarray(support, dtype=np.int64)
        weights = np.asarray(weights, dtype=float)
        order = np.argsort(support, kind="stable")
        support, weights = support[order], weights[order]
        keep = weights > 0
        support, weights = support[keep], weights[keep]
        return cls(support, weights / weights.sum(), degenerate)

    def __len__(self):
        return len(self.support)

    def as_dict(self) -> dict[int, float]:
        return {int(s): float(m) for s, m in zip(self.support, self.mass)}

    def dense(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        out[self.support] = self.mass
        return out

    def total_variation(self, other: "DiscreteMeasure") -> float:
        n = int(max(self.support.max(initial=-1), other.support.max(initial=-1))) + 1
        return 0.5 * float(np.abs(self.dense(n) - other.dense(n)).sum())


@dataclass(frozen=True)
class MeasureSpec:
    """Which neighborhood measure to build and with what parameters.

    ``kind`` is ``"dirac"``, ``"lazy_rw"`` (needs ``alpha``) or
    ``"gaussian_knn"`` (needs ``sigma`` and ``k``; ``p_norm`` defaults to 2).
    """

    kind: str = "lazy_rw"
    alpha: float | None = None
    sigma: float | None = None
    k: int | None = None
    p_norm: float | None = None

    def __post_init__(self):
        kind = self.kind
        if kind == "dirac":
            if any(x is not None for x in (self.alpha, self.sigma, self.k, self.p_norm)):
                raise ValueError("dirac measures take no parameters")
        elif kind == "lazy_rw":
            if self.alpha is None:
                object.__setattr__(self, "alpha", 0.5)
            if not 0.0 <= self.alpha <= 1.0:
                raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
            if any(x is not None for x in (self.sigma, self.k, self.p_norm)):
                raise ValueError("lazy_rw takes only alpha")
        elif kind == "gaussian_knn":
            if self.sigma is None or self.k is None:
                raise ValueError("gaussian_knn needs sigma and k")
            if self.sigma <= 0 or self.k < 1:
                raise ValueError("sigma must be > 0 and k >= 1")
            if self.alpha is not None:
                raise ValueError("gaussian_knn does not take alpha")
            if self.p_norm is None:
                object.__setattr__(self, "p_norm", 2.0)
            if self.p_norm < 1:
                raise ValueError("p_norm must be >= 1")
        else:
            raise ValueError(f"unknown measure kind {kind!r}")

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def dirac(x: int, node_count: int | None = None) -> DiscreteMeasure:
    """Point mass at ``x``."""
    x = int(x)
    if x < 0 or (node_count is not None and x >= node_count):
        raise UnknownNode(f"node {x} out of range")
    return DiscreteMeasure(np.array([x]), np.array([1.0]))


def lazy_rw_measure(graph, x: int, alpha: float) -> DiscreteMeasure:
    """Lazy random walk: mass ``alpha`` at ``x``, the rest uniform on its neighbors."""
    x = graph.check_node(x)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    nbrs = graph.neighbors[x]
    if alpha == 1.0:
        return dirac(x)
    if len(nbrs) == 0:
        raise IsolatedNode(f"node {x} has no neighbors and alpha < 1")
    support = np.concatenate([[x], nbrs])
    weights = np.concatenate([[alpha], np.full(len(nbrs), (1.0 - alpha) / len(nbrs))])
    return DiscreteMeasure.from_weights(support, weights)


def _minkowski(diff: np.ndarray, p: float) -> np.ndarray:
    diff = np.abs(diff)
    if np.isinf(p):
        return diff.max(axis=-1)
    if p == 2:
        return np.sqrt((diff ** 2).sum(axis=-1))
    return (diff ** p).sum(axis=-1) ** (1.0 / p)


def knn_indices(points: np.ndarray, k: int, p_norm: float = 2.0) -> tuple[np.ndarray, np.ndarray]:
    """k nearest neighbors of every point (self excluded) by the l^p norm.

    Ties at equal distance go to the smaller index. Returns ``(idx, dist)``
    arrays of shape (n, k).
    """
    points = np.asarray(points, dtype=float)
    n = len(points)
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
    q = min(n, k + 4)
    dist, idx = cKDTree(points).query(points, k=q, p=p_norm)
    out_i = np.empty((n, k), dtype=np.int64)
    out_d = np.empty((n, k))
    for i in range(n):
        keep = idx[i] != i
        di, ii = dist[i][keep], idx[i][keep]
        o = np.lexsort((ii, di))[:k]
        out_i[i], out_d[i] = ii[o], di[o]
    return out_i, out_d


def gaussian_weights(dist: np.ndarray, sigma: float) -> np.ndarray:
    """exp(-d^2/sigma^2) with the largest exponent shifted to zero."""
    expo = -(np.asarray(dist, dtype=float) ** 2) / sigma ** 2
    return np.exp(expo - expo.max())


def gaussian_knn_measure(points, x: int, k: int, sigma: float, p_norm: float = 2.0) -> DiscreteMeasure:
    """kNN-masked Gaussian localization around point ``x``.

    The neighborhood is ``x`` together with its ``k`` nearest points; weights
    are ``exp(-||x - v||_p^2 / sigma^2)`` normalized over that neighborhood.
    """
    points = np.asarray(points, dtype=float)
    n = len(points)
    if not 0 <= x < n:
        raise UnknownNode(f"point {x} out of range")
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
    d = _minkowski(points - points[x], p_norm)
    d[x] = -1.0  # force self first
    order = np.lexsort((np.arange(n), d))[: k + 1]
    d[x] = 0.0
    return _gaussian_from(order, d[order], sigma)


def _gaussian_from(support, dist, sigma) -> DiscreteMeasure:
    w = gaussian_weights(dist, sigma)
    # support[0] is the center with distance 0
    degenerate = bool(len(w) > 1 and not np.any(w[1:] > 0))
    return DiscreteMeasure.from_weights(support, w, degenerate=degenerate)


def build_measures(spec: MeasureSpec, graph=None, points=None) -> list[DiscreteMeasure]:
    """Measures for every node under ``spec``.

    ``lazy_rw`` needs ``graph``; ``gaussian_knn`` needs ``points`` (row ``i``
    is the feature vector of node ``i``).
    """
    if spec.kind == "dirac":
        n = graph.node_count if graph is not None else len(points)
        return [dirac(i) for i in range(n)]
    if spec.kind == "lazy_rw":
        if graph is None:
            raise ValueError("lazy_rw measures need a graph")
        return [lazy_rw_measure(graph, i, spec.alpha) for i in range(graph.node_count)]
    if points is None:
        raise ValueError("gaussian_knn measures need a point cloud")
    points = np.asarray(points, dtype=float)
    idx, dist = knn_indices(points, spec.k, spec.p_norm)
    n = len(points)
    measures = []
    for i in range(n):
        support = np.concatenate([[i], idx[i]])
        measures.append(_gaussian_from(support, np.concatenate([[0.0], dist[i]]), spec.sigma))
    n_deg = sum(m.degenerate for m in measures)
    if n_deg:
        warnings.warn(f"{n_deg} of {n} Gaussian measures collapsed to a Dirac (sigma={spec.sigma})",
                      DegenerateSigma, stacklevel=2)
    return measures


def measure_matrix(measures: Sequence[DiscreteMeasure], n: int) -> sp.csr_matrix:
    """Stack measures into an (len(measures), n) CSR matrix."""
    indptr = np.zeros(len(measures) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(m) for m in measures])
    indices = np.concatenate([m.support for m in measures]) if measures else np.zeros(0, np.int64)
    data = np.concatenate([m.mass for m in measures]) if measures else np.zeros(0)
    return sp.csr_matrix((data, indices, indptr), shape=(len(measures), n))
