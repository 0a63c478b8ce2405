"""Curvature-based edge filtering and two-stage shortcut pruning.

Stage 1 keeps the edges whose curvature is at most ``-1 + 4 (1 - delta_m)``.
Stage 2 confirms a candidate as a shortcut when the graph offers no short
detour around it: the shortest path between its endpoints, with the edge
taken out, is longer than ``length / lambda_m``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .exceptions import MissingLabels
from .graph import WeightedGraph
from .sobolev import CurvatureField


def curvature_threshold(delta_m: float) -> float:
    if not 0.0 < delta_m < 1.0:
        raise ValueError(f"delta_m must lie in (0, 1), got {delta_m}")
    return -1.0 + 4.0 * (1.0 - delta_m)


def curvature_filter(fld: CurvatureField, delta_m: float) -> np.ndarray:
    """Boolean mask of edges with curvature at most ``-1 + 4 (1 - delta_m)``."""
    return np.asarray(fld.kappa) <= curvature_threshold(delta_m)


def _adjacency_without(graph: WeightedGraph, drop) -> sp.csr_matrix:
    keep = ~np.asarray(drop, dtype=bool)
    u, v, w = graph.u[keep], graph.v[keep], graph.length[keep]
    n = graph.node_count
    return sp.csr_matrix((np.concatenate([w, w]), (np.concatenate([u, v]), np.concatenate([v, u]))),
                         shape=(n, n))


def detour_lengths(graph: WeightedGraph, edges, removed=None) -> np.ndarray:
    """Shortest path between the endpoints of each edge once it is taken out.

    ``removed`` optionally masks further edges that are absent for every
    query. Unreachable endpoints give ``inf``.
    """
    edges = np.atleast_1d(np.asarray(edges, dtype=np.int64))
    base = np.zeros(graph.m, dtype=bool) if removed is None else np.asarray(removed, dtype=bool).copy()
    if base[edges].all():
        # every query edge is already absent: one shared graph serves all queries
        src, inv = np.unique(graph.u[edges], return_inverse=True)
        D = csgraph.dijkstra(_adjacency_without(graph, base), directed=False, indices=src)
        return D[inv, graph.v[edges]]
    out = np.empty(len(edges))
    for j, e in enumerate(edges.tolist()):
        was = base[e]
        base[e] = True
        A = _adjacency_without(graph, base)
        base[e] = was
        out[j] = csgraph.dijkstra(A, directed=False, indices=int(graph.u[e]))[graph.v[e]]
    return out


def detour_test(graph: WeightedGraph, e: int, lambda_m: float, removed=None) -> bool:
    """True when edge ``e`` has no detour shorter than ``length(e) / lambda_m``."""
    if lambda_m <= 0:
        raise ValueError("lambda_m must be > 0")
    d = detour_lengths(graph, [e], removed)[0]
    return bool(d > graph.length[e] / lambda_m)


@dataclass
class PruningReport:
    """Edges removed by a pruning method and, given ground truth, its error rates."""

    removed: np.ndarray
    edges: list
    tp_rate: float | None
    fp_rate: float | None
    stage_counts: dict
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "removed_edges": [list(e) for e in self.edges],
            "tp_rate": self.tp_rate,
            "fp_rate": self.fp_rate,
            "stage_counts": self.stage_counts,
            "params": self.params,
        }


def pruning_rates(removed, shortcut) -> tuple[float | None, float]:
    """Fraction of true shortcuts removed and fraction of good edges removed.

    The first is ``None`` when there are no shortcuts.
    """
    removed = np.asarray(removed, dtype=bool)
    shortcut = np.asarray(shortcut, dtype=bool)
    n_bad = int(shortcut.sum())
    n_good = len(shortcut) - n_bad
    tp = float((removed & shortcut).sum() / n_bad) if n_bad else None
    fp = float((removed & ~shortcut).sum() / n_good) if n_good else 0.0
    return tp, fp


def _report(graph, mask, shortcut, stage_counts, params):
    edges = [(int(a), int(b)) for a, b in zip(graph.u[mask], graph.v[mask])]
    if shortcut is None:
        tp = fp = None
    else:
        if len(shortcut) != graph.m:
            raise MissingLabels("shortcut labels do not cover every edge")
        tp, fp = pruning_rates(mask, shortcut)
    return PruningReport(mask, edges, tp, fp, stage_counts, params)


def manl_prune(
    graph: WeightedGraph,
    fld: CurvatureField | None = None,
    delta_m: float = 0.75,
    lambda_m: float = 0.01,
    shortcut=None,
    *,
    rounds: int = 1,
    field_fn=None,
    detour: str = "candidates",
) -> PruningReport:
    """Two-stage curvature pruning.

    Parameters
    ----------
    graph : WeightedGraph
    fld : CurvatureField
        Curvature of ``graph`` for the first round.
    delta_m, lambda_m : float
        Curvature threshold and detour strictness parameters.
    shortcut : bool array, optional
        Ground-truth shortcut flags; rates are reported only when given.
    rounds : int
        Number of filter/confirm alternations. Rounds after the first need
        ``field_fn(graph) -> CurvatureField`` to recompute curvature on the
        pruned graph. Alternation stops early once a round removes nothing
        or leaves the graph disconnected.
    detour : {"candidates", "single"}
        ``"candidates"`` measures each detour with all stage-1 candidates
        taken out; ``"single"`` takes out only the edge under test.
    """
    if detour not in ("candidates", "single"):
        raise ValueError(f"unknown detour mode {detour!r}")
    if rounds > 1 and field_fn is None:
        raise ValueError("more than one round needs field_fn to recompute curvature")
    if fld is None:
        if field_fn is None:
            raise ValueError("need a curvature field or field_fn")
        fld = field_fn(graph)
    removed = np.zeros(graph.m, dtype=bool)
    counts = {"candidates": [], "removed": []}
    alive = np.arange(graph.m)
    current = graph
    for r in range(rounds):
        if r > 0:
            fld = field_fn(current)
        cand = curvature_filter(fld, delta_m)
        ids = np.flatnonzero(cand)
        context = cand if detour == "candidates" else None
        flagged = np.zeros(current.m, dtype=bool)
        if len(ids):
            d = detour_lengths(current, ids, context)
            flagged[ids] = d > current.length[ids] / lambda_m
        counts["candidates"].append(int(cand.sum()))
        counts["removed"].append(int(flagged.sum()))
        removed[alive[flagged]] = True
        if not flagged.any():
            break
        alive = alive[~flagged]
        current = current.remove_edges(flagged)
        if not current.connected:
            break
    params = {"method": fld.method, "delta_m": delta_m, "lambda_m": lambda_m, "rounds": rounds,
              "detour": detour, "threshold": curvature_threshold(delta_m)}
    return _report(graph, removed, shortcut, counts, params)


def curvature_only_prune(graph: WeightedGraph, fld: CurvatureField, delta_m: float = 0.75,
                         shortcut=None) -> PruningReport:
    """Remove every stage-1 candidate without the detour check."""
    mask = curvature_filter(fld, delta_m)
    params = {"method": f"{fld.method} only", "delta_m": delta_m,
              "threshold": curvature_threshold(delta_m)}
    return _report(graph, mask, shortcut, {"candidates": [int(mask.sum())]}, params)


def distance_only_prune(graph: WeightedGraph, quantile: float = 0.95, shortcut=None) -> PruningReport:
    """Remove the edges longer than the given length quantile."""
    cut = float(np.quantile(graph.length, quantile))
    mask = graph.length > cut
    params = {"method": "distance only", "quantile": quantile, "threshold": cut}
    return _report(graph, mask, shortcut, {"removed": [int(mask.sum())]}, params)
