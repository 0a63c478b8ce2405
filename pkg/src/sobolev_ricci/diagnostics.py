"""Consistency and robustness instrumentation.

Root sensitivity of shortest-path-tree curvature, Dirac-limit sweeps,
curvature histograms, comparison across extracted trees, and a small
per-iteration timing harness.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from .flow import Method, flow_step, initial_state
from .graph import WeightedGraph, extract_tree
from .measures import MeasureSpec, build_measures
from .orc import PathMetric, w1
from .sobolev import CurvatureField, sobolev_pair_distances, src_field

@dataclass
class RootSensitivityRecord:
    """Curvature change between two shortest-path-tree roots.

    ``l1_curvature_diff`` is the mean absolute curvature change over all
    edges, ``ratio`` divides it by the number of differing tree edges, and
    ``bound_constant`` is ``l_max * (1/D_min + S_max/D_min**2)`` built from
    the instance.
    """

    roots: tuple[int, int]
    delta_tree_edges: int
    l1_curvature_diff: float
    ratio: float
    bound_constant: float
    l_max: float
    d_min: float
    s_max: float

    @property
    def within_bound(self) -> bool:
        if self.delta_tree_edges == 0:
            return self.l1_curvature_diff == 0.0
        return self.ratio <= self.bound_constant

    def to_dict(self) -> dict:
        out = asdict(self)
        out["roots"] = list(self.roots)
        out["within_bound"] = self.within_bound
        return out


def root_sensitivity(graph: WeightedGraph, spec: MeasureSpec | None = None, p: float = 1.0,
                     r: int = 0, r2: int = 1, *, measures=None, points=None) -> RootSensitivityRecord:
    """Compare curvature fields on the shortest-path trees rooted at ``r`` and ``r2``.

    ``D_min`` and ``S_max`` range over the evaluated graph edges under both trees.
    """
    spec = spec or MeasureSpec("lazy_rw", alpha=0.5)
    if measures is None:
        measures = build_measures(spec, graph=graph, points=points)
    t1 = extract_tree(graph, "spt", root=r)
    t2 = extract_tree(graph, "spt", root=r2)
    f1 = src_field(graph, "spt", spec, p, measures=measures, tree=t1)
    f2 = src_field(graph, "spt", spec, p, measures=measures, tree=t2)
    delta = len(t1.edge_pairs() ^ t2.edge_pairs())
    l1 = float(np.mean(np.abs(f1.kappa - f2.kappa))) if graph.m else 0.0
    l_max = float(graph.length.max())
    d_min = float(min(f1.base.min(), f2.base.min()))
    s_max = float(max(f1.transport.max(), f2.transport.max()))
    bound = l_max * (1.0 / d_min + s_max / d_min ** 2)
    ratio = l1 / delta if delta else 0.0
    return RootSensitivityRecord((int(r), int(r2)), delta, l1, ratio, bound, l_max, d_min, s_max)


def random_root_pairs(n: int, pairs: int, seed=None) -> list[tuple[int, int]]:
    """Distinct ordered root pairs drawn with ``seed``."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(pairs):
        a, b = rng.choice(n, size=2, replace=False)
        out.append((int(a), int(b)))
    return out


def lazy_envelope(graph: WeightedGraph, alpha: float, d_min: float) -> float:
    """Curvature magnitude envelope ``(1 - alpha) * sum(lengths) / D_min``."""
    return (1.0 - alpha) * float(graph.length.sum()) / d_min


def _orc_on_edges(graph, measures, edges, metric) -> np.ndarray:
    out = np.empty(len(edges))
    for j, e in enumerate(edges.tolist()):
        x, y = int(graph.u[e]), int(graph.v[e])
        out[j] = 1.0 - w1(measures[x], measures[y], metric) / metric(x, y)
    return out


def dirac_sweep(graph: WeightedGraph, schedule, family: str = "alpha", p: float = 1.0, *,
                points=None, k: int | None = None, edges=None, tree_mode: str = "spt",
                root: int = 0) -> list[dict]:
    """Curvature magnitudes of SRC and ORC along a schedule toward point masses.

    Parameters
    ----------
    graph : WeightedGraph
    schedule : sequence of float
        Laziness values rising to 1 (``family="alpha"``) or Gaussian widths
        falling to 0 (``family="sigma"``, needs ``points`` and ``k``).
    edges : array of int, optional
        Edge indices to evaluate; all edges by default.

    Returns
    -------
    rows : list of dict
        One row per schedule point with ``max_abs_src`` and ``max_abs_orc``;
        the alpha family also reports ``envelope``.
    """
    if family not in ("alpha", "sigma"):
        raise ValueError(f"unknown schedule family {family!r}")
    edges = np.arange(graph.m) if edges is None else np.asarray(edges, dtype=np.int64)
    tree = extract_tree(graph, tree_mode, root=root)
    metric = PathMetric(graph)
    d_graph = np.array([metric(a, b) for a, b in zip(graph.u[edges], graph.v[edges])])
    rows = []
    for value in schedule:
        if family == "alpha":
            spec = MeasureSpec("lazy_rw", alpha=float(value))
        else:
            spec = MeasureSpec("gaussian_knn", sigma=float(value), k=k)
        measures = build_measures(spec, graph=graph, points=points)
        S, D = sobolev_pair_distances(tree, measures, graph.u[edges], graph.v[edges], p)
        src = 1.0 - S / D
        orc = _orc_on_edges(graph, measures, edges, metric)
        row = {"parameter": float(value), "max_abs_src": float(np.abs(src).max(initial=0.0)),
               "max_abs_orc": float(np.abs(orc).max(initial=0.0))}
        if family == "alpha":
            d_min = min(float(D.min()), float(d_graph.min()))
            row["envelope"] = lazy_envelope(graph, float(value), d_min)
        rows.append(row)
    return rows


@dataclass
class Histogram:
    counts: np.ndarray
    edges: np.ndarray

    def to_rows(self) -> list[dict]:
        return [{"left": float(a), "right": float(b), "count": int(c)}
                for a, b, c in zip(self.edges[:-1], self.edges[1:], self.counts)]


def curvature_histogram(fld: CurvatureField | np.ndarray, bins=20, range=None) -> Histogram:
    """Histogram of edge curvatures; counts sum to the number of edges."""
    kappa = np.asarray(fld.kappa if isinstance(fld, CurvatureField) else fld, dtype=float)
    if kappa.size == 0:
        raise ValueError("empty curvature field")
    counts, edges = np.histogram(kappa, bins=bins, range=range)
    return Histogram(counts, edges)


def summarize(kappa) -> dict:
    kappa = np.asarray(kappa, dtype=float)
    q25, q50, q75 = np.quantile(kappa, [0.25, 0.5, 0.75])
    return {"mean": float(kappa.mean()), "std": float(kappa.std()), "min": float(kappa.min()),
            "q25": float(q25), "median": float(q50), "q75": float(q75), "max": float(kappa.max())}


def tree_stretch(graph: WeightedGraph, fld: CurvatureField) -> np.ndarray:
    """Tree path length over edge length for every edge of an SRC field.

    Tree edges give 1. Large values mark non-tree edges whose curvature
    denominator is a long detour through the tree.
    """
    if fld.base is None:
        raise ValueError("field carries no tree distances")
    p = float(fld.params.get("p", 1.0))
    return fld.base ** p / graph.length


def tree_robustness(graph: WeightedGraph, spec: MeasureSpec | None = None, p: float = 1.0,
                    seeds=(0, 1, 2, 3, 4), *, root: int = 0, bins=20, points=None) -> dict:
    """SRC fields on the shortest-path tree, the MST and seeded random spanning trees.

    Returns a mapping ``mode -> {"fields", "summary", "histogram", "stretch"}``;
    the random mode pools all seeds. Histograms share one set of bin edges
    and ``stretch`` summarizes :func:`tree_stretch`.
    """
    spec = spec or MeasureSpec("lazy_rw", alpha=0.5)
    measures = build_measures(spec, graph=graph, points=points)
    fields = {
        "spt": [src_field(graph, "spt", spec, p, root=root, measures=measures)],
        "mst": [src_field(graph, "mst", spec, p, root=root, measures=measures)],
        "random": [src_field(graph, "random", spec, p, root=root, seed=s, measures=measures)
                   for s in seeds],
    }
    pooled = {mode: np.concatenate([f.kappa for f in fs]) for mode, fs in fields.items()}
    lo = min(v.min() for v in pooled.values())
    hi = max(v.max() for v in pooled.values())
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    return {
        mode: {"fields": fs, "summary": summarize(pooled[mode]),
               "histogram": curvature_histogram(pooled[mode], bins, (lo, hi)),
               "stretch": summarize(np.concatenate([tree_stretch(graph, f) for f in fs]))}
        for mode, fs in fields.items()
    }


@dataclass
class BenchRecord:
    method: str
    n: int
    m: int
    mean_degree: float
    median_ms: float
    iqr_ms: float
    iterations: int
    threads: int

    def to_dict(self) -> dict:
        return asdict(self)


def time_flow_iteration(graph: WeightedGraph, method: Method, spec: MeasureSpec | None = None,
                        repeats: int = 3, points=None) -> np.ndarray:
    """Wall times (ms) of ``repeats`` flow iterations after one untimed warm-up."""
    if repeats < 3:
        raise ValueError("use at least 3 repetitions")
    spec = spec or MeasureSpec("lazy_rw", alpha=0.5)
    measures = build_measures(spec, graph=graph, points=points)
    state = initial_state(graph)
    flow_step(graph, state, method, spec, measures=measures, points=points)
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        flow_step(graph, state, method, spec, measures=measures, points=points)
        times.append((time.perf_counter() - start) * 1e3)
    return np.array(times)


def bench(graphs, methods=("src-spt", "src-mst", "orc"), spec: MeasureSpec | None = None,
          repeats: int = 3, threads: int = 1) -> list[BenchRecord]:
    """Median and interquartile range of per-iteration flow time per graph and method."""
    records = []
    for g in graphs:
        for name in methods:
            method = name if isinstance(name, Method) else Method.parse(name, threads=threads)
            t = time_flow_iteration(g, method, spec, repeats)
            q25, q50, q75 = np.quantile(t, [0.25, 0.5, 0.75])
            records.append(BenchRecord(method.name, g.node_count, g.m, 2.0 * g.m / g.node_count,
                                       float(q50), float(q75 - q25), repeats, method.threads))
    return records
