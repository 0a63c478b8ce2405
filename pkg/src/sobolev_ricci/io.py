"""File formats: edge lists, point clouds, curvature and partition CSVs, run manifests."""
from __future__ import annotations

import csv
import hashlib
import json
import os
import re
import subprocess
from pathlib import Path

import numpy as np

from .graph import WeightedGraph, build_graph
from .sobolev import CurvatureField

OUTPUT_DIR_ENV = "SOBOLEV_RICCI_OUT"


def output_dir(default: str | os.PathLike = ".") -> Path:
    """Default output directory: ``$SOBOLEV_RICCI_OUT`` if set."""
    return Path(os.environ.get(OUTPUT_DIR_ENV, default))


def _node_id(token: str):
    return int(token) if re.fullmatch(r"-?\d+", token) else token


def read_edge_list(path) -> WeightedGraph:
    """Read ``u v [length]`` lines separated by whitespace or commas.

    Lines starting with ``#`` are comments and a missing length means 1.
    Node names are remapped to ``0..n-1``: integer names in ascending
    order, then other names in order of first appearance. The original
    names are kept in ``graph.labels``.
    """
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [t for t in re.split(r"[,\s]+", line) if t]
            if len(parts) not in (2, 3):
                raise ValueError(f"bad edge line: {line!r}")
            if parts[0] in ("u", "source") and len(rows) == 0:
                continue  # header
            a, b = _node_id(parts[0]), _node_id(parts[1])
            rows.append((a, b, float(parts[2]) if len(parts) == 3 else 1.0))
    names = []
    seen = set()
    for a, b, _ in rows:
        for x in (a, b):
            if x not in seen:
                seen.add(x)
                names.append(x)
    ints = sorted(x for x in names if isinstance(x, int))
    others = [x for x in names if not isinstance(x, int)]
    names = ints + others
    index = {x: i for i, x in enumerate(names)}
    return build_graph([(index[a], index[b], w) for a, b, w in rows], len(names), labels=names)


def node_names(graph: WeightedGraph) -> list:
    return graph.labels if graph.labels is not None else list(range(graph.node_count))


def write_edge_list(graph: WeightedGraph, path, lengths=None) -> None:
    names = node_names(graph)
    w = graph.length if lengths is None else lengths
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["u", "v", "length"])
        for a, b, x in zip(graph.u.tolist(), graph.v.tolist(), np.asarray(w).tolist()):
            out.writerow([names[a], names[b], repr(float(x))])


def write_partition(labels, path, names=None) -> None:
    """Write a ``node,label`` CSV."""
    labels = np.asarray(labels)
    names = list(range(len(labels))) if names is None else names
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["node", "label"])
        for n, lab in zip(names, labels.tolist()):
            out.writerow([n, lab])


def read_partition(path, graph: WeightedGraph | None = None) -> np.ndarray:
    """Read a ``node,label`` CSV, ordered by the graph's node ids when given."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.DictReader(fh)]
    table = {_node_id(r["node"]): _node_id(r["label"]) for r in rows}
    if graph is None:
        keys = sorted(table, key=lambda k: (not isinstance(k, int), k))
    else:
        keys = node_names(graph)
        missing = [k for k in keys if k not in table]
        if missing:
            raise ValueError(f"partition misses {len(missing)} nodes, e.g. {missing[0]!r}")
    raw = [table[k] for k in keys]
    _, dense = np.unique(np.asarray([str(x) for x in raw]), return_inverse=True)
    return dense.astype(np.int64)


def write_points(points, path, columns=None) -> None:
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    columns = columns or [f"x{i}" for i in range(points.shape[1])]
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(columns)
        for row in points.tolist():
            out.writerow([repr(float(x)) for x in row])


def read_points(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def write_curvature(fld: CurvatureField, path, names=None) -> None:
    """CSV ``u,v,kappa`` preceded by one ``#``-prefixed JSON line of metadata."""
    meta = {"method": fld.method, "params": fld.params}
    with open(path, "w", newline="") as fh:
        fh.write("# " + json.dumps(meta, sort_keys=True, default=_jsonable) + "\n")
        out = csv.writer(fh)
        out.writerow(["u", "v", "kappa"])
        for a, b, k in zip(fld.u.tolist(), fld.v.tolist(), fld.kappa.tolist()):
            out.writerow([names[a] if names else a, names[b] if names else b, repr(float(k))])


def read_curvature(path) -> tuple[dict, list[tuple], np.ndarray]:
    """Return ``(metadata, pairs, kappa)`` from a curvature CSV."""
    with open(path) as fh:
        first = fh.readline()
        meta = json.loads(first[1:]) if first.startswith("#") else {}
        if not first.startswith("#"):
            fh.seek(0)
        rows = list(csv.DictReader(fh))
    pairs = [(_node_id(r["u"]), _node_id(r["v"])) for r in rows]
    return meta, pairs, np.array([float(r["kappa"]) for r in rows])


def write_edge_values(graph: WeightedGraph, values, path, column: str) -> None:
    names = node_names(graph)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["u", "v", column])
        for a, b, x in zip(graph.u.tolist(), graph.v.tolist(), np.asarray(values).tolist()):
            out.writerow([names[a], names[b], repr(x) if isinstance(x, float) else int(x)])


def read_edge_values(path, graph: WeightedGraph, column: str) -> np.ndarray:
    """Per-edge values aligned with ``graph``'s edge order."""
    names = {n: i for i, n in enumerate(node_names(graph))}
    out = np.full(graph.m, np.nan)
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            e = graph.find_edge(names[_node_id(r["u"])], names[_node_id(r["v"])])
            out[e] = float(r[column])
    if np.isnan(out).any():
        raise ValueError(f"{path} does not cover every edge")
    return out


def write_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def _jsonable(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, Path):
        return str(x)
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def git_describe() -> str | None:
    try:
        res = subprocess.run(["git", "describe", "--always", "--dirty"], capture_output=True,
                             text=True, timeout=5, cwd=Path(__file__).resolve().parent)
    except (OSError, subprocess.SubprocessError):
        return None
    return res.stdout.strip() or None


def run_manifest(command: str, params: dict, seed, inputs, outputs, wall_time_s: float,
                 threads: int) -> dict:
    """Record of one run: inputs are hashed so reruns can be checked."""
    return {
        "command": command,
        "parameters": params,
        "seed": seed,
        "inputs": {str(p): sha256(p) for p in inputs},
        "outputs": [str(p) for p in outputs],
        "wall_time_s": wall_time_s,
        "threads": threads,
        "git_describe": git_describe(),
    }
