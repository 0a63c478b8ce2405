"""Command-line interface: ``sobolev-ricci <command> ...``.

Every command writes its outputs plus a ``manifest.json`` recording the
parameters, seed, input hashes and timing. Exit status is 0 on success,
1 on a runtime or data error and 2 on a usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import io
from .community import RESOLUTION_GRID, ari, louvain, louvain_grid, modularity
from .diagnostics import (bench, curvature_histogram, dirac_sweep, random_root_pairs,
                          root_sensitivity, tree_robustness)
from .exceptions import SobolevRicciError
from .flow import Method, run_flow, to_similarity
from .generators import MANIFOLD_KINDS, knn_graph_with_labels, manifold, sbm
from .measures import MeasureSpec
from .pruning import curvature_only_prune, distance_only_prune, manl_prune

METHODS = ("src-spt", "src-mst", "src-random", "orc")


class UsageError(Exception):
    pass


def _measure_spec(args) -> MeasureSpec:
    if args.measure == "dirac":
        return MeasureSpec("dirac")
    if args.measure == "lazy_rw":
        return MeasureSpec("lazy_rw", alpha=args.alpha)
    if args.sigma is None or args.knn is None:
        raise UsageError("gaussian_knn measures need --sigma and --knn")
    return MeasureSpec("gaussian_knn", sigma=args.sigma, k=args.knn, p_norm=args.p_norm)


def _method(args) -> Method:
    return Method.parse(args.method, p=args.p, root=args.root, seed=args.seed, threads=args.threads)


def _points(args):
    return io.read_points(args.points) if getattr(args, "points", None) else None


def _out_dir(args) -> Path:
    out = Path(args.out) if args.out else io.output_dir()
    out.mkdir(parents=True, exist_ok=True)
    return out


def _params(args) -> dict:
    skip = {"func", "config", "out"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _finish(args, out: Path, inputs, outputs, start) -> None:
    manifest = io.run_manifest(args.command_path, _params(args), getattr(args, "seed", None),
                               inputs, outputs, time.perf_counter() - start, args.threads)
    io.write_json(manifest, out / "manifest.json")


def cmd_gen_sbm(args, start):
    out = _out_dir(args)
    lg = sbm(args.n, args.k, args.p_intra, args.rho, args.seed)
    io.write_edge_list(lg.graph, out / "graph.csv")
    io.write_partition(lg.communities, out / "labels.csv")
    files = [out / "graph.csv", out / "labels.csv"]
    io.write_json({"kind": "sbm", "parameters": lg.params, "seed": args.seed,
                   "files": [p.name for p in files]}, out / "dataset.json")
    _finish(args, out, [], files + [out / "dataset.json"], start)


def cmd_gen_manifold(args, start):
    out = _out_dir(args)
    shape = {}
    if args.kind == "concentric_circles":
        shape = {"r1": args.r1, "r2": args.r2}
    cloud = manifold(args.kind, args.n, args.noise, args.seed, **shape)
    io.write_points(cloud.points, out / "points.csv")
    cols = ["component"] + [f"t{i}" for i in range(cloud.intrinsic.shape[1])]
    io.write_points(np.column_stack([cloud.component, cloud.intrinsic]), out / "intrinsic.csv", cols)
    lg = knn_graph_with_labels(cloud, args.knn, args.c_s)
    if not lg.graph.connected:
        warnings.warn(f"kNN graph has {lg.graph.n_components} components", stacklevel=1)
    io.write_edge_list(lg.graph, out / "graph.csv")
    io.write_edge_values(lg.graph, lg.shortcut.astype(int), out / "shortcuts.csv", "shortcut")
    files = [out / n for n in ("points.csv", "intrinsic.csv", "graph.csv", "shortcuts.csv")]
    io.write_json({"kind": args.kind, "parameters": lg.params, "seed": args.seed,
                   "n_shortcuts": int(lg.shortcut.sum()), "files": [p.name for p in files]},
                  out / "dataset.json")
    _finish(args, out, [], files + [out / "dataset.json"], start)


def cmd_curvature(args, start):
    g = io.read_edge_list(args.graph)
    method = _method(args)
    fld = method.field(g, _measure_spec(args), points=_points(args))
    out = Path(args.out) if args.out else io.output_dir() / "curvature.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    io.write_curvature(fld, out, io.node_names(g))
    inputs = [args.graph] + ([args.points] if args.points else [])
    _finish(args, out.parent, inputs, [out], start)


def cmd_flow(args, start):
    g = io.read_edge_list(args.graph)
    state = run_flow(g, _method(args), _measure_spec(args), args.iters, args.eps, points=_points(args))
    out = _out_dir(args)
    io.write_edge_values(g, state.weights, out / "weights.csv", "weight")
    io.write_json({"iterations": state.t, "converged": state.converged,
                   "trace": state.trace_records()}, out / "trace.json")
    inputs = [args.graph] + ([args.points] if args.points else [])
    _finish(args, out, inputs, [out / "weights.csv", out / "trace.json"], start)


def cmd_cluster(args, start):
    g = io.read_edge_list(args.graph)
    w = io.read_edge_values(args.weights, g, "weight") if args.weights else g.length
    sim = to_similarity(w, args.beta)
    if args.grid:
        labels, res, _ = louvain_grid(g, sim, RESOLUTION_GRID, args.seed)
    else:
        res = args.resolution
        labels = louvain(g, sim, res, args.seed)
    out = _out_dir(args)
    io.write_partition(labels, out / "partition.csv", io.node_names(g))
    metrics = {"modularity": modularity(g, labels, sim), "resolution": res,
               "communities": int(labels.max()) + 1}
    inputs = [args.graph] + ([args.weights] if args.weights else [])
    if args.truth:
        metrics["ari"] = ari(labels, io.read_partition(args.truth, g))
        inputs.append(args.truth)
    io.write_json(metrics, out / "metrics.json")
    _finish(args, out, inputs, [out / "partition.csv", out / "metrics.json"], start)


def cmd_prune(args, start):
    g = io.read_edge_list(args.graph)
    shortcut = io.read_edge_values(args.shortcuts, g, "shortcut").astype(bool) if args.shortcuts else None
    spec = _measure_spec(args)
    points = _points(args)
    if args.mode == "distance":
        rep = distance_only_prune(g, args.quantile, shortcut)
    else:
        method = _method(args)
        fn = lambda graph: method.field(graph, spec, points=points)  # noqa: E731
        if args.mode == "curvature":
            rep = curvature_only_prune(g, fn(g), args.delta, shortcut)
        else:
            rep = manl_prune(g, None, args.delta, args.lambda_m, shortcut, rounds=args.rounds,
                             field_fn=fn, detour=args.detour)
    out = _out_dir(args)
    names = io.node_names(g)
    report = rep.to_dict()
    report["removed_edges"] = [[names[a], names[b]] for a, b in rep.edges]
    io.write_json(report, out / "report.json")
    with open(out / "removed.csv", "w") as fh:
        fh.write("u,v\n")
        for a, b in rep.edges:
            fh.write(f"{names[a]},{names[b]}\n")
    inputs = [p for p in (args.graph, args.shortcuts, args.points) if p]
    _finish(args, out, inputs, [out / "report.json", out / "removed.csv"], start)


def cmd_diag_root(args, start):
    g = io.read_edge_list(args.graph)
    spec = _measure_spec(args)
    recs = [root_sensitivity(g, spec, args.p, r, r2, points=_points(args)).to_dict()
            for r, r2 in random_root_pairs(g.node_count, args.pairs, args.seed)]
    out = _out_dir(args)
    io.write_json(recs, out / "root_sensitivity.json")
    _finish(args, out, [args.graph], [out / "root_sensitivity.json"], start)


def cmd_diag_dirac(args, start):
    g = io.read_edge_list(args.graph)
    schedule = [float(x) for x in args.schedule.split(",")]
    rows = dirac_sweep(g, schedule, args.family, args.p, points=_points(args), k=args.knn)
    out = _out_dir(args)
    io.write_json(rows, out / "dirac_sweep.json")
    _finish(args, out, [args.graph], [out / "dirac_sweep.json"], start)


def cmd_diag_hist(args, start):
    if args.curvature:
        _, _, kappa = io.read_curvature(args.curvature)
        inputs = [args.curvature]
    else:
        if not args.graph:
            raise UsageError("histogram needs --curvature or --graph")
        g = io.read_edge_list(args.graph)
        kappa = _method(args).field(g, _measure_spec(args), points=_points(args)).kappa
        inputs = [args.graph]
    h = curvature_histogram(kappa, args.bins)
    out = _out_dir(args)
    io.write_json(h.to_rows(), out / "histogram.json")
    _finish(args, out, inputs, [out / "histogram.json"], start)


def cmd_diag_trees(args, start):
    g = io.read_edge_list(args.graph)
    seeds = list(range(args.seed or 0, (args.seed or 0) + args.trees))
    res = tree_robustness(g, _measure_spec(args), args.p, seeds, root=args.root, bins=args.bins,
                          points=_points(args))
    out = _out_dir(args)
    payload = {mode: {"summary": r["summary"], "histogram": r["histogram"].to_rows(),
                      "stretch": r["stretch"]}
               for mode, r in res.items()}
    io.write_json(payload, out / "tree_robustness.json")
    _finish(args, out, [args.graph], [out / "tree_robustness.json"], start)


def cmd_bench(args, start):
    graphs = [io.read_edge_list(p) for p in args.graph]
    recs = bench(graphs, args.methods, _measure_spec(args), args.repeats, args.threads)
    out = _out_dir(args)
    io.write_json([r.to_dict() for r in recs], out / "bench.json")
    _finish(args, out, args.graph, [out / "bench.json"], start)


def _add_measure(p):
    g = p.add_argument_group("measure")
    g.add_argument("--measure", choices=("lazy_rw", "gaussian_knn", "dirac"), default="lazy_rw")
    g.add_argument("--alpha", type=float, default=0.5, help="laziness of the random walk")
    g.add_argument("--sigma", type=float, help="Gaussian width")
    g.add_argument("--knn", type=int, help="neighbors of the Gaussian measure")
    g.add_argument("--p-norm", type=float, default=2.0, help="feature-space norm")
    g.add_argument("--points", help="point-cloud CSV for Gaussian measures")


def _add_method(p, default="src-spt"):
    p.add_argument("--method", choices=METHODS, default=default)
    p.add_argument("--p", type=float, default=1.0, help="transport exponent")
    p.add_argument("--root", type=int, default=0, help="tree root")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> tuple[argparse.ArgumentParser, list[argparse.ArgumentParser]]:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of flag values; explicit flags win")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--out", help=f"output path (default ${io.OUTPUT_DIR_ENV} or .)")

    parser = argparse.ArgumentParser(prog="sobolev-ricci", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    leaves = []

    def leaf(subparsers, name, func, path, **kw):
        p = subparsers.add_parser(name, parents=[common], **kw)
        p.set_defaults(func=func, command_path=path)
        leaves.append(p)
        return p

    gen = sub.add_parser("gen", help="generate datasets").add_subparsers(dest="kind_", required=True)
    p = leaf(gen, "sbm", cmd_gen_sbm, "gen sbm", help="stochastic block model")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--k", type=int, default=2, help="number of blocks")
    p.add_argument("--p-intra", type=float, default=0.15)
    p.add_argument("--rho", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p = leaf(gen, "manifold", cmd_gen_manifold, "gen manifold", help="manifold point cloud")
    p.add_argument("--kind", choices=MANIFOLD_KINDS, required=True)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--knn", type=int, default=10, help="k of the kNN graph")
    p.add_argument("--c-s", type=float, default=3.0, help="shortcut geodesic/ambient ratio")
    p.add_argument("--r1", type=float, default=1.0)
    p.add_argument("--r2", type=float, default=2.0)

    p = leaf(sub, "curvature", cmd_curvature, "curvature", help="edge curvature field")
    p.add_argument("--graph", required=True)
    _add_method(p)
    _add_measure(p)

    p = leaf(sub, "flow", cmd_flow, "flow", help="Ricci flow reweighting")
    p.add_argument("--graph", required=True)
    p.add_argument("--iters", type=int, default=20)
    p.add_argument("--eps", type=float, default=1e-4)
    _add_method(p)
    _add_measure(p)

    p = leaf(sub, "cluster", cmd_cluster, "cluster", help="Louvain on flowed weights")
    p.add_argument("--graph", required=True)
    p.add_argument("--weights", help="weights CSV from flow; graph lengths otherwise")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--resolution", type=float, default=1.0)
    p.add_argument("--grid", action="store_true", help="best modularity over the resolution grid")
    p.add_argument("--truth", help="ground-truth partition CSV")
    p.add_argument("--seed", type=int, default=0)

    p = leaf(sub, "prune", cmd_prune, "prune", help="curvature-based edge pruning")
    p.add_argument("--graph", required=True)
    p.add_argument("--shortcuts", help="ground-truth shortcut CSV")
    p.add_argument("--mode", choices=("manl", "curvature", "distance"), default="manl")
    p.add_argument("--delta", type=float, default=0.75)
    p.add_argument("--lambda", dest="lambda_m", type=float, default=0.01)
    p.add_argument("--rounds", type=int, default=1)
    p.add_argument("--detour", choices=("candidates", "single"), default="candidates")
    p.add_argument("--quantile", type=float, default=0.95)
    _add_method(p)
    _add_measure(p)

    diag = sub.add_parser("diag", help="diagnostics").add_subparsers(dest="diag_", required=True)
    p = leaf(diag, "root-sensitivity", cmd_diag_root, "diag root-sensitivity")
    p.add_argument("--graph", required=True)
    p.add_argument("--pairs", type=int, default=10)
    _add_method(p)
    _add_measure(p)
    p = leaf(diag, "dirac-sweep", cmd_diag_dirac, "diag dirac-sweep")
    p.add_argument("--graph", required=True)
    p.add_argument("--family", choices=("alpha", "sigma"), default="alpha")
    p.add_argument("--schedule", default="0.5,0.9,0.99,0.999,1.0")
    _add_method(p)
    _add_measure(p)
    p = leaf(diag, "histogram", cmd_diag_hist, "diag histogram")
    p.add_argument("--curvature", help="curvature CSV")
    p.add_argument("--graph")
    p.add_argument("--bins", type=int, default=20)
    _add_method(p)
    _add_measure(p)
    p = leaf(diag, "tree-robustness", cmd_diag_trees, "diag tree-robustness")
    p.add_argument("--graph", required=True)
    p.add_argument("--trees", type=int, default=5, help="random spanning trees")
    p.add_argument("--bins", type=int, default=20)
    _add_method(p)
    _add_measure(p)

    p = leaf(sub, "bench", cmd_bench, "bench", help="per-iteration flow timing")
    p.add_argument("--graph", nargs="+", required=True)
    p.add_argument("--methods", nargs="+", choices=METHODS, default=list(METHODS))
    p.add_argument("--repeats", type=int, default=3)
    _add_measure(p)
    return parser, leaves


def _apply_config(argv, leaves) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    with open(known.config) as fh:
        cfg = json.load(fh)
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    if "lambda" in cfg:
        cfg["lambda_m"] = cfg.pop("lambda")
    for p in leaves:
        dests = {a.dest for a in p._actions}
        p.set_defaults(**{k: v for k, v in cfg.items() if k in dests})
        for a in p._actions:
            if a.dest in cfg:
                a.required = False


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, leaves = build_parser()
    try:
        _apply_config(argv, leaves)
    except (OSError, ValueError) as exc:
        print(f"sobolev-ricci: bad config: {exc}", file=sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    start = time.perf_counter()
    try:
        args.func(args, start)
    except UsageError as exc:
        print(f"sobolev-ricci: {exc}", file=sys.stderr)
        return 2
    except (SobolevRicciError, ValueError, OSError, KeyError, RuntimeError) as exc:
        print(f"sobolev-ricci: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
