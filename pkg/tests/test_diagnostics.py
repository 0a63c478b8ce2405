import warnings

import numpy as np
import pytest

from conftest import random_connected_graph, random_tree
from sobolev_ricci import (MeasureSpec, bench, build_graph, curvature_histogram, dirac_sweep, orc_field,
                           root_sensitivity, sbm, src_field, tree_robustness)
from sobolev_ricci.diagnostics import (lazy_envelope, random_root_pairs, summarize, time_flow_iteration,
                                      tree_stretch)
from sobolev_ricci.exceptions import DegenerateSigma
from sobolev_ricci.flow import Method
from sobolev_ricci.generators import knn_graph


# root sensitivity

def test_same_root_is_zero():
    g = sbm(60, 2, 0.3, 0.3, seed=1).graph
    r = root_sensitivity(g, r=4, r2=4)
    assert r.delta_tree_edges == 0 and r.l1_curvature_diff == 0.0 and r.within_bound


def test_path_ends_is_zero():
    g = build_graph([(i, i + 1, 1.0 + 0.1 * i) for i in range(9)])
    r = root_sensitivity(g, MeasureSpec("lazy_rw", alpha=0.3), 1.0, 0, 9)
    assert r.delta_tree_edges == 0 and r.l1_curvature_diff == 0.0 and r.within_bound


def test_root_sensitivity_bound_on_sbm():
    g = sbm(100, 2, 0.15, 0.3, seed=0).graph
    spec = MeasureSpec("lazy_rw", alpha=0.5)
    recs = [root_sensitivity(g, spec, 1.0, a, b) for a, b in random_root_pairs(100, 10, seed=0)]
    for r in recs:
        assert r.delta_tree_edges > 0
        assert r.ratio <= r.bound_constant
        assert r.bound_constant == pytest.approx(r.l_max * (1 / r.d_min + r.s_max / r.d_min ** 2))
    print("max ratio / bound:", max(r.ratio / r.bound_constant for r in recs))


def test_root_record_constants_from_fields():
    g = random_connected_graph(np.random.default_rng(3), 30, extra=30)
    spec = MeasureSpec("lazy_rw", alpha=0.5)
    r = root_sensitivity(g, spec, 2.0, 0, 5)
    f1 = src_field(g, "spt", spec, 2.0, root=0)
    f2 = src_field(g, "spt", spec, 2.0, root=5)
    assert r.l1_curvature_diff == pytest.approx(np.mean(np.abs(f1.kappa - f2.kappa)))
    assert r.d_min == min(f1.base.min(), f2.base.min())
    assert r.s_max == max(f1.transport.max(), f2.transport.max())
    assert r.to_dict()["roots"] == [0, 5]


def test_random_root_pairs_distinct():
    pairs = random_root_pairs(10, 50, seed=1)
    assert all(a != b for a, b in pairs)
    assert pairs == random_root_pairs(10, 50, seed=1)


# Dirac sweep

def test_alpha_one_both_zero():
    g = random_connected_graph(np.random.default_rng(0), 25, extra=25)
    row = dirac_sweep(g, [1.0])[0]
    assert row["max_abs_src"] == 0.0 and row["max_abs_orc"] == 0.0


def test_alpha_schedule_decreases_under_envelope():
    g = random_connected_graph(np.random.default_rng(1), 30, extra=30, unit=True)
    rows = dirac_sweep(g, [0.5, 0.9, 0.99, 0.999])
    src = [r["max_abs_src"] for r in rows]
    assert all(b <= a + 1e-12 for a, b in zip(src, src[1:]))
    assert src[-1] <= 1e-2
    for r in rows:
        assert r["max_abs_src"] <= r["envelope"] and r["max_abs_orc"] <= r["envelope"]


def test_envelope_formula():
    g = build_graph([(0, 1, 2.0), (1, 2, 3.0)])
    assert lazy_envelope(g, 0.9, 0.5) == pytest.approx(0.1 * 5.0 / 0.5)


def test_sigma_schedule_numerical_dirac():
    pts = np.random.default_rng(2).random((80, 2))
    g = knn_graph(pts, 6)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateSigma)
        rows = dirac_sweep(g, [0.5, 0.05, 1e-4], "sigma", points=pts, k=6)
    assert rows[-1]["max_abs_src"] <= 1e-6 and rows[-1]["max_abs_orc"] <= 1e-6


def test_sweep_rejects_unknown_family(path_abc):
    with pytest.raises(ValueError):
        dirac_sweep(path_abc, [0.5], "beta")


# histograms

def test_constant_field_single_bin():
    h = curvature_histogram(np.full(7, 0.25), bins=10)
    assert (h.counts > 0).sum() == 1 and h.counts.sum() == 7
    assert len(h.edges) == 11


def test_counts_sum_to_edges():
    g = random_connected_graph(np.random.default_rng(4), 40, extra=40)
    fld = src_field(g)
    h = curvature_histogram(fld, bins=7)
    assert h.counts.sum() == g.m
    assert sum(r["count"] for r in h.to_rows()) == g.m


def test_tree_histograms_src_equal_orc():
    g = random_tree(np.random.default_rng(5), 60)
    spec = MeasureSpec("lazy_rw", alpha=0.5)
    a = curvature_histogram(src_field(g, "spt", spec), bins=12, range=(-1, 1))
    b = curvature_histogram(orc_field(g, spec), bins=12, range=(-1, 1))
    assert a.counts.tolist() == b.counts.tolist()


def test_empty_histogram_rejected():
    with pytest.raises(ValueError):
        curvature_histogram(np.array([]))


def test_summarize():
    s = summarize([0.0, 1.0, 2.0, 3.0])
    assert s["mean"] == 1.5 and s["median"] == 1.5 and s["min"] == 0.0 and s["max"] == 3.0


# tree robustness

def test_tree_input_all_modes_identical():
    g = random_tree(np.random.default_rng(6), 30)
    res = tree_robustness(g, seeds=(0, 1))
    ref = res["spt"]["fields"][0].kappa
    for mode in ("mst", "random"):
        for f in res[mode]["fields"]:
            np.testing.assert_allclose(f.kappa, ref, rtol=0, atol=1e-12)


def test_tree_robustness_on_sbm():
    g = sbm(100, 2, 0.2, 0.3, seed=1).graph
    res = tree_robustness(g, seeds=range(5))
    assert len(res["random"]["fields"]) == 5
    for mode, r in res.items():
        for f in r["fields"]:
            assert len(f) == g.m and np.all(f.kappa <= 1)
        assert r["histogram"].edges.tolist() == res["spt"]["histogram"].edges.tolist()
        print(mode, {k: round(v, 4) for k, v in r["summary"].items()})


def test_tree_stretch(cycle4):
    # SPT from 0 keeps (0,1), (1,2), (0,3); the chord (2,3) detours over three edges
    fld = src_field(cycle4, "spt", p=2.0)
    stretch = dict(zip(zip(fld.u.tolist(), fld.v.tolist()), tree_stretch(cycle4, fld).tolist()))
    assert stretch[(2, 3)] == pytest.approx(3.0)
    assert all(stretch[e] == pytest.approx(1.0) for e in [(0, 1), (1, 2), (0, 3)])
    assert tree_robustness(cycle4, seeds=[0])["spt"]["stretch"]["max"] == pytest.approx(3.0)


# bench

def test_bench_records():
    g = sbm(60, 2, 0.3, 0.3, seed=2).graph
    recs = bench([g], ("src-spt", "orc"), repeats=3)
    assert [r.method for r in recs] == ["src-spt", "orc"]
    for r in recs:
        assert r.median_ms > 0 and r.iqr_ms >= 0 and r.iterations == 3 and r.threads == 1
        assert r.mean_degree == pytest.approx(2 * g.m / g.node_count)


def test_bench_needs_three_repeats():
    g = sbm(40, 2, 0.4, 0.5, seed=0).graph
    with pytest.raises(ValueError):
        time_flow_iteration(g, Method.parse("src-spt"), repeats=2)
