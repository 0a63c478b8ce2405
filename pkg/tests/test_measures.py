import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_connected_graph
from sobolev_ricci import MeasureSpec, build_graph, build_measures, dirac, gaussian_knn_measure, lazy_rw_measure
from sobolev_ricci.exceptions import DegenerateSigma, IsolatedNode, UnknownNode


def test_dirac():
    mu = dirac(3)
    assert mu.as_dict() == {3: 1.0}
    assert mu.mass.sum() == 1.0


def test_dirac_unknown_node():
    with pytest.raises(UnknownNode):
        dirac(5, node_count=3)


def test_lazy_path_middle(path_abc):
    assert lazy_rw_measure(path_abc, 1, 0.5).as_dict() == {0: 0.25, 1: 0.5, 2: 0.25}


def test_lazy_alpha_one_is_dirac(path_abc):
    assert lazy_rw_measure(path_abc, 1, 1.0).as_dict() == {1: 1.0}


def test_lazy_alpha_zero_uniform_on_neighbors():
    star = build_graph([(0, 1), (0, 2), (0, 3)])
    mu = lazy_rw_measure(star, 0, 0.0).as_dict()
    assert mu == pytest.approx({1: 1 / 3, 2: 1 / 3, 3: 1 / 3})


def test_lazy_isolated_node():
    g = build_graph([(0, 1)], 3)
    with pytest.raises(IsolatedNode):
        lazy_rw_measure(g, 2, 0.5)
    assert lazy_rw_measure(g, 2, 1.0).as_dict() == {2: 1.0}


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.0, 1.0))
def test_lazy_tv_to_dirac_is_one_minus_alpha(seed, alpha):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(rng, 15, extra=10)
    x = int(rng.integers(0, 15))
    mu = lazy_rw_measure(g, x, alpha)
    assert mu.total_variation(dirac(x)) == pytest.approx(1.0 - alpha, abs=1e-12)


def test_gaussian_two_points():
    pts = np.array([[0.0], [1.5]])
    sigma = 2.0
    mu = gaussian_knn_measure(pts, 0, k=1, sigma=sigma)
    w = np.array([1.0, np.exp(-1.5 ** 2 / sigma ** 2)])
    np.testing.assert_allclose(mu.mass, w / w.sum(), rtol=1e-14)


def test_gaussian_large_sigma_uniform():
    rng = np.random.default_rng(0)
    pts = rng.random((30, 2))
    mu = gaussian_knn_measure(pts, 4, k=6, sigma=1e6)
    np.testing.assert_allclose(mu.mass, np.full(7, 1 / 7), atol=1e-6)


def test_gaussian_small_sigma_is_numerical_dirac():
    rng = np.random.default_rng(1)
    pts = rng.random((40, 2))
    dmin = min(np.linalg.norm(pts[i] - pts[j]) for i in range(40) for j in range(i))
    mu = gaussian_knn_measure(pts, 7, k=5, sigma=0.01 * dmin)
    # evaluate the weights directly: exp(-d^2/sigma^2) for d >= dmin is at most exp(-1e4)
    assert mu.as_dict().get(7, 0.0) >= 1.0 - 1e-9


def test_gaussian_includes_center_and_k_neighbors():
    pts = np.arange(10.0)[:, None]
    mu = gaussian_knn_measure(pts, 5, k=2, sigma=10.0)
    assert mu.support.tolist() == [4, 5, 6]
    # with k=1 the tie between 4 and 6 goes to the smaller index
    assert gaussian_knn_measure(pts, 5, k=1, sigma=10.0).support.tolist() == [4, 5]


def test_gaussian_p_norm_changes_neighbors():
    pts = np.array([[0.0, 0.0], [0.9, 0.9], [1.2, 0.0], [5.0, 5.0]])
    l2 = gaussian_knn_measure(pts, 0, k=1, sigma=1.0, p_norm=2.0)
    linf = gaussian_knn_measure(pts, 0, k=1, sigma=1.0, p_norm=np.inf)
    # point 1 is nearer in l-infinity (0.9 < 1.2) but farther in l2 (1.27 > 1.2)
    assert l2.support.tolist() == [0, 2]
    assert linf.support.tolist() == [0, 1]


def test_build_measures_flags_degenerate_sigma():
    pts = np.random.default_rng(2).random((20, 2))
    with pytest.warns(DegenerateSigma):
        ms = build_measures(MeasureSpec("gaussian_knn", sigma=1e-9, k=3), points=pts)
    assert all(m.degenerate for m in ms)
    assert all(m.as_dict() == {i: 1.0} for i, m in enumerate(ms))


@pytest.mark.parametrize("kwargs", [
    dict(kind="lazy_rw", alpha=1.5),
    dict(kind="lazy_rw", alpha=0.5, sigma=1.0),
    dict(kind="gaussian_knn", sigma=1.0),
    dict(kind="gaussian_knn", sigma=-1.0, k=3),
    dict(kind="dirac", alpha=0.5),
    dict(kind="heat"),
])
def test_measure_spec_parameters_present_iff_required(kwargs):
    with pytest.raises(ValueError):
        MeasureSpec(**kwargs)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.0, 1.0), st.floats(0.05, 5.0), st.integers(1, 8))
def test_every_measure_is_normalized(seed, alpha, sigma, k):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(rng, 20, extra=15)
    pts = rng.normal(size=(20, 3))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateSigma)
        ms = (build_measures(MeasureSpec("lazy_rw", alpha=alpha), graph=g)
              + build_measures(MeasureSpec("gaussian_knn", sigma=sigma, k=k), points=pts)
              + build_measures(MeasureSpec("dirac"), graph=g))
    for m in ms:
        assert abs(m.mass.sum() - 1.0) <= 1e-12
        assert np.all(m.mass >= 0)
        assert np.all(np.diff(m.support) > 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_gaussian_translation_invariant_and_permutation_equivariant(seed):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(25, 2))
    spec = MeasureSpec("gaussian_knn", sigma=0.7, k=4)
    base = build_measures(spec, points=pts)
    shifted = build_measures(spec, points=pts + rng.normal(size=2) * 10)
    for a, b in zip(base, shifted):
        assert a.support.tolist() == b.support.tolist()
        np.testing.assert_allclose(a.mass, b.mass, rtol=1e-9, atol=1e-12)
    perm = rng.permutation(25)
    permuted = build_measures(spec, points=pts[perm])
    # node j of the permuted cloud is node perm[j] of the original
    for j, m in enumerate(permuted):
        mapped = {int(perm[s]): w for s, w in m.as_dict().items()}
        ref = base[perm[j]].as_dict()
        assert mapped.keys() == ref.keys()
        for key in ref:
            assert mapped[key] == pytest.approx(ref[key], rel=1e-9, abs=1e-12)
