import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from setreg.setcore import (INF, Box, FiniteMultifunction, Interval, PointList, Singleton, Window,
                            as_set, dist_point_set, dists_to_set, excess, invert, jsonable,
                            lattice, product_dist, sample_multifunction, unique_rows)


def brute_dist(x, A, kind):
    # plain-python reference
    best = math.inf
    for a in A:
        diffs = [abs(u - v) for u, v in zip(x, a)]
        d = {"max": max(diffs), "sum": sum(diffs), "euclid": math.sqrt(sum(t * t for t in diffs))}[kind]
        best = min(best, d)
    return best


coord = st.integers(-20, 20).map(lambda k: k / 4)
points2 = st.lists(st.tuples(coord, coord), min_size=0, max_size=12)
kinds = st.sampled_from(["max", "sum", "euclid"])


def test_dist_examples():
    assert dist_point_set([0.0], [[1.0], [2.0]]) == 1.0
    assert dist_point_set([3.0], np.empty((0, 1))) == INF
    # additive product metric: one unit per component
    assert product_dist(dist_point_set([0.0], [[1.0]]), dist_point_set([0.0], [[1.0]])) == 2.0
    assert dist_point_set([0.0, 0.0], [[1.0, 1.0]], "sum") == 2.0


def test_dist_dimension_mismatch():
    with pytest.raises(ValueError):
        dist_point_set([0.0, 0.0], [[1.0, 2.0, 3.0]])


def test_excess_examples():
    assert excess([[0.0], [2.0]], [[0.0]]) == 2.0
    assert excess([[0.5]], np.empty((0, 1))) == INF
    assert excess(np.empty((0, 1)), [[1.0]]) == 0.0
    assert excess([[1.0]], [[0.0], [1.0]]) == 0.0


@settings(max_examples=200, deadline=None)
@given(x=st.tuples(coord, coord), A=points2, kind=kinds)
def test_dist_matches_brute_force(x, A, kind):
    got = dist_point_set(x, np.array(A).reshape(-1, 2), kind)
    ref = brute_dist(x, A, kind)
    assert got == ref if math.isinf(ref) else got == pytest.approx(ref, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(x=st.tuples(coord, coord), y=st.tuples(coord, coord), A=points2, kind=kinds)
def test_triangle_transfer(x, y, A, kind):
    A = np.array(A).reshape(-1, 2)
    dxy = dist_point_set(x, [y], kind)
    assert dist_point_set(x, A, kind) <= dxy + dist_point_set(y, A, kind) + 1e-12


@settings(max_examples=200, deadline=None)
@given(x=st.tuples(coord, coord), A=points2)
def test_zero_distance_iff_member(x, A):
    d = dist_point_set(x, np.array(A).reshape(-1, 2))
    assert d >= 0
    assert (d == 0) == (tuple(x) in set(A))


@settings(max_examples=200, deadline=None)
@given(A=points2, B=points2)
def test_excess_zero_iff_subset(A, B):
    e = excess(np.array(A).reshape(-1, 2), np.array(B).reshape(-1, 2))
    assert (e == 0) == set(A).issubset(set(B))


def test_kdtree_route_matches_brute_force():
    rng = np.random.default_rng(3)
    X = rng.uniform(-1, 1, size=(2100, 2))
    A = rng.uniform(-1, 1, size=(2000, 2))
    for kind in ("max", "sum", "euclid"):
        fast = dists_to_set(X, A, kind)  # above the pair threshold
        slow = np.array([dists_to_set(X[i:i + 1], A, kind)[0] for i in range(0, 2100, 100)])
        assert np.allclose(fast[::100], slow, atol=1e-14)


def test_sample_examples():
    F = sample_multifunction(lambda x: [Interval(0.0, 1.0)], [[0.0]], Window([-5], [5]), 0.5)
    assert F.image([0.0]).ravel().tolist() == [0.0, 0.5, 1.0]
    F = sample_multifunction(lambda x: [Interval(0.0, 1.0, lo_open=True)], [[0.0]],
                             Window([-5], [5]), 0.25)
    assert F.image([0.0]).ravel().tolist() == [0.25, 0.5, 0.75, 1.0]
    F = sample_multifunction(lambda x: [Interval(-INF, INF)], [[0.0]], Window([-1], [1]), 1.0)
    assert F.image([0.0]).ravel().tolist() == [-1.0, 0.0, 1.0]


def test_sample_pieces():
    F = sample_multifunction(lambda x: [Singleton(x), PointList([[3.0], [9.0]])],
                             [[0.0], [1.0]], Window([-5], [5]), 1.0)
    assert F.image([1.0]).ravel().tolist() == [1.0, 3.0]
    G = sample_multifunction(lambda x: [Box([0, 0], [1, 1])], [[0.0]], Window([0, 0], [2, 2]), 1.0)
    assert len(G.image([0.0])) == 4
    E = sample_multifunction(lambda x: [], [[0.0]], Window([0], [1]), 1.0)
    assert E.image([0.0]).shape == (0, 1)
    assert not E.dom_mask()[0]


def test_degenerate_window():
    with pytest.raises(ValueError):
        Window([1.0], [0.0])
    with pytest.raises(ValueError):
        sample_multifunction(lambda x: [], [[0.0]], Window([0], [1]), 0.0)


@settings(max_examples=50, deadline=None)
@given(lo=st.integers(-8, 0), length=st.integers(0, 8), k=st.integers(1, 3))
def test_refinement_is_superset(lo, length, k):
    h = 2.0 ** -k
    orc = lambda x: [Interval(lo * h, (lo + length) * h)]
    coarse = sample_multifunction(orc, [[0.0]], Window([-4], [4]), h).image([0.0])
    fine = sample_multifunction(orc, [[0.0]], Window([-4], [4]), h / 2).image([0.0])
    assert {tuple(r) for r in coarse} <= {tuple(r) for r in fine}


def test_invert_examples():
    F = FiniteMultifunction([[0.0]], [[[1.0]]])
    assert invert(F).graph_set() == {((1.0,), (0.0,))}
    g = lattice([-1], [1], 0.5)
    I = FiniteMultifunction(g, [[x] for x in g])
    assert invert(I).graph_set() == I.graph_set()
    D = FiniteMultifunction([[-1.0], [0.0], [1.0]], [[[-2.0]], [[0.0]], [[2.0]]])
    Di = invert(D)
    assert Di.graph_set() == {((-2.0,), (-1.0,)), ((0.0,), (0.0,)), ((2.0,), (1.0,))}


@settings(max_examples=100, deadline=None)
@given(st.lists(st.lists(st.integers(-3, 3), max_size=4), min_size=1, max_size=6))
def test_invert_involution(imgs):
    dom = [[float(i)] for i in range(len(imgs))]
    F = FiniteMultifunction(dom, [np.array(im, dtype=float).reshape(-1, 1) for im in imgs])
    if not F.graph_set():
        with pytest.raises(ValueError):
            invert(F)
        return
    transposed = {(y, x) for x, y in F.graph_set()}
    assert invert(F).graph_set() == transposed
    assert invert(invert(F)).graph_set() == F.graph_set()


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), max_size=30))
def test_unique_rows_matches_numpy(rows):
    a = np.array(rows, dtype=float).reshape(-1, 2)
    ref = np.unique(a, axis=0) if len(a) else a
    assert np.array_equal(unique_rows(a), ref)


def test_as_set_dedups():
    assert as_set([[1.0], [1.0], [0.0]]).ravel().tolist() == [0.0, 1.0]
    with pytest.raises(ValueError):
        as_set([[np.nan]])


def test_json_roundtrip():
    F = sample_multifunction(lambda x: [Interval(0.0, abs(x))], lattice([-1], [1], 0.5),
                             Window([0], [2]), 0.5, h_x=0.5, norm_y="sum")
    G = FiniteMultifunction.from_dict(F.to_dict())
    assert G.graph_set() == F.graph_set()
    assert (G.norm_x, G.norm_y) == ("max", "sum")
    assert np.array_equal(G.codomain, F.codomain)


def test_jsonable_infinity():
    assert jsonable({"a": INF, "b": np.float64(2.0), "c": [np.int64(1)]}) == {
        "a": "+inf", "b": 2.0, "c": [1]}


def test_lattice_includes_endpoint():
    g = lattice([0], [1], 0.3)
    assert g.ravel().tolist() == [0.0, 0.3, 0.6, 0.9, 1.0]
    assert lattice([0, 0], [1, 1], 0.5).shape == (9, 2)
