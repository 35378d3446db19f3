import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from setreg.corpus import sum_example
from setreg.regmoduli import FAILS, HOLDS, TheoremConfig, check_property
from setreg.setcore import (FiniteMultifunction, Interval, ParametricMultifunction, Singleton,
                            Window, lattice, sample_multifunction)
from setreg.sumstab import (SumStabilityConfig, check_sum_stability, check_sum_stability_param,
                            minkowski_sum, verify_calm_sum)

h = 1 / 32
g = lattice([-0.5], [0.5], h)
s = 1 / 64
small = [[i * s] for i in range(-2, 3)]


def linear(slope):
    return sample_multifunction(lambda x: [Singleton(slope * x)], g, Window([-2], [2]), h, h_x=h)


def finite(imgs):
    # integer labels scaled to a step below the sum-stability floor
    return FiniteMultifunction(small, [s * np.array(v, dtype=float).reshape(-1, 1) for v in imgs],
                               h_x=s, h_y=s)


images = st.lists(st.lists(st.integers(-3, 3), max_size=3), min_size=5, max_size=5)


def test_minkowski_examples():
    S = minkowski_sum(linear(1.0), linear(2.0))
    assert all(im.tolist() == [[3 * x[0]]] for x, im in zip(S.domain, S.images))
    I = sample_multifunction(lambda x: [Interval(0, 1)], [[0.0]], Window([0], [2]), 0.25)
    assert minkowski_sum(I, I).image([0.0]).ravel().tolist() == [k / 4 for k in range(9)]
    F, G = sum_example("E4", h)
    im = minkowski_sum(F, G).image([h]).ravel()
    assert im.tolist() == [k * h for k in range(97)]


def test_minkowski_grid_mismatch():
    with pytest.raises(ValueError):
        minkowski_sum(linear(1.0), finite([[0]] * 5))


@settings(max_examples=100, deadline=None)
@given(images, images, images)
def test_minkowski_commutative_associative(a, b, c):
    A, B, C = finite(a), finite(b), finite(c)
    assert minkowski_sum(A, B).graph_set() == minkowski_sum(B, A).graph_set()
    left = minkowski_sum(minkowski_sum(A, B), C).graph_set()
    assert left == minkowski_sum(A, minkowski_sum(B, C)).graph_set()


@settings(max_examples=40, deadline=None)
@given(images, st.sampled_from([-1.0, 0.0, 1.0, 2.0]))
def test_single_valued_G_is_sum_stable(a, slope):
    a[2] = sorted(set(a[2]) | {0})
    F = finite(a)
    G = finite([[slope * i] for i in range(-2, 3)])
    assert check_sum_stability(F, G, [0.0], [0.0], [0.0]).verdict == HOLDS


def test_sum_stability_fails_on_jump_example():
    F, G = sum_example("E4", h)
    rep = check_sum_stability(F, G, 0, 1, 1)
    assert rep.verdict == FAILS
    assert rep.witness["w"][0] > 2


def test_calm_sum_tight():
    rep = verify_calm_sum(linear(1.0), linear(2.0), [0], [0], [0])
    assert rep.premises_hold and rep.conclusion_check.holds
    assert rep.bound_claimed == pytest.approx(3.0)
    assert rep.bound_measured == pytest.approx(3.0)
    dec = verify_calm_sum(linear(1.0), linear(2.0), [0], [0], [0], decomposition=(1.0, 2.0))
    assert dec.theorem_id == "calm_sum_decomposition"
    assert dec.premises_hold and dec.bound_measured == pytest.approx(3.0)


def test_calm_sum_jump_example_not_contradicted():
    F, G = sum_example("E4", h)
    rep = verify_calm_sum(F, G, 0, 1, 1, TheoremConfig(mode="falsification"))
    v = {c.property: c.verdict for c in rep.premise_checks}
    assert v["clm_F"] == HOLDS and v["clm_G"] == HOLDS and v["sum_stable"] == FAILS
    assert rep.conclusion_check.verdict == FAILS
    assert rep.consistent
    gated = verify_calm_sum(F, G, 0, 1, 1)
    assert gated.conclusion_check is None


def test_converse_examples():
    # components not calm, sum calm
    F, G = sum_example("E5.1", h)
    got = [check_property(M, [0], [w], "clm", 5.0).verdict
           for M, w in ((F, 1), (G, 1), (minkowski_sum(F, G), 2))]
    assert got == [FAILS, FAILS, HOLDS]
    # F not calm, G calm, sum calm, pair not sum-stable
    F, G = sum_example("E5.2", h)
    got = [check_property(M, [0], [0], "clm", 5.0).verdict
           for M in (F, G, minkowski_sum(F, G))]
    assert got == [FAILS, HOLDS, HOLDS]
    assert check_sum_stability(F, G, 0, 0, 0).verdict == FAILS


def test_parametric_variants():
    F = ParametricMultifunction.from_oracle(lambda x, p: [Singleton(p)], g, g, Window([-1], [1]),
                                            h, h_x=h, h_p=h)
    G = linear(-1.0)
    assert check_sum_stability_param(F, G, 0, 0, 0, 0).verdict == HOLDS
    # the jump example with a dummy parameter
    F4, G4 = sum_example("E4", h)
    pg = lattice([-0.25], [0.25], 0.125)
    lifted = ParametricMultifunction(F4.domain, pg, [[im] * len(pg) for im in F4.images],
                                     h_x=h, h_p=0.125, h_y=h)
    assert check_sum_stability_param(lifted, G4, 0, 0, 1, 1).verdict == FAILS


def test_config_validation():
    assert SumStabilityConfig(eps_grid=(0.1, 0.4)).eps_grid == (0.4, 0.1)
    with pytest.raises(ValueError):
        SumStabilityConfig(eps_grid=(0.0,))
    with pytest.raises(ValueError):
        SumStabilityConfig(eps_grid=(0.4, 0.2), delta_grid=[[0.1]])
    with pytest.raises(ValueError):
        check_sum_stability(linear(1.0), linear(2.0), [0], [1], [0])


@settings(max_examples=40, deadline=None)
@given(images, images)
def test_calm_sum_implication_random(a, b):
    a[2] = sorted(set(a[2]) | {0})
    b[2] = sorted(set(b[2]) | {0})
    rep = verify_calm_sum(finite(a), finite(b), [0.0], [0.0], [0.0])
    assert rep.consistent
