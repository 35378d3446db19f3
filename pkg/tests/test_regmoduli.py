import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from setreg.regmoduli import (FAILS, HOLDS, NbhdConfig, check_around_triad, check_at1_triad,
                              check_at2_triad, check_parametric, check_property, estimate_modulus,
                              estimate_parametric)
from setreg.setcore import (Interval, ParametricMultifunction, Singleton, Window, invert, lattice,
                            sample_multifunction)

H = 1 / 32
SLOPES = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0]


def linear(slope, h=H):
    # codomain lattice step matched to the slope so every target has a preimage
    h_y = h * max(1.0, abs(slope))
    return sample_multifunction(lambda x: [Singleton(slope * x)], lattice([-1], [1], h),
                                Window([-3], [3]), h_y, h_x=h)


def piecewise(sl, sr, h=H):
    # universe of targets = attained values
    return sample_multifunction(lambda x: [Singleton(sl * x if x < 0 else sr * x)],
                                lattice([-1], [1], h), Window([-3], [3]), h, h_x=h,
                                codomain=np.empty((0, 1)))


pl_maps = st.tuples(st.sampled_from(SLOPES), st.sampled_from(SLOPES))


# Brute-force references over the graph, written with plain loops.

def _graph(F):
    return [(float(x[0]), [float(y[0]) for y in im]) for x, im in zip(F.domain, F.images)]


def brute_subreg(F, a, b, rU, tol=1e-9):
    g = _graph(F)
    zeros = [x for x, ys in g if b in ys]
    best = 0.0
    for x, ys in g:
        if abs(x - a) > rU + 1e-12:
            continue
        den = min((abs(b - y) for y in ys), default=math.inf)
        if den <= tol:
            continue
        num = min((abs(x - z) for z in zeros), default=math.inf)
        best = max(best, num / den)
    return best


def brute_clm(F, a, b, rU, rV, tol=1e-9):
    g = dict(_graph(F))
    base = g[a]
    best = 0.0
    for x, ys in g.items():
        den = abs(x - a)
        if den > rU + 1e-12 or den <= tol:
            continue
        exc = max((min(abs(y - z) for z in base) for y in ys if abs(y - b) <= rV + 1e-12),
                  default=0.0)
        best = max(best, exc / den)
    return best


def brute_lpo_holds(F, a, b, L, cfg):
    g = _graph(F)
    zeros = [x for x, ys in g if b in ys]
    for rho in cfg.rho_grid:
        for x, ys in g:
            if abs(x - a) > cfg.r_U + 1e-12:
                continue
            if min((abs(b - y) for y in ys), default=math.inf) < L * rho:
                if min((abs(x - z) for z in zeros), default=math.inf) > rho + cfg.tol:
                    return False
    return True


# Spec examples.

def test_around_identity_holds():
    rep = check_around_triad(linear(1.0), [0], [0], 0.9)
    assert rep.verdicts == (HOLDS,) * 3 and rep.consistent


def test_around_constant_reg_fails():
    rep = check_property(linear(0.0), [0], [0], "reg", 1.0)
    assert rep.verdict == FAILS
    assert rep.witness["y"][0] != 0 and rep.witness["lhs"] == math.inf


def test_around_rate_two():
    # a target gap in (2 rho, 2.1 rho) needs a codomain step below 0.1 rho
    F = linear(2.0, h=1 / 128)
    assert check_around_triad(F, [0], [0], 1.9).verdicts == (HOLDS,) * 3
    rep = check_around_triad(F, [0], [0], 2.1)
    assert rep.verdicts == (FAILS,) * 3 and rep.consistent


def test_at1_examples():
    assert check_at1_triad(linear(1.0), [0], [0], 0.9).verdicts == (HOLDS,) * 3
    sq = sample_multifunction(lambda x: [Singleton(x * x)], lattice([-1], [1], H),
                              Window([-1], [1]), H)
    for L in (0.1, 1.0, 10.0):
        rep = check_property(sq, [0], [0], "plop", L)
        assert rep.verdict == FAILS and rep.witness["y"][0] < 0
    # the rate estimate converges from above as the codomain step shrinks
    F = linear(2.0, h=1 / 128)
    plop = estimate_modulus(F, [0], [0], "plop").value
    psd = estimate_modulus(invert(F), [0], [0], "psdclm", NbhdConfig().swapped()).value
    assert psd == 0.5
    assert plop == pytest.approx(2.0, rel=0.01)
    assert plop * psd == pytest.approx(1.0, rel=0.01)


def test_at2_constant_subreg_every_L():
    F = linear(0.0)
    for L in (1e-3, 1.0, 1e3):
        assert check_property(F, [0], [0], "subreg", L).holds


def test_estimate_examples():
    assert estimate_modulus(linear(2.0), [0], [0], "subreg").value == pytest.approx(0.5)
    est = estimate_modulus(linear(0.0), [0], [0], "subreg")
    assert est.value == 0.0 and "empty_sample" in est.flags


def test_point_not_on_graph():
    with pytest.raises(ValueError):
        check_property(linear(1.0), [0], [0.5], "subreg", 1.0)
    with pytest.raises(ValueError):
        check_around_triad(linear(1.0), [0], [0], 0.0)
    with pytest.raises(ValueError):
        check_property(linear(1.0), [0], [0], "nope", 1.0)


def test_parametric_constant_in_x():
    g = lattice([-1], [1], 0.25)
    Hm = ParametricMultifunction.from_oracle(lambda x, p: [Singleton(p)], g, g, Window([-1], [1]), 0.25)
    assert estimate_parametric(Hm, "x_unif_p", "calm", [0], [0], [0]).value == 0.0
    assert check_parametric(Hm, "x_unif_p", "calm", [0], [0], [0], 0.0).holds
    # in p the images move at rate 1
    assert estimate_parametric(Hm, "p_unif_x", "calm", [0], [0], [0]).value == pytest.approx(1.0)


def test_report_json_shape():
    d = check_property(linear(2.0), [0], [0], "reg", 0.1).to_dict()
    assert set(d) >= {"property", "verdict", "witness", "config", "estimate"}
    assert d["verdict"] == FAILS


# Oracle agreement on random piecewise-linear maps.

@settings(max_examples=40, deadline=None)
@given(pl_maps, st.sampled_from([0.25, 0.5, 1.0]))
def test_subreg_matches_brute_force(slopes, r):
    F = piecewise(*slopes)
    cfg = NbhdConfig(r_U=r, r_V=r, r_W=r, eps=r)
    got = estimate_modulus(F, [0], [0], "subreg", cfg).value
    assert got == pytest.approx(brute_subreg(F, 0.0, 0.0, r))


@settings(max_examples=40, deadline=None)
@given(pl_maps, st.sampled_from([0.25, 0.5, 1.0]))
def test_clm_matches_brute_force(slopes, r):
    F = piecewise(*slopes)
    cfg = NbhdConfig(r_U=r, r_V=r, r_W=r, eps=r)
    got = estimate_modulus(F, [0], [0], "clm", cfg).value
    assert got == pytest.approx(brute_clm(F, 0.0, 0.0, r, r))


@settings(max_examples=40, deadline=None)
@given(pl_maps, st.sampled_from([0.3, 0.9, 1.7, 2.5]))
def test_lpo_matches_brute_force(slopes, L):
    F = piecewise(*slopes)
    cfg = NbhdConfig()
    assert check_property(F, [0], [0], "lpo", L, cfg).holds == brute_lpo_holds(F, 0.0, 0.0, L, cfg)


# Invariants.

@settings(max_examples=30, deadline=None)
@given(pl_maps, st.sampled_from([0.3, 0.9, 1.7, 2.5]))
def test_triad_reciprocity(slopes, L):
    F = piecewise(*slopes)
    for check in (check_around_triad, check_at1_triad, check_at2_triad):
        assert check(F, [0], [0], L).consistent


@settings(max_examples=30, deadline=None)
@given(pl_maps)
def test_lpo_clm_inverse_product(slopes):
    F = piecewise(*slopes, h=1 / 128)
    cfg = NbhdConfig()
    lpo = estimate_modulus(F, [0], [0], "lpo", cfg).value
    clm = estimate_modulus(invert(F), [0], [0], "clm", cfg.swapped()).value
    if 0 < lpo < math.inf and 0 < clm < math.inf:
        # the rate side converges from above with the codomain step
        assert lpo * clm == pytest.approx(1.0, rel=0.02)


@settings(max_examples=30, deadline=None)
@given(pl_maps, st.sampled_from([0.3, 0.9, 1.7]))
def test_around_implies_at_point(slopes, L):
    F = piecewise(*slopes)
    if all(v == HOLDS for v in check_around_triad(F, [0], [0], L).verdicts):
        assert all(v == HOLDS for v in check_at1_triad(F, [0], [0], L).verdicts)
        assert all(v == HOLDS for v in check_at2_triad(F, [0], [0], L).verdicts)


@settings(max_examples=30, deadline=None)
@given(pl_maps, st.sampled_from([0.25, 0.6, 1.3]),
       st.sampled_from(["lip", "reg", "clm", "subreg", "psdclm", "hemreg"]))
def test_ratio_monotone_in_L(slopes, L, kind):
    F = piecewise(*slopes)
    if check_property(F, [0], [0], kind, L).holds:
        assert check_property(F, [0], [0], kind, 2 * L).holds


@settings(max_examples=30, deadline=None)
@given(pl_maps, st.sampled_from([0.25, 0.6, 1.3]), st.sampled_from(["lop", "plop", "lpo"]))
def test_rate_monotone_in_L(slopes, L, kind):
    F = piecewise(*slopes)
    if check_property(F, [0], [0], kind, L).holds:
        assert check_property(F, [0], [0], kind, L / 2).holds


@settings(max_examples=30, deadline=None)
@given(pl_maps, st.sampled_from(["subreg", "clm", "reg", "psdclm"]))
def test_refinement_never_lowers_ratio_estimate(slopes, kind):
    coarse = estimate_modulus(piecewise(*slopes, h=1 / 8), [0], [0], kind).value
    fine = estimate_modulus(piecewise(*slopes, h=1 / 16), [0], [0], kind).value
    assert fine >= coarse - 1e-12


def test_set_valued_interval_map():
    # F(x) = [0, |x|]: calm at (0, 0) with constant 1, subregular everywhere trivially
    F = sample_multifunction(lambda x: [Interval(0.0, abs(x))], lattice([-1], [1], H),
                             Window([-1], [2]), H, h_x=H)
    assert estimate_modulus(F, [0], [0], "clm").value == pytest.approx(1.0)
    assert estimate_modulus(F, [0], [0], "subreg").value == 0.0
