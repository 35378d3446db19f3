"""Acceptance criteria, one test each; every test records a PASS/FAIL line."""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from setreg.corpus import RESOLUTIONS, run_corpus, theorem_suite
from setreg.linops import mixed_norm, required_L, subreg_modulus, truncated_T, verify_chain
from setreg.regmoduli import (NbhdConfig, check_around_triad, check_at1_triad, check_at2_triad,
                              estimate_modulus)
from setreg.setcore import (FiniteMultifunction, Singleton, Window, invert, lattice,
                            sample_multifunction)
from setreg.vecopt import (OBJECTIVES, EpigraphicalMap, GerstewitzFunctional, PolyhedralCone,
                           VectorProblem, check_error_bound, local_min_check, penalized_objective,
                           verify_penalization, verify_slope_error_bound)


def verdict(ok, caveat=False):
    if not ok:
        return "FAIL"
    # an impossible sub-requirement is reported, never counted as met
    return "PASS except one unattainable part" if caveat else "PASS"


def test_criterion_1_gerstewitz(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    Z = rng.normal(scale=3.0, size=(1000, 2))
    s = GerstewitzFunctional(PolyhedralCone.orthant(2), [1, 1])
    sz = s(Z)
    closed = float(np.abs(sz - Z.max(axis=1)).max())
    # every ordered pair (i, j)
    A, B = Z[:, None, :], Z[None, :, :]
    sa, sb = sz[:, None], sz[None, :]
    sub = float((s((A + B).reshape(-1, 2)).reshape(1000, 1000) - sa - sb).max())
    t = rng.normal(size=1000)
    trans = float(np.abs(s(Z + t[:, None] * s.e) - sz - t).max())
    K = np.abs(B)
    mono = float((s((A - K).reshape(-1, 2)).reshape(1000, 1000) - sa).max())
    lip = float((np.abs(sa - sb) - s.L_e * np.abs(A - B).max(axis=2)).max())
    dt = time.perf_counter() - t0
    ok = closed <= 1e-12 and sub <= 1e-12 and trans <= 1e-12 and mono <= 1e-12 \
        and lip <= 1e-12 and dt < 1.0
    criterion(f"criterion 1 (scalarizing closed form): {verdict(ok)} | max |s-max| {closed:.1e}, "
              f"sublinearity slack {sub:.1e}, translation err {trans:.1e}, monotone slack "
              f"{mono:.1e}, Lipschitz slack {lip:.1e}, {dt:.2f} s")
    assert ok


def _pl(sl, sr, h):
    return sample_multifunction(lambda x: [Singleton(sl * x if x < 0 else sr * x)],
                                lattice([-1], [1], h), Window([-3], [3]), h, h_x=h,
                                codomain=np.empty((0, 1)))


def test_criterion_2_triads(criterion):
    t0 = time.perf_counter()
    h = 1e-3
    F = sample_multifunction(lambda x: [Singleton(2 * x)], lattice([-1], [1], h),
                             Window([-2], [2]), h, h_x=h, codomain=np.empty((0, 1)))
    nb = NbhdConfig()
    sub = estimate_modulus(F, [0], [0], "subreg", nb).value
    clm = estimate_modulus(invert(F), [0], [0], "clm", nb.swapped()).value
    lpo = estimate_modulus(F, [0], [0], "lpo", nb).value
    close = [abs(sub - 0.5) <= 0.01, abs(clm - 0.5) <= 0.01, abs(lpo - 2) <= 0.04]
    rng = np.random.default_rng(0)
    agree = 0
    for _ in range(20):
        sl, sr = rng.uniform(-3, 3, size=2)
        L = float(rng.uniform(0.2, 3.0))
        G = _pl(float(sl), float(sr), 1 / 64)
        agree += all(chk(G, [0], [0], L).consistent
                     for chk in (check_around_triad, check_at1_triad, check_at2_triad))
    dt = time.perf_counter() - t0
    ok = all(close) and agree == 20 and dt < 30
    criterion(f"criterion 2 (triad reciprocity): {verdict(ok)} | subreg {sub:.4f}, clm(F^-1) "
              f"{clm:.4f}, lpo {lpo:.4f}, triads consistent on {agree}/20 instances, {dt:.1f} s")
    assert ok


def test_criterion_3_linear_chain(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    errs = []
    for _ in range(20):
        m = int(rng.integers(1, 5))
        n = int(rng.integers(m, 9))
        A = rng.normal(size=(m, n))
        # independent reference for sigma_min
        target = 1 / np.linalg.svd(A, compute_uv=False)[-1]
        errs.append(abs(verify_chain(A).sampled_reg_estimate - target) / target)
    exact = [k for k in range(1, 51) if subreg_modulus(truncated_T(k)) == k]
    off = [k for k in range(1, 51) if k not in exact]
    within_ulp = all(abs(subreg_modulus(truncated_T(k)) - k) <= math.ulp(k) for k in off)
    mn = mixed_norm(truncated_T(100))
    limit = math.pi / math.sqrt(6)
    forced = all(required_L(truncated_T(k), np.eye(k)[k - 1]) >= k for k in (5, 20, 50))
    dt = time.perf_counter() - t0
    ok = max(errs) <= 0.05 and within_ulp and abs(mn - 1.27866) <= 1e-4 and mn < limit \
        and forced and dt < 30
    note = f"exact for all k <= 50 except {off} (one ulp: 1/k not representable)" if off \
        else "exact for all k <= 50"
    criterion(f"criterion 3 (linear chain): {verdict(ok, bool(off))} | max rel err {max(errs):.3%}, "
              f"subreg_modulus {note}, mixed norm {mn:.6f} < {limit:.5f}, e_k forces L >= k, "
              f"{dt:.1f} s")
    assert ok


def test_criterion_4_corpus(criterion):
    t0 = time.perf_counter()
    N = 30
    mat = run_corpus(RESOLUTIONS, N)
    rows = {(r["entry"], r["property"], r["resolution"]): r for r in mat.rows}
    fine = min(RESOLUTIONS)
    all_res = all(mat.agreement(h) == 1.0 for h in RESOLUTIONS)
    ratio = rows[("E7", "S.subreg", fine)]["value"]
    family = (N - 1) * N / (N + 1)
    f0 = rows[("E7", "F0.subreg", fine)]["value"]
    e1 = [rows[("E1", p, fine)]["value"] for p in ("S.subreg", "S.clm")]
    dt = time.perf_counter() - t0
    ok = mat.passed and all_res and ratio >= family * 0.95 and f0 <= 1.05 \
        and all(v <= 1.05 for v in e1) and dt < 300
    criterion(f"criterion 4 (corpus classification): {verdict(ok)} | agreement "
              + ", ".join(f"{mat.agreement(h):.0%} at h={h:g}" for h in RESOLUTIONS)
              + f", E7 clm ratio of S^-1 {ratio:.2f} >= {family * 0.95:.2f}, F0 subreg {f0:.3f},"
              f" E1 S constants {e1[0]:.3f}/{e1[1]:.3f}, {dt:.0f} s")
    assert ok


def test_criterion_5_implications(criterion):
    t0 = time.perf_counter()
    rows = theorem_suite(h=min(RESOLUTIONS))
    bad = [label for _, label, rep, _ in rows if not rep.consistent]
    active = sum(rep.premises_hold for _, _, rep, _ in rows)
    tight = [(label, rep) for _, label, rep, t in rows if t]
    slack = max(abs(rep.bound_measured - rep.bound_claimed) for _, rep in tight)
    kinds = sorted({rep.theorem_id for _, _, rep, _ in rows})
    dt = time.perf_counter() - t0
    ok = not bad and slack <= 1e-9 and dt < 300
    criterion(f"criterion 5 (theorem implications): {verdict(ok)} | {len(rows)} reports, "
              f"{active} with all premises verified, inconsistent {bad or 'none'}, "
              f"{len(tight)} tight affine bounds within {slack:.1e}, theorems {kinds}, {dt:.0f} s")
    assert ok


def test_criterion_6_penalization(criterion):
    t0 = time.perf_counter()
    h = 1e-3
    g = lattice([-0.5], [0.5], h)
    G = FiniteMultifunction(g, [np.array([[-x[0]]]) for x in g], h_x=h, h_y=h)
    K, Q = PolyhedralCone.orthant(2), PolyhedralCone.orthant(1)
    qg = lattice([0], [0.5], h)
    probs = {n: VectorProblem(lambda x, _n=n: OBJECTIVES[_n](x, {}), G, K, Q, 1.0, 1.0)
             for n in ("square_pair", "identity_pair")}
    rep = verify_penalization(probs["square_pair"], [0], [0], qg)
    vmin = rep.details.get("min_value")
    local_min = rep.premises_hold and rep.conclusion_check.holds and vmin >= -1e-12
    dom, owners, zs = EpigraphicalMap(G, Q).graph_arrays(qg)
    controls = {}
    for name, prob in probs.items():
        phi = penalized_objective(prob, [0], [1, 1], M=0)
        _, controls[name] = local_min_check(prob, dom[owners], zs, np.zeros(1), np.zeros(2), phi,
                                            NbhdConfig())
    dt = time.perf_counter() - t0
    # max(x, x^2) >= 0: no negative value exists on this instance
    unattainable = controls["square_pair"] >= 0
    ok = local_min and unattainable and controls["identity_pair"] < 0 and dt < 5
    criterion(f"criterion 6 (penalization): {verdict(ok, True)} | local minimum at h={h:g}: min "
              f"{vmin:.1e}; M=0 control on (x, x^2): UNATTAINABLE, min "
              f"{controls['square_pair']:.1e} since s_e(f(x)-f(0)) = max(x, x^2) >= 0; "
              f"M=0 control on (x, x): min {controls['identity_pair']:.3f} < 0, {dt:.1f} s")
    assert ok


def test_criterion_7_error_bounds(criterion):
    t0 = time.perf_counter()
    g = lattice([-1], [1], 1e-3)
    sq = lambda x: x * x
    a1 = check_error_bound(abs, 0, 1.0, 1.0, g)
    a2 = verify_slope_error_bound(abs, 0, 1.0, 1.0, g)
    b1 = check_error_bound(sq, 0, 1.0, 1.0, g)
    b2 = verify_slope_error_bound(sq, 0, 1.0, 1.0, g)
    w1 = b1.witness["x"][0] if b1.witness else None
    w2 = b2.premise_checks[0].witness["x"][0] if b2.premise_checks[0].witness else None
    dt = time.perf_counter() - t0
    ok = (a1.holds and a2.premises_hold and a2.conclusion_check.holds and not b1.holds
          and not b2.premise_checks[0].holds and b2.conclusion_check is None
          and w1 is not None and abs(w1) <= 0.1 and w2 is not None and abs(w2) <= 0.1
          and dt < 1)
    criterion(f"criterion 7 (error bounds): {verdict(ok)} | |x| passes both; x^2 fails with "
              f"witnesses x={w1} (bound) and x={w2} (slope), {dt:.2f} s")
    assert ok


@pytest.mark.slow
def test_criterion_8_determinism(criterion, tmp_path):
    t0 = time.perf_counter()
    outs = []
    for k in (1, 2):
        rep = tmp_path / f"run{k}.json"
        proc = subprocess.run([sys.executable, "-m", "setreg", "--corpus", "all", "--seed", "0",
                               "--report", str(rep)], capture_output=True, text=True, check=False)
        outs.append((proc.returncode, rep.read_bytes() if rep.exists() else b""))
    dt = time.perf_counter() - t0
    same = outs[0][1] == outs[1][1] and len(outs[0][1]) > 0
    ok = same and all(code == 0 for code, _ in outs)
    criterion(f"criterion 8 (determinism): {verdict(ok)} | two full corpus runs, exit codes "
              f"{[c for c, _ in outs]}, {len(outs[0][1])} bytes each, byte-identical {same}, "
              f"{dt:.0f} s")
    assert ok
