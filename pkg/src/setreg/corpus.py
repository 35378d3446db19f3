"""Built-in example multifunctions with their known property verdicts.

Verdict semantics at a finite resolution:
  holds with constant c   the inequality passes at c * (1 + BOUND_TOL)
                          (rates: at c * (1 - BOUND_TOL))
  holds, no constant      passes at FAIL_CAP (rates: at 1 / FAIL_CAP)
  fails                   does not pass at FAIL_CAP (rates: at 1 / FAIL_CAP)

Grid entries are sampled on [-1/2, 1/2] at step h; sequence entries are
truncated at N and are exact up to snapping.
"""

from dataclasses import dataclass, field, replace
from functools import lru_cache
import math

import numpy as np

from .implicit import (check_M_condition, solve_implicit, verify_fixp, verify_thm_main,
                       verify_variational_system)
from .linops import required_L, subreg_modulus, truncated_T, verify_chain
from .regmoduli import (FAILS, HOLDS, NbhdConfig, TheoremConfig, TheoremReport, check_parametric,
                        check_property, estimate_modulus, estimate_parametric, premise_check,
                        slack)
from .setcore import (FiniteMultifunction, Interval, ParametricMultifunction, PointList, Singleton,
                      Window, invert, jsonable, lattice, sample_multifunction, snap)
from .vecopt import PolyhedralCone, verify_mreg_EF, verify_slope_error_bound
from .sumstab import SumStabilityConfig, check_sum_stability, check_sum_stability_param, \
    minkowski_sum, verify_calm_sum

__all__ = ["CorpusEntry", "Expected", "Measured", "ClassificationMatrix", "ENTRIES",
           "run_corpus", "theorem_suite", "affine_instances", "e1_calm_violation",
           "e7_inverse_calm_ratio", "FAIL_CAP", "BOUND_TOL"]

FAIL_CAP = 5.0
BOUND_TOL = 0.05
RESOLUTIONS = (1e-2, 5e-3)
DEFAULT_N = 30
EXACT = "exact"


@dataclass(frozen=True)
class Expected:
    property: str
    point: str
    constant: float
    verdict: str
    statement: str


@dataclass(frozen=True)
class Measured:
    verdict: str
    value: float = None
    witness: dict = None
    note: str = None


@dataclass(frozen=True)
class CorpusEntry:
    """`evaluate(h, N)` returns {property: Measured} for every expected row.
    `resolution_free` entries ignore h."""

    id: str
    description: str
    base: tuple
    expected: tuple
    evaluate: object
    truncation: bool = False
    resolution_free: bool = False

    def to_dict(self):
        return jsonable({"id": self.id, "description": self.description, "base": self.base,
                         "truncation": self.truncation,
                         "expected": [e.__dict__ for e in self.expected]})


def _ratio_L(c):
    return FAIL_CAP if c is None else slack(c, BOUND_TOL)


def _rate_L(c):
    return 1.0 / FAIL_CAP if c is None else c * (1 - BOUND_TOL)


def _measure(report, value=None):
    return Measured(report.verdict, value, report.witness)


def _prop(F, x, y, kind, c, cfg=None, expect_fail=False):
    """Check at the constant the verdict semantics prescribe, with the
    sampled estimate attached."""
    cfg = cfg or NbhdConfig()
    rate = kind in ("lpo", "plop", "lop")
    L = (1.0 / FAIL_CAP if rate else FAIL_CAP) if expect_fail else (
        _rate_L(c) if rate else _ratio_L(c))
    est = estimate_modulus(F, x, y, kind, cfg).value
    return _measure(check_property(F, x, y, kind, L, cfg), est)


def _param(H, direction, kind, x, p, y, c, cfg=None, expect_fail=False):
    cfg = cfg or NbhdConfig()
    L = FAIL_CAP if expect_fail else _ratio_L(c)
    est = estimate_parametric(H, direction, kind, x, p, y, cfg).value
    return _measure(check_parametric(H, direction, kind, x, p, y, L, cfg), est)


def _grid(h):
    return lattice([-0.5], [0.5], h)


# Implicit-map entries: H(x, p) on a product grid.

def _e1_oracle(x, p):
    return [Singleton(0.0)] if abs(x) >= abs(p) else [Singleton(math.sqrt(abs(p)))]


def _e2_oracle(x, p):
    return [Interval(0.0, 1.0, lo_open=abs(x) < abs(p))]


def _e3_oracle(x, p):
    if x != 0 and p != 0:
        return [Singleton(abs(x) / abs(p))]
    if x != 0:
        return [Singleton(0.0)]
    return [Singleton(abs(p))]


@lru_cache(maxsize=None)
def implicit_example(name, h):
    g = _grid(h)
    if name == "E1":
        return ParametricMultifunction.from_oracle(_e1_oracle, g, g, Window([0], [1]), h,
                                                   h_x=h, h_p=h)
    if name == "E2":
        return ParametricMultifunction.from_oracle(_e2_oracle, g, g, Window([0], [1]), h,
                                                   h_x=h, h_p=h)
    if name == "E3":
        # |x| / |p| reaches 1 / (2h); the window must not cut it
        return ParametricMultifunction.from_oracle(_e3_oracle, g, g, Window([0], [1.0 / h]), h,
                                                   h_x=h, h_p=h, codomain=np.zeros((1, 1)))
    raise KeyError(name)


def _eval_e1(h, N):
    H = implicit_example("E1", h)
    S = solve_implicit(H)
    return {
        "S.subreg": _prop(S, 0, 0, "subreg", 1.0),
        "S.clm": _prop(S, 0, 0, "clm", 1.0),
        "H.calm_x_unif_p": _param(H, "x_unif_p", "calm", 0, 0, 0, None, expect_fail=True),
        "H.calm_p_unif_x": _param(H, "p_unif_x", "calm", 0, 0, 0, None, expect_fail=True),
        "H_xbar.lpo": _prop(H.slice_x(0), 0, 0, "lpo", None),
        "H_pbar.lpo": _prop(H.slice_p(0), 0, 0, "lpo", None),
    }


def _eval_e2(h, N):
    H = implicit_example("E2", h)
    S = solve_implicit(H)
    return {
        "S.subreg": _prop(S, 0, 0, "subreg", 1.0),
        "H_xbar.lpo": _prop(H.slice_x(0), 0, 0, "lpo", None, expect_fail=True),
        "H.calm_x_unif_p": _param(H, "x_unif_p", "calm", 0, 0, 0, None),
    }


def _eval_e3(h, N):
    H = implicit_example("E3", h)
    S = solve_implicit(H)
    rep = check_M_condition(H, 0, 0, 1.0, "ii")
    return {
        "H_xbar.lpo": _prop(H.slice_x(0), 0, 0, "lpo", 1.0),
        "H.calm_x_unif_p": _param(H, "x_unif_p", "calm", 0, 0, 0, None, expect_fail=True),
        "M_condition_ii": Measured(rep.premise_checks[-1].verdict, 1.0,
                                   rep.premise_checks[-1].witness),
        "S.subreg": _prop(S, 0, 0, "subreg", 1.0),
    }


# Sum entries: F, G on one grid.

def _e4_F(x):
    return [Interval(0, 1)] + ([] if x == 0 else [Singleton(2.0)])


def _e51_F(x):
    return [Interval(0, 2)] if x != 0 else [Interval(0, 1)]


def _e51_G(x):
    return [Interval(0, 2)] if x != 0 else [Interval(1, 2)]


def _e52_F(x):
    if x < 0:
        return [Interval(0, x + 1)]
    if x == 0:
        return [PointList([[0.0]]), Interval(0.5, 1)]
    return [Interval(0, 1 - x)]


def _e52_G(x):
    if x < 0:
        return [PointList([[-1 - x], [0.0]])]
    if x == 0:
        return [Interval(-1, 0)]
    return [PointList([[-1 + x], [0.0]])]


@lru_cache(maxsize=None)
def sum_example(name, h):
    if name == "E4":
        fo, go, g, w = _e4_F, (lambda x: [Interval(0, 1)]), _grid(h), Window([-1], [4])
    elif name == "E5.1":
        fo, go, g, w = _e51_F, _e51_G, _grid(h), Window([-1], [4])
    elif name == "E5.2":
        fo, go, g, w = _e52_F, _e52_G, lattice([-1], [1], h), Window([-2], [2])
    else:
        raise KeyError(name)
    F = sample_multifunction(fo, g, w, h, h_x=h)
    G = sample_multifunction(go, g, w, h, h_x=h)
    return F, G


def _sum_eval(name, ybar, zbar, rows):
    def run(h, N):
        F, G = sum_example(name, h)
        maps = {"F": (F, ybar), "G": (G, zbar), "F+G": (minkowski_sum(F, G), ybar + zbar)}
        out = {}
        for prop, fail in rows:
            if prop == "sum_stable":
                rep = check_sum_stability(F, G, 0, ybar, zbar)
                out[prop] = _measure(rep)
                continue
            M, y = maps[prop.split(".")[0]]
            out[prop] = _prop(M, 0, y, "clm", None, expect_fail=fail)
        return out
    return run


# Linear operators.

def _eval_e6(h, N):
    flat = verify_chain(np.diag([1.0, 0.0]))
    surj = verify_chain(np.diag([2.0, 3.0]))
    disc = surj.max_discrepancy
    e_N = np.zeros(N)
    e_N[-1] = 1.0
    req = required_L(truncated_T(N), e_N)
    sub_ok = flat.chain_values["subreg_formula"] == 1.0 and \
        flat.chain_values["subreg_sampled"] <= slack(1.0, BOUND_TOL)
    return {
        "diag(1,0).subreg": Measured(HOLDS if sub_ok else FAILS,
                                     flat.chain_values["subreg_sampled"]),
        "diag(1,0).reg": Measured(flat.reg_check.verdict, None, flat.reg_check.witness),
        "diag(2,3).chain": Measured(HOLDS if disc <= BOUND_TOL else FAILS, disc,
                                    note="largest relative gap to 1/sigma_min"),
        "T.subreg_uniform": Measured(HOLDS if req <= FAIL_CAP else FAILS, req,
                                     {"k": N, "required_L": req, "formula": subreg_modulus(
                                         truncated_T(N))}),
    }


# Sequence entry: F(x, p) = {(0, p)} u {(1/n^2, p - 1/n^2)},
# G(x) = {(x, 0)} u {(x + 1/n^3, 1/n)}, sum norm on R^2.

def _seq(N):
    return np.arange(1, N + 1, dtype=float)


def e7_offsets(N):
    n = _seq(N)
    A = np.vstack([[0.0, 0.0], np.column_stack([1 / n ** 2, -1 / n ** 2])])
    B = np.vstack([[0.0, 0.0], np.column_stack([1 / n ** 3, 1 / n])])
    return A, B


def e7_grids(N):
    n = _seq(N)
    m = n[:, None]
    xs = np.concatenate([[0.0], -1 / n ** 2, -1 / n ** 3, (-1 / n ** 3 - 1 / m ** 2).ravel()])
    ps = np.concatenate([[0.0], 1 / n ** 2, -1 / n, (1 / m ** 2 - 1 / n).ravel()])
    return np.unique(snap(xs)).reshape(-1, 1), np.unique(snap(ps)).reshape(-1, 1)


def _owners(grid, vals):
    idx = np.searchsorted(grid[:, 0], vals)
    if np.any(idx >= len(grid)) or np.any(grid[np.minimum(idx, len(grid) - 1), 0] != vals):
        raise ValueError("value off the sequence grid")
    return idx


@lru_cache(maxsize=None)
def e7_solution_map(N):
    """S(p) = {x : 0 in (x, p) + A + B}: read off -(a + b) directly."""
    A, B = e7_offsets(N)
    xg, pg = e7_grids(N)
    s = snap((A[:, None, :] + B[None, :, :]).reshape(-1, 2))
    own = _owners(pg, snap(-s[:, 1]))
    return FiniteMultifunction.from_graph(pg, own, snap(-s[:, :1]), codomain=xg)


def e7_inverse_calm_ratio(N):
    """Sampled calmness ratio of S^-1 at (0, 0) for truncation N."""
    S = e7_solution_map(N)
    return estimate_modulus(invert(S), [0.0], [0.0], "clm").value


def _e7_F_images(pg, N):
    A, _ = e7_offsets(N)
    return [snap(np.column_stack([A[:, 0], p[0] + A[:, 1]])) for p in pg]


def _e7_G_images(xg, N):
    _, B = e7_offsets(N)
    return [snap(np.column_stack([x[0] + B[:, 0], B[:, 1]])) for x in xg]


def e7_delta(eps):
    # strictly inside the proven range; x, p are then confined to (-delta/2, delta/2)
    return 0.99 * min(2 * eps / 7, 18 * eps ** 3 / 343) / 2


E7_EPS = (0.4, 0.2, 0.1)
# empty preimages of F(0, .) occur arbitrarily close to (0, 0); a small
# neighborhood keeps the regularity scan cheap
E7_REG_R = 0.05
E7_REG_NBHD = NbhdConfig(r_U=E7_REG_R, r_V=E7_REG_R, r_W=E7_REG_R, eps=E7_REG_R)


@lru_cache(maxsize=None)
def e7_maps(N, h):
    xg, pg = e7_grids(N)
    F0 = FiniteMultifunction(pg, _e7_F_images(pg, N), h_y=h, norm_y="sum",
                             codomain=lattice([-E7_REG_R, -E7_REG_R], [E7_REG_R, E7_REG_R], h))
    G = FiniteMultifunction(xg, _e7_G_images(xg, N), norm_y="sum")
    # F does not depend on x, so its x grid is cut to the points nearest 0
    near = xg[np.argsort(np.abs(xg[:, 0]), kind="stable")[:32]]
    near = near[np.argsort(near[:, 0])]
    Fimg = _e7_F_images(pg, N)
    F = ParametricMultifunction(near, pg, [Fimg for _ in near], norm_y="sum")
    # sum-stability only involves x, p below the largest delta
    r = e7_delta(max(E7_EPS))
    xs, ps = xg[np.abs(xg[:, 0]) < r], pg[np.abs(pg[:, 0]) < r]
    Fs = ParametricMultifunction(xs, ps, [_e7_F_images(ps, N) for _ in xs], norm_y="sum")
    Gs = FiniteMultifunction(xs, _e7_G_images(xs, N), norm_y="sum")
    return {"S": e7_solution_map(N), "F0": F0, "G": G, "F": F, "Fs": Fs, "Gs": Gs}


def e7_sum_config():
    return SumStabilityConfig(eps_grid=E7_EPS, delta_grid=[[e7_delta(e)] for e in E7_EPS],
                              tol_w=1e-9)


def _eval_e7(h, N):
    m = e7_maps(N, h)
    z0, y0 = [0.0], [0.0, 0.0]
    ss = check_sum_stability_param(m["Fs"], m["Gs"], z0, z0, y0, y0, e7_sum_config())
    ratio = e7_inverse_calm_ratio(N)
    return {
        "S.subreg": Measured(check_property(m["S"], z0, z0, "subreg", FAIL_CAP).verdict, ratio,
                             note="value: calmness ratio of S^-1"),
        "F0.subreg": _prop(m["F0"], z0, y0, "subreg", 1.0),
        "F0.reg": _prop(m["F0"], z0, y0, "reg", None, E7_REG_NBHD, expect_fail=True),
        "F.calm_x_unif_p": _param(m["F"], "x_unif_p", "calm", z0, z0, y0, 1.0),
        "G.clm": _prop(m["G"], z0, y0, "clm", 1.0),
        "sum_stable_param": _measure(ss),
    }


def _x(prop, point, constant, verdict, statement):
    return Expected(prop, point, constant, verdict, statement)


ENTRIES = (
    CorpusEntry("E1", "H = {0} if |x| >= |p|, else {sqrt|p|}", (0.0, 0.0), (
        _x("S.subreg", "(0,0)", 1.0, HOLDS, "S is metrically subregular with constant 1"),
        _x("S.clm", "(0,0)", 1.0, HOLDS, "S is calm with constant 1"),
        _x("H.calm_x_unif_p", "((0,0),0)", None, FAILS, "H is not calm in x uniformly in p"),
        _x("H.calm_p_unif_x", "((0,0),0)", None, FAILS, "H is not calm in p uniformly in x"),
        _x("H_xbar.lpo", "(0,0)", None, HOLDS, "H(0, .) is linearly pseudo-open"),
        _x("H_pbar.lpo", "(0,0)", None, HOLDS, "H(., 0) is linearly pseudo-open"),
    ), _eval_e1),
    CorpusEntry("E2", "H = [0,1] if |x| >= |p|, else (0,1]", (0.0, 0.0), (
        _x("S.subreg", "(0,0)", 1.0, HOLDS, "S coincides with the E1 solution map"),
        _x("H_xbar.lpo", "(0,0)", None, FAILS, "H(0, .) is not linearly pseudo-open"),
        _x("H.calm_x_unif_p", "((0,0),0)", None, HOLDS, "H is calm in x uniformly in p"),
    ), _eval_e2),
    CorpusEntry("E3", "H = {|x|/|p|} off the axes, {0} on p = 0, {|p|} on x = 0", (0.0, 0.0), (
        _x("H_xbar.lpo", "(0,0)", 1.0, HOLDS, "H(0, .) = {|p|} is pseudo-open at rate 1"),
        _x("H.calm_x_unif_p", "((0,0),0)", None, FAILS, "H is not calm in x uniformly in p"),
        _x("M_condition_ii", "(0,0)", 1.0, HOLDS, "the gap condition holds with M = 1"),
        _x("S.subreg", "(0,0)", 1.0, HOLDS, "S is metrically subregular with constant 1"),
    ), _eval_e3),
    CorpusEntry("E4", "F = [0,1] u {2} off 0, [0,1] at 0; G = [0,1]", (0.0, 1.0, 1.0), (
        _x("F.clm", "(0,1)", None, HOLDS, "F is calm"),
        _x("G.clm", "(0,1)", None, HOLDS, "G is calm"),
        _x("F+G.clm", "(0,2)", None, FAILS, "the sum is not calm"),
    ), _sum_eval("E4", 1.0, 1.0, (("F.clm", False), ("G.clm", False), ("F+G.clm", True)))),
    CorpusEntry("E5.1", "F = [0,2] off 0, [0,1] at 0; G = [0,2] off 0, [1,2] at 0",
                (0.0, 1.0, 1.0), (
        _x("F.clm", "(0,1)", None, FAILS, "F is not calm"),
        _x("G.clm", "(0,1)", None, FAILS, "G is not calm"),
        _x("F+G.clm", "(0,2)", None, HOLDS, "the sum is calm"),
    ), _sum_eval("E5.1", 1.0, 1.0, (("F.clm", True), ("G.clm", True), ("F+G.clm", False)))),
    CorpusEntry("E5.2", "piecewise F, G on [-1,1] whose sum is [-1+|x|, 1-|x|]", (0.0, 0.0, 0.0), (
        _x("F.clm", "(0,0)", None, FAILS, "F is not calm"),
        _x("G.clm", "(0,0)", None, HOLDS, "G is calm"),
        _x("F+G.clm", "(0,0)", None, HOLDS, "the sum is calm"),
        _x("sum_stable", "(0,0,0)", None, FAILS, "(F, G) is not locally sum-stable"),
    ), _sum_eval("E5.2", 0.0, 0.0, (("F.clm", True), ("G.clm", False), ("F+G.clm", False),
                                    ("sum_stable", None)))),
    CorpusEntry("E6", "linear operators: diag(1,0), diag(2,3), diag(1, ..., 1/N)", (0.0,), (
        _x("diag(1,0).subreg", "(0,0)", 1.0, HOLDS, "non-surjective linear maps are subregular"),
        _x("diag(1,0).reg", "(0,0)", None, FAILS, "non-surjective linear maps are not regular"),
        _x("diag(2,3).chain", "(0,0)", 0.5, HOLDS, "all moduli equal 1/sigma_min"),
        _x("T.subreg_uniform", "(0,0)", None, FAILS,
           "x_n -> x_n / n is not subregular: e_k forces L >= k"),
    ), _eval_e6, truncation=True, resolution_free=True),
    CorpusEntry("E7", "F(x,p) = {(0,p)} u {(1/n^2, p-1/n^2)}, G(x) = {(x,0)} u {(x+1/n^3, 1/n)}",
                (0.0, 0.0, 0.0), (
        _x("S.subreg", "(0,0)", None, FAILS, "S is not subregular: ratio (n-1)n/(n+1)"),
        _x("F0.subreg", "(0,(0,0))", 1.0, HOLDS, "F(0, .) is subregular with constant 1"),
        _x("F0.reg", "(0,(0,0))", None, FAILS, "F(0, .) is not metrically regular"),
        _x("F.calm_x_unif_p", "((0,0),(0,0))", 1.0, HOLDS, "F is calm in x uniformly in p"),
        _x("G.clm", "(0,(0,0))", 1.0, HOLDS, "G is calm with modulus 1"),
        _x("sum_stable_param", "((0,0),(0,0),(0,0))", None, HOLDS,
           "(F, G) is locally sum-stable"),
    ), _eval_e7, truncation=True),
)

ENTRY_IDS = tuple(e.id for e in ENTRIES)


def get_entries(ids=None):
    if ids is None or ids == "all":
        return ENTRIES
    ids = [ids] if isinstance(ids, str) else list(ids)
    known = {e.id: e for e in ENTRIES}
    missing = [i for i in ids if i not in known]
    if missing:
        raise KeyError(f"unknown corpus entries: {missing}")
    return tuple(known[i] for i in ids)


@dataclass
class ClassificationMatrix:
    resolutions: tuple
    N: int
    rows: list = field(default_factory=list)

    @property
    def finest(self):
        return min(self.resolutions)

    def _at(self, h):
        return [r for r in self.rows if r["resolution"] == h]

    @property
    def passed(self):
        return all(r["agree"] for r in self._at(self.finest))

    @property
    def stable(self):
        """No verdict flips between the two finest resolutions."""
        hs = sorted(self.resolutions)[:2]
        if len(hs) < 2:
            return True
        a = {(r["entry"], r["property"]): r["measured"] for r in self._at(hs[0])}
        b = {(r["entry"], r["property"]): r["measured"] for r in self._at(hs[1])}
        return a == b

    def agreement(self, h=None):
        rows = self._at(self.finest if h is None else h)
        return sum(r["agree"] for r in rows) / len(rows) if rows else 1.0

    def to_dict(self):
        return jsonable({"resolutions": list(self.resolutions), "N": self.N,
                         "finest": self.finest, "passed": self.passed, "stable": self.stable,
                         "agreement": self.agreement(), "rows": self.rows})

    def to_table(self):
        head = f"{'entry':6} {'property':18} {'point':22} {'h':>7} {'expected':19} " \
               f"{'measured':19} {'value':>12} agree"
        lines = [head, "-" * len(head)]
        for r in self.rows:
            v = r["value"]
            vs = "" if v is None else f"{v:12.6g}"
            h = r["resolution"]
            hs = EXACT if h is None else f"{h:g}"
            lines.append(f"{r['entry']:6} {r['property']:18} {r['point']:22} {hs:>7} "
                         f"{r['expected']:19} {r['measured']:19} {vs:>12} "
                         f"{'yes' if r['agree'] else 'NO'}")
        lines.append(f"agreement at h={self.finest:g}: {self.agreement():.0%}; "
                     f"stable: {self.stable}; passed: {self.passed}")
        return "\n".join(lines)


def _check_N(N):
    # the truncated families must outgrow the failure cap
    if int(N) != N or N <= FAIL_CAP:
        raise ValueError(f"N must be an integer > {FAIL_CAP}")
    return int(N)


def run_corpus(resolutions=RESOLUTIONS, N=DEFAULT_N, entries=None, progress=None):
    N = _check_N(N)
    resolutions = tuple(sorted({float(h) for h in resolutions}, reverse=True))
    if not resolutions or resolutions[-1] <= 0:
        raise ValueError("resolutions must be positive")
    mat = ClassificationMatrix(resolutions, N)
    for entry in get_entries(entries):
        cached = None
        for h in resolutions:
            if progress:
                progress(f"{entry.id} h={h:g}")
            if entry.resolution_free:
                cached = cached or entry.evaluate(h, N)
                got = cached
            else:
                got = entry.evaluate(h, N)
            for exp in entry.expected:
                m = got[exp.property]
                mat.rows.append({"entry": entry.id, "property": exp.property, "point": exp.point,
                                 "constant": exp.constant, "resolution": h,
                                 "expected": exp.verdict, "measured": m.verdict,
                                 "agree": m.verdict == exp.verdict, "value": m.value,
                                 "witness": m.witness, "note": m.note,
                                 "statement": exp.statement})
    return mat


def e1_calm_violation(N):
    """Largest calmness ratio of E1 in x uniformly in p on the sequence grid
    {0} u {+-1/n : n <= N}; equals sqrt(N)."""
    N = _check_N(N)
    n = _seq(N)
    g = np.unique(snap(np.concatenate([[0.0], 1 / n, -1 / n]))).reshape(-1, 1)
    H = ParametricMultifunction.from_oracle(_e1_oracle, g, g, Window([0], [1]), 1.0 / N ** 2)
    return estimate_parametric(H, "x_unif_p", "calm", 0, 0, 0, NbhdConfig(r_U=1, r_V=1, r_W=2)).value


# Implication suite: theorem verifiers on the corpus and on affine instances.

def _falsify(**kw):
    return TheoremConfig(mode="falsification", bound_tol=BOUND_TOL, **kw)


def e7_theorem_report(N, h):
    """Subregularity of S from sum-stability, partial calmness, regularity of
    F(0, .) and calmness of G, assembled on the sequence grids."""
    m = e7_maps(N, h)
    z0, y0 = [0.0], [0.0, 0.0]
    nb = NbhdConfig()
    ss = check_sum_stability_param(m["Fs"], m["Gs"], z0, z0, y0, y0, e7_sum_config())
    e_cx = estimate_parametric(m["F"], "x_unif_p", "calm", z0, z0, y0, nb)
    e_reg = estimate_modulus(m["F0"], z0, y0, "reg", E7_REG_NBHD)
    e_cg = estimate_modulus(m["G"], z0, y0, "clm", nb)
    premises = (
        ss,
        premise_check("calm_x_unif_p", check_parametric(m["F"], "x_unif_p", "calm", z0, z0, y0,
                                                        FAIL_CAP, nb), e_cx),
        premise_check("reg_F_xbar", check_property(m["F0"], z0, y0, "reg", FAIL_CAP, E7_REG_NBHD),
                      e_reg),
        premise_check("clm_G", check_property(m["G"], z0, y0, "clm", FAIL_CAP, nb), e_cg),
    )
    claimed = e_reg.value * (e_cx.value + e_cg.value) if math.isfinite(e_reg.value) else math.inf
    ok = all(p.holds for p in premises)
    L = slack(claimed, BOUND_TOL) if ok else FAIL_CAP
    S = m["S"]
    measured = estimate_modulus(S, z0, z0, "subreg", nb).value
    concl = replace(check_property(S, z0, z0, "subreg", L, nb), property="subreg_S")
    details = {"estimates": {p.property: p.details.get("estimate") for p in premises},
               "clm_inverse_estimate": e7_inverse_calm_ratio(N), "N": N}
    return TheoremReport("msubreg_sol", premises, concl, claimed, measured, "falsification",
                         BOUND_TOL, details)


def corpus_theorems(h, N=DEFAULT_N):
    """(label, TheoremReport) for every theorem whose hypotheses the corpus
    entries instantiate."""
    out = []
    for name in ("E1", "E2", "E3"):
        H = implicit_example(name, h)
        for d in ("i", "ii"):
            out.append((f"{name}:main_{d}", verify_thm_main(H, 0, 0, 1.0, d, _falsify())))
    H = implicit_example("E3", h)
    out.append(("E3:M_condition_ii", check_M_condition(H, 0, 0, 1.0, "ii", _falsify())))
    H = implicit_example("E1", h)
    out.append(("E1:M_condition_i", check_M_condition(H, 0, 0, 1.0, "i", _falsify())))
    for name, y in (("E4", 1.0), ("E5.1", 1.0), ("E5.2", 0.0)):
        F, G = sum_example(name, h)
        out.append((f"{name}:clm_sum", verify_calm_sum(F, G, 0, y, y, _falsify())))
    out.append(("E7:msubreg_sol", e7_theorem_report(N, h)))
    return out


def affine_instances(count=20, seed=0):
    """Scale u in [1/2, 3/2] times small integers with random signs. Integer
    ratios put the zero sets of the affine maps on the grid; u > 1/4 keeps
    every nonzero grid value of u (i x - j p) above the zero tolerance h/4."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        u = float(rng.uniform(0.5, 1.5))
        sign = lambda: float(rng.choice([-1.0, 1.0]))
        k = int(rng.integers(2, 4))
        ks = int(rng.integers(1, k))
        out.append({"u": u, "a": sign() * u * int(rng.integers(1, 4)),
                    "b": sign() * u * int(rng.integers(1, 4)),
                    "c": sign() * u * k, "k_small": ks,
                    # p coefficient of the fixed-point pair: solutions x = +-p stay on the grid
                    "b_fix": sign() * u * (k - ks),
                    "slope": int(rng.integers(1, 4))})
    return out


def _affine_param(coef_x, coef_p, h, radius=0.5):
    g = lattice([-radius], [radius], h)
    span = abs(coef_x) * radius + abs(coef_p) * radius + 1
    return ParametricMultifunction.from_oracle(
        lambda x, p: [Singleton(coef_x * x + coef_p * p)], g, g, Window([-span], [span]), h,
        h_x=h, h_p=h, codomain=np.zeros((1, 1)))


def _affine_map(coef, h, radius=0.5):
    g = lattice([-radius], [radius], h)
    span = abs(coef) * radius + 1
    # universe = attained values, so regularity is not spoiled by empty preimages
    return sample_multifunction(lambda x: [Singleton(coef * x)], g, Window([-span], [span]), h,
                                h_x=h, codomain=np.zeros((1, 1)))


# affine sums are exact up to snapping, so the decomposition slack can be tiny
AFFINE_CFG = TheoremConfig(sum_cfg=SumStabilityConfig(tol_w=1e-9))


def affine_theorems(inst, h=2e-2):
    """Theorem reports on one affine instance; "tight" marks reports whose
    bound is attained by affine data."""
    a, b, c = inst["a"], inst["b"], inst["c"]
    ca = math.copysign(inst["u"] * inst["k_small"], c)
    cfg = AFFINE_CFG
    out = []
    H = _affine_param(a, b, h)
    for d in ("i", "ii"):
        out.append((f"main_{d}", verify_thm_main(H, 0, 0, abs(a) if d == "i" else abs(b), d,
                                                 cfg), False))
    F, G = _affine_map(a, h), _affine_map(b, h)
    out.append(("clm_sum", verify_calm_sum(F, G, 0, 0, 0, cfg), False))
    # Phi = ca x + b p against Psi = c x with |ca| < |c| and equal signs
    Psi = _affine_map(c, h)
    bf = inst["b_fix"]
    out.append(("fixp", verify_fixp(_affine_param(ca, bf, h), Psi, 0, 0, 0, abs(ca), 1 / abs(c),
                                    cfg), True))
    # F = -ca x + b p with G = c x: opposite signs
    out.append(("clm_sol", verify_variational_system(_affine_param(-ca, bf, h), Psi, 0, 0, 0,
                                                     "clm_sol", cfg), True))
    # F = ca x + b p with G = c x: equal signs make the subregularity bound exact
    out.append(("msubreg_sol", verify_variational_system(_affine_param(ca, bf, h), Psi, 0, 0, 0,
                                                         "msubreg_sol", cfg), True))
    k = abs(a)
    out.append(("slope_errbd", verify_slope_error_bound(lambda x: k * abs(x), [0.0], k, 1.0,
                                                        lattice([-1], [1], h / 4)), False))
    Q = PolyhedralCone.orthant(1)
    # integer slopes keep the zero set of |q - slope x| on the grid
    out.append(("mreg_EF", verify_mreg_EF(_affine_map(-inst["slope"], h), Q, [0.0], [0.0], [0.0], 1.0,
                                          1.0, lattice([0], [0.5], h)), False))
    return out


def theorem_suite(h=RESOLUTIONS[-1], N=DEFAULT_N, count=20, seed=0):
    """Every theorem report the implication suite covers, as
    (source, label, report, tight)."""
    rows = [("corpus", lab, rep, False) for lab, rep in corpus_theorems(h, N)]
    for k, inst in enumerate(affine_instances(count, seed)):
        rows.extend(("affine", f"affine{k}:{lab}", rep, tight)
                    for lab, rep, tight in affine_theorems(inst))
    return rows
