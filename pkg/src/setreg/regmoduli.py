"""Checkers and modulus estimators for the three regularity triads.

Every property is evaluated on a sampled map: neighborhoods become finite
sets of grid points, the radius quantifier becomes `rho_grid`, and a verdict
of "holds_at_resolution" only says that no sampled tuple violates the
defining inequality by more than `tol`.

Ratio kinds (constants): lip, reg, psdclm, hemreg, clm, subreg.
Rate kinds (openness rates): lop, plop, lpo.
"""

from dataclasses import dataclass, field, replace
import math

import numpy as np

from .setcore import INF, as_point, dists_to_set, invert, jsonable, norm, scaled

RATIO_KINDS = ("lip", "reg", "psdclm", "hemreg", "clm", "subreg")
RATE_KINDS = ("lop", "plop", "lpo")
KINDS = RATE_KINDS + RATIO_KINDS
PARAMETRIC_KINDS = ("open", "aubin", "mreg", "calm")
DIRECTIONS = ("x_unif_p", "p_unif_x")
HOLDS = "holds_at_resolution"
FAILS = "fails"
BISECTION_STEPS = 20

# Which defining inequality each triad member uses, in triad order.
TRIADS = {
    "around": ("lop", "lip", "reg"),
    "at1": ("plop", "psdclm", "hemreg"),
    "at2": ("lpo", "clm", "subreg"),
}


@dataclass(frozen=True)
class NbhdConfig:
    """Sampled neighborhoods and sweep grids.

    r_U, r_V, r_W are closed-ball radii around the base points in X, Y (or P
    for parametric checks) and Y. `rho_grid` replaces "for every rho in
    (0, eps)"; `L_grid` is the geometric ladder used by rate estimates.
    """

    r_U: float = 0.5
    r_V: float = 0.5
    r_W: float = 0.5
    eps: float = 0.5
    rho_grid: tuple = None
    L_grid: tuple = None
    tol: float = 1e-9

    def __post_init__(self):
        for name in ("r_U", "r_V", "r_W", "eps"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")
        rho = self.rho_grid
        if rho is None:
            rho = self.eps * 0.95 * 2.0 ** -np.arange(12)
        rho = tuple(sorted((float(r) for r in rho), reverse=True))
        if not rho or rho[0] >= self.eps or rho[-1] <= 0:
            raise ValueError("rho_grid must lie inside (0, eps)")
        lg = self.L_grid
        if lg is None:
            lg = 2.0 ** np.arange(-12, 13)
        lg = tuple(sorted(float(v) for v in lg))
        if not lg or lg[0] <= 0:
            raise ValueError("L_grid must be positive")
        object.__setattr__(self, "rho_grid", rho)
        object.__setattr__(self, "L_grid", lg)

    def swapped(self):
        """Radii for the inverse map: the roles of U and V are exchanged."""
        return replace(self, r_U=self.r_V, r_V=self.r_U)

    def to_dict(self):
        return {"r_U": self.r_U, "r_V": self.r_V, "r_W": self.r_W, "eps": self.eps,
                "rho_grid": list(self.rho_grid), "L_grid": [self.L_grid[0], self.L_grid[-1]],
                "tol": self.tol}


@dataclass(frozen=True)
class CheckReport:
    property: str
    verdict: str
    witness: dict = None
    swept: NbhdConfig = None
    details: dict = field(default_factory=dict)

    @property
    def holds(self):
        return self.verdict == HOLDS

    def to_dict(self):
        return jsonable({"property": self.property, "verdict": self.verdict,
                         "witness": self.witness,
                         "config": None if self.swept is None else self.swept.to_dict(),
                         "estimate": self.details.get("estimate"), "details": self.details})


@dataclass(frozen=True)
class ModulusEstimate:
    kind: str
    value: float
    resolution: tuple = (None, None)
    argmax_witness: dict = None
    flags: tuple = ()

    def to_dict(self):
        return jsonable({"property": self.kind, "estimate": self.value,
                         "resolution": list(self.resolution),
                         "witness": self.argmax_witness, "flags": list(self.flags)})


@dataclass(frozen=True)
class TriadReport:
    triad: str
    checks: tuple
    consistent: bool
    L: float

    @property
    def verdicts(self):
        return tuple(c.verdict for c in self.checks)

    def to_dict(self):
        return jsonable({"triad": self.triad, "L": self.L, "consistent": self.consistent,
                         "checks": [c.to_dict() for c in self.checks]})


class Samples:
    """Sampled (numerator, denominator) pairs of a defining inequality."""

    def __init__(self, num, den, wit, fields):
        self.num = np.asarray(num, dtype=float)
        self.den = np.asarray(den, dtype=float)
        self.wit = np.asarray(wit, dtype=float).reshape(len(self.num), -1)
        self.fields = tuple(fields)

    @classmethod
    def empty(cls, fields):
        width = sum(w for _, w in fields)
        return cls(np.empty(0), np.empty(0), np.empty((0, width)), fields)

    @classmethod
    def concat(cls, parts, fields):
        parts = [p for p in parts if len(p.num)]
        if not parts:
            return cls.empty(fields)
        return cls(np.concatenate([p.num for p in parts]), np.concatenate([p.den for p in parts]),
                   np.concatenate([p.wit for p in parts]), fields)

    def witness(self, row):
        return unpack_witness(self.wit[row], self.fields)

    def violations(self, L, tol):
        return self.num > scaled(L, self.den) + tol

    def ratios(self, tol):
        usable = self.den > tol
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(np.isinf(self.den), 0.0, self.num / np.where(usable, self.den, 1.0))
        return np.where(usable, r, -1.0), usable


def unpack_witness(row, fields):
    out, k = {}, 0
    for name, width in fields:
        vals = [float(v) for v in row[k:k + width]]
        out[name] = vals[0] if width == 1 and name in ("rho", "L") else vals
        k += width
    return out


def lex_smallest(rows):
    """Index of the lexicographically smallest row."""
    order = np.lexsort(rows.T[::-1])
    return int(order[0])


def ball(points, center, r, kind):
    return np.flatnonzero(norm(points - center, kind) <= r + 1e-12)


def group_reduce(values, owners, n, op, fill):
    """Reduce the last axis of `values` over sorted integer groups."""
    values = np.asarray(values, dtype=float)
    out = np.full(values.shape[:-1] + (n,), fill)
    if values.shape[-1] == 0:
        return out
    counts = np.bincount(owners, minlength=n)
    present = np.flatnonzero(counts)
    starts = np.concatenate(([0], np.cumsum(counts[present])[:-1]))
    out[..., present] = op.reduceat(values, starts, axis=-1)
    return out


def image_dists(F, y):
    """d(y, F(x)) for every domain point x."""
    y = np.asarray(y, dtype=float).reshape(1, -1)
    if F.graph_y.shape[0] == 0:
        return np.full(len(F), INF)
    d = norm(F.graph_y - y, F.norm_y)
    return group_reduce(d, F.owners, len(F), np.minimum, INF)


def codomain_keys(F):
    """Index into F.codomain of every graph row."""
    lookup = {tuple(c): k for k, c in enumerate(F.codomain)}
    return np.array([lookup[tuple(y)] for y in F.graph_y], dtype=int)


def preimage_dists(F, a):
    """d(a, F^{-1}(c)) for every codomain universe point c."""
    a = np.asarray(a, dtype=float).reshape(1, -1)
    out = np.full(F.codomain.shape[0], INF)
    if F.graph_y.shape[0]:
        d = norm(F.graph_x - a, F.norm_x)
        np.minimum.at(out, codomain_keys(F), d)
    return out


def require_graph_point(F, xbar, ybar):
    xbar = as_point(xbar, F.dim_x)
    ybar = as_point(ybar, F.dim_y)
    if not F.in_graph(xbar, ybar):
        raise ValueError(f"({xbar.tolist()}, {ybar.tolist()}) is not a point of the graph")
    return xbar, ybar


# Sample builders. `a` is the base point in the domain, `b` in the codomain;
# rU and rV are the neighborhood radii around them.

def subreg_samples(F, a, b, rU):
    U = ball(F.domain, a, rU, F.norm_x)
    num = F.dist_x(F.domain[U], F.preimage(b))
    den = image_dists(F, b)[U]
    return Samples(num, den, F.domain[U], [("x", F.dim_x)])


def psdclm_samples(F, a, b, rU):
    U = ball(F.domain, a, rU, F.norm_x)
    num = image_dists(F, b)[U]
    den = norm(F.domain[U] - a, F.norm_x)
    return Samples(num, den, F.domain[U], [("x", F.dim_x)])


def hemreg_samples(F, a, b, rV):
    C = F.codomain
    V = ball(C, b, rV, F.norm_y)
    num = preimage_dists(F, a)[V]
    den = norm(C[V] - b, F.norm_y)
    return Samples(num, den, C[V], [("y", F.dim_y)])


def clm_samples(F, a, b, rU, rV, base=None):
    """e(F(x) n V, base) against d(x, a); base defaults to F(a)."""
    U = ball(F.domain, a, rU, F.norm_x)
    if base is None:
        base = F.images[F.index(a)]
    rows = np.flatnonzero(np.isin(F.owners, U) & (norm(F.graph_y - b, F.norm_y) <= rV + 1e-12))
    n = len(F)
    exc = np.zeros(n)
    arg = np.full(n, -1)
    if rows.size:
        d = dists_to_set(F.graph_y[rows], base, F.norm_y)
        own = F.owners[rows]
        exc = group_reduce(d, own, n, np.maximum, 0.0)
        # first row attaining the per-owner maximum
        hit = d >= exc[own]
        for r, o in zip(rows[hit][::-1], own[hit][::-1]):
            arg[o] = r
    ys = np.where(arg[U, None] >= 0, F.graph_y[np.maximum(arg[U], 0)], 0.0)
    wit = np.hstack([F.domain[U], ys])
    den = norm(F.domain[U] - a, F.norm_x)
    return Samples(exc[U], den, wit, [("x", F.dim_x), ("y", F.dim_y)])


def lip_samples(F, a, b, rU, rV):
    """e(F(x) n V, F(u)) against d(x, u) for x, u in U."""
    U = ball(F.domain, a, rU, F.norm_x)
    rows = np.flatnonzero(np.isin(F.owners, U) & (norm(F.graph_y - b, F.norm_y) <= rV + 1e-12))
    n = len(F)
    nums, dens, wits = [], [], []
    for u in U:
        exc = np.zeros(n)
        if rows.size:
            d = dists_to_set(F.graph_y[rows], F.images[u], F.norm_y)
            exc = group_reduce(d, F.owners[rows], n, np.maximum, 0.0)
        nums.append(exc[U])
        dens.append(norm(F.domain[U] - F.domain[u], F.norm_x))
        wits.append(np.hstack([F.domain[U], np.repeat(F.domain[u][None, :], len(U), axis=0)]))
    if not nums:
        return Samples.empty([("x", F.dim_x), ("u", F.dim_x)])
    return Samples(np.concatenate(nums), np.concatenate(dens), np.concatenate(wits),
                   [("x", F.dim_x), ("u", F.dim_x)])


def reg_samples(F, a, b, rU, rV):
    """d(x, F^{-1}(y)) against d(y, F(x)) for (x, y) in U x V."""
    U = ball(F.domain, a, rU, F.norm_x)
    C = F.codomain
    V = ball(C, b, rV, F.norm_y)
    rows = np.flatnonzero(np.isin(F.owners, U))
    nums, dens, wits = [], [], []
    for v in V:
        y = C[v]
        nums.append(F.dist_x(F.domain[U], F.preimage(y)))
        d = norm(F.graph_y[rows] - y, F.norm_y)
        dens.append(group_reduce(d, F.owners[rows], len(F), np.minimum, INF)[U])
        wits.append(np.hstack([F.domain[U], np.repeat(y[None, :], len(U), axis=0)]))
    fields = [("x", F.dim_x), ("y", F.dim_y)]
    if not nums:
        return Samples.empty(fields)
    return Samples(np.concatenate(nums), np.concatenate(dens), np.concatenate(wits), fields)


# Rate predicates: each returns (witness rows, fields) of violations at L.

class LpoData:
    """d(b, F(x)) and d(x, F^{-1}(b)) on U, reused across candidate rates."""

    def __init__(self, F, a, b, rU):
        U = ball(F.domain, a, rU, F.norm_x)
        self.xs = F.domain[U]
        self.s = image_dists(F, b)[U]
        self.t = F.dist_x(self.xs, F.preimage(b))
        self.fields = [("x", F.dim_x), ("rho", 1)]

    def violations(self, L, rhos, tol):
        out = []
        for rho in rhos:
            bad = (self.s < L * rho) & (self.t > rho + tol)
            if bad.any():
                out.append(np.hstack([self.xs[bad], np.full((bad.sum(), 1), rho)]))
        return out


class PlopData:
    """d(y, b) and d(a, F^{-1}(y)) over the codomain universe."""

    def __init__(self, F, a, b):
        C = F.codomain
        self.ys = C
        self.r = norm(C - b, F.norm_y)
        self.q = preimage_dists(F, a)
        self.fields = [("y", F.dim_y), ("rho", 1)]

    def violations(self, L, rhos, tol):
        out = []
        for rho in rhos:
            bad = (self.r < L * rho) & (self.q > rho + tol)
            if bad.any():
                out.append(np.hstack([self.ys[bad], np.full((bad.sum(), 1), rho)]))
        return out


class LopData:
    """Graph points in U x V and distances to preimages of nearby targets."""

    def __init__(self, F, a, b, rU, rV, reach):
        U = ball(F.domain, a, rU, F.norm_x)
        C = F.codomain
        near = ball(C, b, rV + reach, F.norm_y)
        self.C = C[near]
        keys = codomain_keys(F)
        remap = np.full(C.shape[0], -1)
        remap[near] = np.arange(near.size)
        gsel = np.flatnonzero(remap[keys] >= 0)
        # Q[i, c] = d(U_i, F^{-1}(C_c))
        self.Q = np.full((U.size, near.size), INF)
        if gsel.size and U.size:
            dx = norm(F.domain[U][:, None, :] - F.graph_x[gsel][None, :, :], F.norm_x)
            cols = remap[keys[gsel]]
            for k in range(U.size):
                np.minimum.at(self.Q[k], cols, dx[k])
        upos = {int(u): k for k, u in enumerate(U)}
        grows = np.flatnonzero(np.isin(F.owners, U) & (norm(F.graph_y - b, F.norm_y) <= rV + 1e-12))
        self.gx = F.graph_x[grows]
        self.gy = F.graph_y[grows]
        self.gi = np.array([upos[int(o)] for o in F.owners[grows]], dtype=int)
        self.D = norm(self.gy[:, None, :] - self.C[None, :, :], F.norm_y) if grows.size else np.empty((0, near.size))
        self.fields = [("x", F.dim_x), ("y", F.dim_y), ("target", F.dim_y), ("rho", 1)]

    def violations(self, L, rhos, tol):
        out = []
        if self.gi.size == 0:
            return out
        Qg = self.Q[self.gi]
        for rho in rhos:
            bad = (self.D < L * rho) & (Qg > rho + tol)
            g, c = np.nonzero(bad)
            if g.size:
                out.append(np.hstack([self.gx[g], self.gy[g], self.C[c], np.full((g.size, 1), rho)]))
        return out


def rate_data(F, a, b, kind, cfg, L_max=None):
    if kind == "lpo":
        return LpoData(F, a, b, cfg.r_U)
    if kind == "plop":
        return PlopData(F, a, b)
    reach = (L_max if L_max is not None else cfg.L_grid[-1]) * cfg.eps
    return LopData(F, a, b, cfg.r_U, cfg.r_V, reach)


def ratio_samples(F, a, b, kind, cfg):
    if kind == "subreg":
        return subreg_samples(F, a, b, cfg.r_U)
    if kind == "clm":
        return clm_samples(F, a, b, cfg.r_U, cfg.r_V)
    if kind == "psdclm":
        return psdclm_samples(F, a, b, cfg.r_U)
    if kind == "hemreg":
        return hemreg_samples(F, a, b, cfg.r_V)
    if kind == "lip":
        return lip_samples(F, a, b, cfg.r_U, cfg.r_V)
    if kind == "reg":
        return reg_samples(F, a, b, cfg.r_U, cfg.r_V)
    raise ValueError(f"unknown ratio kind {kind!r}")


def report_from_samples(name, S, L, cfg, extra=None):
    bad = np.flatnonzero(S.violations(L, cfg.tol))
    details = {"L": L}
    if extra:
        details.update(extra)
    if bad.size == 0:
        return CheckReport(name, HOLDS, None, cfg, details)
    row = bad[lex_smallest(S.wit[bad])]
    wit = S.witness(row)
    wit["lhs"] = float(S.num[row])
    wit["rhs"] = float(scaled(L, S.den[row]))
    return CheckReport(name, FAILS, wit, cfg, details)


def report_from_rate(name, data, L, cfg, extra=None):
    chunks = data.violations(L, cfg.rho_grid, cfg.tol)
    details = {"L": L}
    if extra:
        details.update(extra)
    if not chunks:
        return CheckReport(name, HOLDS, None, cfg, details)
    rows = np.concatenate(chunks)
    return CheckReport(name, FAILS, unpack_witness(rows[lex_smallest(rows)], data.fields), cfg, details)


def check_property(F, xbar, ybar, kind, L, cfg=None):
    """Check one defining inequality of `kind` at (xbar, ybar).

    For rate kinds L is an openness rate; for ratio kinds it is the constant
    on the right-hand side.
    """
    cfg = cfg or NbhdConfig()
    if kind not in KINDS:
        raise ValueError(f"unknown property {kind!r}")
    if kind in RATE_KINDS and not L > 0:
        raise ValueError("rate L must be positive")
    if L < 0:
        raise ValueError("L must be nonnegative")
    a, b = require_graph_point(F, xbar, ybar)
    if kind in RATE_KINDS:
        return report_from_rate(kind, rate_data(F, a, b, kind, cfg, L), L, cfg)
    return report_from_samples(kind, ratio_samples(F, a, b, kind, cfg), L, cfg)


def _triad(name, F, xbar, ybar, L, cfg):
    cfg = cfg or NbhdConfig()
    if not L > 0:
        raise ValueError("L must be positive")
    a, b = require_graph_point(F, xbar, ybar)
    rate_kind, inv_kind, dir_kind = TRIADS[name]
    r1 = check_property(F, a, b, rate_kind, L, cfg)
    r2 = check_property(invert(F), b, a, inv_kind, 1.0 / L, cfg.swapped())
    r2 = replace(r2, property=f"{inv_kind}_inverse")
    r3 = check_property(F, a, b, dir_kind, 1.0 / L, cfg)
    consistent = r1.verdict == r2.verdict == r3.verdict
    return TriadReport(name, (r1, r2, r3), consistent, L)


def check_around_triad(F, xbar, ybar, L, cfg=None):
    """Openness at rate L, Aubin property of the inverse and metric
    regularity of F, both with constant 1/L, around (xbar, ybar)."""
    return _triad("around", F, xbar, ybar, L, cfg)


def check_at1_triad(F, xbar, ybar, L, cfg=None):
    """Openness at the point, pseudocalmness of the inverse, hemiregularity."""
    return _triad("at1", F, xbar, ybar, L, cfg)


def check_at2_triad(F, xbar, ybar, L, cfg=None):
    """Pseudo-openness at rate L, calmness of the inverse and subregularity
    of F with constant 1/L."""
    return _triad("at2", F, xbar, ybar, L, cfg)


def estimate_from_samples(kind, S, cfg, resolution):
    if len(S.num) == 0:
        return ModulusEstimate(kind, 0.0, resolution, None, ("empty_sample",))
    r, usable = S.ratios(cfg.tol)
    if not usable.any():
        return ModulusEstimate(kind, 0.0, resolution, None, ("empty_sample",))
    best = float(r.max())
    rows = np.flatnonzero(r == best)
    row = rows[lex_smallest(S.wit[rows])]
    wit = S.witness(row)
    wit.update(lhs=float(S.num[row]), den=float(S.den[row]))
    return ModulusEstimate(kind, best, resolution, wit, ())


def bisect_rate(kind, passes, cfg, resolution):
    """Largest passing rate: geometric ladder, then bisection."""
    ladder = cfg.L_grid
    if not passes(ladder[0])[0]:
        return ModulusEstimate(kind, 0.0, resolution, passes(ladder[0])[1], ("below_L_grid",))
    lo = ladder[0]
    hi = None
    for L in ladder[1:]:
        if passes(L)[0]:
            lo = L
        else:
            hi = L
            break
    if hi is None:
        return ModulusEstimate(kind, INF, resolution, None, ("above_L_grid",))
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if passes(mid)[0]:
            lo = mid
        else:
            hi = mid
    return ModulusEstimate(kind, lo, resolution, passes(hi)[1], ())


def estimate_modulus(F, xbar, ybar, kind, cfg=None):
    """Sampled exact bound of `kind` at (xbar, ybar).

    Ratio kinds give the supremum of the sampled ratios, skipping points
    whose denominator is at most `tol`; rate kinds give the largest passing
    rate found by the ladder and bisection.
    """
    cfg = cfg or NbhdConfig()
    if kind not in KINDS:
        raise ValueError(f"unknown property {kind!r}")
    a, b = require_graph_point(F, xbar, ybar)
    resolution = (F.h_x, F.h_y)
    if kind in RATIO_KINDS:
        return estimate_from_samples(kind, ratio_samples(F, a, b, kind, cfg), cfg, resolution)
    data = rate_data(F, a, b, kind, cfg)

    def passes(L):
        chunks = data.violations(L, cfg.rho_grid, cfg.tol)
        if not chunks:
            return True, None
        rows = np.concatenate(chunks)
        return False, unpack_witness(rows[lex_smallest(rows)], data.fields)

    return bisect_rate(kind, passes, cfg, resolution)


# Parametric variants. In direction x_unif_p the moving variable is x with
# radius r_U and the parameter is p with radius r_V; p_unif_x swaps them.

def _oriented(H, direction, xbar, pbar):
    if direction not in DIRECTIONS:
        raise ValueError(f"unknown direction {direction!r}")
    if direction == "x_unif_p":
        return H, as_point(xbar, H.dim_x), as_point(pbar, H.dim_p)
    return H.swapped(), as_point(pbar, H.dim_p), as_point(xbar, H.dim_x)


def _param_slices(G, a, q, cfg):
    J = ball(G.p_grid, q, cfg.r_V, G.norm_p)
    for j in J:
        yield G.p_grid[j], G.slice_p_at(j)


def parametric_samples(H, direction, kind, xbar, pbar, ybar, cfg):
    G, a, q = _oriented(H, direction, xbar, pbar)
    b = as_point(ybar, H.dim_y)
    parts = []
    fields = None
    for p, S in _param_slices(G, a, q, cfg):
        if kind == "calm":
            s = clm_samples(S, a, b, cfg.r_U, cfg.r_W)
        elif kind == "aubin":
            s = lip_samples(S, a, b, cfg.r_U, cfg.r_W)
        elif kind == "mreg":
            s = reg_samples(S, a, b, cfg.r_U, cfg.r_W)
        else:
            raise ValueError(f"unknown parametric ratio kind {kind!r}")
        wit = np.hstack([np.repeat(p[None, :], len(s.num), axis=0), s.wit])
        fields = (("param", G.dim_p),) + s.fields
        parts.append(Samples(s.num, s.den, wit, fields))
    if fields is None:
        fields = (("param", G.dim_p),)
    return Samples.concat(parts, fields)


def _param_open_violations(H, direction, xbar, pbar, ybar, L, cfg):
    G, a, q = _oriented(H, direction, xbar, pbar)
    b = as_point(ybar, H.dim_y)
    out = []
    fields = None
    for p, S in _param_slices(G, a, q, cfg):
        data = LopData(S, a, b, cfg.r_U, cfg.r_W, L * cfg.eps)
        fields = [("param", G.dim_p)] + data.fields
        for chunk in data.violations(L, cfg.rho_grid, cfg.tol):
            out.append(np.hstack([np.repeat(p[None, :], chunk.shape[0], axis=0), chunk]))
    return out, fields


def _require_param_graph_point(H, xbar, pbar, ybar):
    y = as_point(ybar, H.dim_y)
    try:
        im = H.image(xbar, pbar)
    except KeyError as exc:
        raise ValueError(str(exc)) from exc
    if not np.any(np.all(im == y, axis=1)):
        raise ValueError("base point is not on the graph")


def check_parametric(H, direction, kind, xbar, pbar, ybar, L, cfg=None):
    """Parametric openness, Aubin, regularity or calmness, uniform in the
    other variable, at ((xbar, pbar), ybar)."""
    cfg = cfg or NbhdConfig()
    if kind not in PARAMETRIC_KINDS:
        raise ValueError(f"unknown parametric kind {kind!r}")
    _require_param_graph_point(H, xbar, pbar, ybar)
    name = f"{kind}_{direction}"
    if kind == "open":
        if not L > 0:
            raise ValueError("rate L must be positive")
        chunks, fields = _param_open_violations(H, direction, xbar, pbar, ybar, L, cfg)
        if not chunks:
            return CheckReport(name, HOLDS, None, cfg, {"L": L})
        rows = np.concatenate(chunks)
        return CheckReport(name, FAILS, unpack_witness(rows[lex_smallest(rows)], fields), cfg, {"L": L})
    S = parametric_samples(H, direction, kind, xbar, pbar, ybar, cfg)
    return report_from_samples(name, S, L, cfg)


def estimate_parametric(H, direction, kind, xbar, pbar, ybar, cfg=None):
    """Sampled exact bound of a parametric property (supremum of ratios, or
    largest passing rate for kind="open")."""
    cfg = cfg or NbhdConfig()
    _require_param_graph_point(H, xbar, pbar, ybar)
    name = f"{kind}_{direction}"
    resolution = (H.h_x, H.h_y)
    if kind == "open":
        def passes(L):
            chunks, fields = _param_open_violations(H, direction, xbar, pbar, ybar, L, cfg)
            if not chunks:
                return True, None
            rows = np.concatenate(chunks)
            return False, unpack_witness(rows[lex_smallest(rows)], fields)
        return bisect_rate(name, passes, cfg, resolution)
    S = parametric_samples(H, direction, kind, xbar, pbar, ybar, cfg)
    return estimate_from_samples(name, S, cfg, resolution)



# Theorem-level plumbing shared by the sum and implicit-map verifiers.

BOUND_ABS_TOL = 1e-9
MODES = ("gated", "falsification")


@dataclass(frozen=True)
class TheoremConfig:
    """Settings for theorem verifiers.

    A premise asserting that some finite constant exists is read as "holds
    with constant premise_L"; the claimed bound is then built from the
    sampled estimates. `bound_tol` is the relative slack on that bound.
    """

    nbhd: NbhdConfig = field(default_factory=NbhdConfig)
    premise_L: float = 5.0
    sum_cfg: object = None
    alpha_grid: tuple = (0.5, 0.25, 0.125, 0.0625)
    beta_grid: tuple = (0.5, 0.25, 0.125, 0.0625)
    tau_zero: float = None
    bound_tol: float = 0.05
    mode: str = "gated"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not self.premise_L > 0:
            raise ValueError("premise_L must be positive")
        if self.bound_tol < 0:
            raise ValueError("bound_tol must be nonnegative")
        for name in ("alpha_grid", "beta_grid"):
            g = tuple(sorted((float(v) for v in getattr(self, name)), reverse=True))
            if not g or g[-1] <= 0:
                raise ValueError(f"{name} must be positive")
            object.__setattr__(self, name, g)

    def to_dict(self):
        return jsonable({"nbhd": self.nbhd.to_dict(), "premise_L": self.premise_L,
                         "alpha_grid": self.alpha_grid, "beta_grid": self.beta_grid,
                         "tau_zero": self.tau_zero, "bound_tol": self.bound_tol,
                         "mode": self.mode,
                         "sum_cfg": None if self.sum_cfg is None else self.sum_cfg.to_dict()})


@dataclass(frozen=True)
class TheoremReport:
    theorem_id: str
    premise_checks: tuple
    conclusion_check: CheckReport = None
    bound_claimed: float = None
    bound_measured: float = None
    mode: str = "gated"
    bound_tol: float = 0.05
    details: dict = field(default_factory=dict)
    # "upper": measured constant must not exceed the claim; "lower": a rate
    bound_kind: str = "upper"

    @property
    def premises_hold(self):
        return all(c.holds for c in self.premise_checks)

    @property
    def bound_ok(self):
        if self.bound_claimed is None or self.bound_measured is None:
            return None
        if self.bound_kind == "lower":
            return bool(self.bound_measured >= self.bound_claimed * (1 - self.bound_tol) - BOUND_ABS_TOL)
        return bool(self.bound_measured <= self.bound_claimed * (1 + self.bound_tol) + BOUND_ABS_TOL)

    @property
    def consistent(self):
        """False only when every premise holds and the conclusion does not."""
        if not self.premises_hold:
            return True
        return (self.conclusion_check is not None and self.conclusion_check.holds
                and self.bound_ok is not False)

    def to_dict(self):
        return jsonable({
            "theorem_id": self.theorem_id, "mode": self.mode,
            "premises_hold": self.premises_hold,
            "premise_checks": [c.to_dict() for c in self.premise_checks],
            "conclusion_check": None if self.conclusion_check is None else self.conclusion_check.to_dict(),
            "bound_claimed": self.bound_claimed, "bound_measured": self.bound_measured,
            "bound_kind": self.bound_kind, "bound_ok": self.bound_ok, "consistent": self.consistent, "details": self.details,
        })


def premise_check(name, report, estimate=None):
    """Rename a check and attach the sampled estimate of its constant."""
    details = dict(report.details)
    if estimate is not None:
        details["estimate"] = estimate.value
        details["estimate_flags"] = list(estimate.flags)
    return replace(report, property=name, details=details)


def slack(claimed, bound_tol):
    return claimed * (1 + bound_tol) + BOUND_ABS_TOL


def trivial_check(name, note):
    """A premise that holds for every finite sample (e.g. closed graphs)."""
    return CheckReport(name, HOLDS, None, None, {"note": note})


def gate_check(name, ok, note):
    return CheckReport(name, HOLDS if ok else FAILS, None if ok else {"note": note}, None, {"note": note})
