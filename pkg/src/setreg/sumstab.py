"""Sums of sampled multifunctions and local sum-stability.

Sum-stability around (xbar, ybar, zbar): for every eps some delta works, in
the sense that each w in (F+G)(x) near ybar + zbar, with x near xbar, splits
as y + z with y in F(x) near ybar and z in G(x) near zbar. The checker sweeps
a finite eps grid, so "holds" means "holds for every swept eps".
"""

from dataclasses import dataclass, replace

import numpy as np

from .regmoduli import (FAILS, HOLDS, CheckReport, NbhdConfig, TheoremConfig, TheoremReport,
                        check_property, estimate_modulus, lex_smallest, premise_check,
                        require_graph_point, slack)
from .setcore import (INF, FiniteMultifunction, ParametricMultifunction, Window, as_point,
                      dists_to_set, jsonable, norm, snap, unique_rows)


@dataclass(frozen=True)
class SumStabilityConfig:
    """eps_grid: swept eps values. delta_grid: either one list of candidates
    shared by every eps (those >= eps are skipped) or one list per eps;
    None means eps * 2^-k. tol_w: slack allowed in w = y + z, defaulting to
    the codomain step. delta_floor: smallest candidate considered, default
    3 * tol_w; below it the sampled ball holds too few points to test."""

    eps_grid: tuple = (0.4, 0.2, 0.1)
    delta_grid: tuple = None
    tol_w: float = None
    delta_floor: float = None

    def __post_init__(self):
        eps = tuple(sorted((float(e) for e in self.eps_grid), reverse=True))
        if not eps or eps[-1] <= 0:
            raise ValueError("eps_grid must be positive")
        object.__setattr__(self, "eps_grid", eps)
        if self.delta_grid is not None:
            dg = list(self.delta_grid)
            if dg and np.ndim(dg[0]) > 0:
                if len(dg) != len(eps):
                    raise ValueError("per-eps delta_grid must match eps_grid in length")
                dg = tuple(tuple(float(d) for d in row) for row in dg)
            else:
                dg = tuple(float(d) for d in dg)
            flat = [d for row in dg for d in (row if isinstance(row, tuple) else (row,))]
            if any(d <= 0 for d in flat):
                raise ValueError("delta_grid must be positive")
            object.__setattr__(self, "delta_grid", dg)
        for name in ("tol_w", "delta_floor"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be nonnegative")

    def deltas(self, k, floor):
        eps = self.eps_grid[k]
        dg = self.delta_grid
        if dg is None:
            cand = [eps * 2.0 ** -j for j in range(1, 13)]
        elif dg and isinstance(dg[0], tuple):
            cand = list(dg[k])
        else:
            cand = list(dg)
        cand = sorted({d for d in cand if d < eps and d >= floor}, reverse=True)
        if not cand and self.delta_grid is None and floor < eps:
            cand = [floor]
        return cand

    def to_dict(self):
        return jsonable({"eps_grid": self.eps_grid, "delta_grid": self.delta_grid,
                         "tol_w": self.tol_w, "delta_floor": self.delta_floor})


def _same_grid(F, G):
    if F.domain.shape != G.domain.shape or not np.array_equal(F.domain, G.domain):
        raise ValueError("domain grids differ")


def _pair_sums(A, B):
    if A.shape[0] == 0 or B.shape[0] == 0:
        return np.empty((0, A.shape[1]))
    return unique_rows(snap((A[:, None, :] + B[None, :, :]).reshape(-1, A.shape[1])))


def _sum_window(F, G):
    if F.window is None or G.window is None:
        return None
    lo = np.array(F.window.lo) + np.array(G.window.lo)
    hi = np.array(F.window.hi) + np.array(G.window.hi)
    return Window(lo, hi)


def minkowski_sum(F, G):
    """(F+G)(x) = {y + z : y in F(x), z in G(x)} on a shared domain grid.

    Sums are rounded to 12 decimals so that sums of grid values that agree
    up to float noise coincide. The window, when both maps have one, is
    enlarged to contain every sum.
    """
    _same_grid(F, G)
    if F.dim_y != G.dim_y:
        raise ValueError("codomain dimensions differ")
    images = [_pair_sums(a, b) for a, b in zip(F.images, G.images)]
    h_y = F.h_y if F.h_y == G.h_y else None
    return FiniteMultifunction(F.domain, images, h_x=F.h_x, h_y=h_y, window=_sum_window(F, G),
                               norm_x=F.norm_x, norm_y=F.norm_y)


def negate(G):
    """x -> -G(x)."""
    win = None if G.window is None else Window(-np.array(G.window.hi), -np.array(G.window.lo))
    cod = None if G._codomain is None else -G._codomain
    return FiniteMultifunction(G.domain, [-im for im in G.images], codomain=cod, h_x=G.h_x,
                               h_y=G.h_y, window=win, norm_x=G.norm_x, norm_y=G.norm_y)


def parametric_sum(F, G):
    """H(x, p) = F(x, p) + G(x), with G sampled on the x grid of F."""
    rows = []
    for i, x in enumerate(F.x_grid):
        try:
            gx = G.image(x)
        except KeyError as exc:
            raise ValueError("domain grids differ") from exc
        rows.append([_pair_sums(F.images[i][j], gx) for j in range(F.p_grid.shape[0])])
    win = None
    if F.window is not None and G.window is not None:
        win = Window(np.array(F.window.lo) + np.array(G.window.lo),
                     np.array(F.window.hi) + np.array(G.window.hi))
    return ParametricMultifunction(F.x_grid, F.p_grid, rows, h_x=F.h_x, h_p=F.h_p,
                                   h_y=F.h_y if F.h_y == G.h_y else None, window=win,
                                   norm_x=F.norm_x, norm_p=F.norm_p, norm_y=F.norm_y)


def _resolve(cfg, h_values):
    cfg = cfg or SumStabilityConfig()
    steps = [h for h in h_values if h]
    tol_w = cfg.tol_w if cfg.tol_w is not None else (max(steps) if steps else 1e-9)
    floor = cfg.delta_floor if cfg.delta_floor is not None else 3 * tol_w
    return cfg, tol_w, floor


class _Cell:
    """One sampled argument (x, or (x, p)) with its image sets."""

    def __init__(self, key, dist, Fx, Gx, wbar, norm_y):
        self.key = key
        self.dist = dist
        self.Fx, self.Gx = Fx, Gx
        self.W = _pair_sums(Fx, Gx)
        self.wdist = norm(self.W - wbar, norm_y) if self.W.shape[0] else np.empty(0)


def _sum_stability(name, cells, ybar, zbar, cfg, tol_w, floor, norm_y, fields):
    per_eps = {}
    witness = None
    for k, eps in enumerate(cfg.eps_grid):
        deltas = cfg.deltas(k, floor)
        reach = deltas[0] if deltas else 0.0
        gaps = []
        for c in cells:
            # only sums inside the largest delta ball can ever be tested
            near = c.wdist < reach
            if c.dist >= reach or not near.any():
                gaps.append((near, np.empty(0)))
                continue
            Fy = c.Fx[norm(c.Fx - ybar, norm_y) < eps]
            Gz = c.Gx[norm(c.Gx - zbar, norm_y) < eps]
            gaps.append((near, dists_to_set(c.W[near], _pair_sums(Fy, Gz), norm_y)))
        found = None
        last_bad = None
        for delta in deltas:
            bad_rows = []
            for c, (near, gap) in zip(cells, gaps):
                if c.dist >= delta or gap.size == 0:
                    continue
                bad = (c.wdist[near] < delta) & (gap > tol_w + 1e-12)
                for w in c.W[near][bad]:
                    bad_rows.append(np.concatenate([c.key, w]))
            if not bad_rows:
                found = delta
                break
            last_bad = np.array(bad_rows)
        per_eps[eps] = found
        if found is None and witness is None:
            wit = {"eps": eps}
            if last_bad is not None:
                row = last_bad[lex_smallest(last_bad)]
                j = 0
                for fname, width in fields:
                    wit[fname] = [float(v) for v in row[j:j + width]]
                    j += width
            else:
                wit["note"] = "no delta candidate at or above the resolution floor"
            witness = wit
    details = {"largest_delta": {str(e): d for e, d in per_eps.items()},
               "tol_w": tol_w, "delta_floor": floor,
               "scope": "holds for every swept eps"}
    verdict = HOLDS if witness is None else FAILS
    return CheckReport(name, verdict, witness, cfg, details)


def check_sum_stability(F, G, xbar, ybar, zbar, cfg=None):
    """Local sum-stability of (F, G) around (xbar, ybar, zbar) on the grid."""
    _same_grid(F, G)
    xbar, ybar = require_graph_point(F, xbar, ybar)
    _, zbar = require_graph_point(G, xbar, zbar)
    cfg, tol_w, floor = _resolve(cfg, (F.h_y, G.h_y))
    wbar = ybar + zbar
    dx = norm(F.domain - xbar, F.norm_x)
    cells = [_Cell(x, d, F.images[i], G.images[i], wbar, F.norm_y)
             for i, (x, d) in enumerate(zip(F.domain, dx))]
    return _sum_stability("sum_stable", cells, ybar, zbar, cfg, tol_w, floor, F.norm_y,
                          [("x", F.dim_x), ("w", F.dim_y)])


def check_sum_stability_param(F, G, xbar, pbar, ybar, zbar, cfg=None):
    """Sum-stability of a parametric F with G, uniform over (x, p) near
    (xbar, pbar); the distance to the base point is the larger of the two."""
    xbar = as_point(xbar, F.dim_x)
    pbar = as_point(pbar, F.dim_p)
    ybar = as_point(ybar, F.dim_y)
    try:
        in_f = np.any(np.all(F.image(xbar, pbar) == ybar, axis=1))
    except KeyError as exc:
        raise ValueError(str(exc)) from exc
    if not in_f:
        raise ValueError("ybar is not in F(xbar, pbar)")
    _, zbar = require_graph_point(G, xbar, zbar)
    cfg, tol_w, floor = _resolve(cfg, (F.h_y, G.h_y))
    wbar = ybar + zbar
    dx = norm(F.x_grid - xbar, F.norm_x)
    dp = norm(F.p_grid - pbar, F.norm_p)
    reach = max(cfg.eps_grid)
    cells = []
    for i, x in enumerate(F.x_grid):
        if dx[i] >= reach:
            continue
        try:
            gx = G.image(x)
        except KeyError as exc:
            raise ValueError("domain grids differ") from exc
        for j, p in enumerate(F.p_grid):
            if dp[j] >= reach:
                continue
            cells.append(_Cell(np.concatenate([x, p]), max(dx[i], dp[j]), F.images[i][j], gx,
                               wbar, F.norm_y))
    return _sum_stability("sum_stable_param", cells, ybar, zbar, cfg, tol_w, floor, F.norm_y,
                          [("x", F.dim_x), ("p", F.dim_p), ("w", F.dim_y)])


def check_decomposable_calmness(F, G, xbar, ybar, zbar, L_F, L_G, r_U, r_V, tol_w=1e-9):
    """Every w in (F+G)(x) near ybar + zbar splits as y + z with
    d(y, F(xbar)) <= L_F d(x, xbar) and d(z, G(xbar)) <= L_G d(x, xbar)."""
    _same_grid(F, G)
    xbar, ybar = require_graph_point(F, xbar, ybar)
    _, zbar = require_graph_point(G, xbar, zbar)
    F0, G0 = F.image(xbar), G.image(xbar)
    wbar = ybar + zbar
    bad_rows = []
    for i, x in enumerate(F.domain):
        d = float(norm(x - xbar, F.norm_x))
        if d > r_U + 1e-12:
            continue
        W = _pair_sums(F.images[i], G.images[i])
        W = W[norm(W - wbar, F.norm_y) <= r_V + 1e-12] if W.shape[0] else W
        if W.shape[0] == 0:
            continue
        Fy = F.images[i][F.dist_y(F.images[i], F0) <= L_F * d + 1e-12]
        Gz = G.images[i][G.dist_y(G.images[i], G0) <= L_G * d + 1e-12]
        gap = dists_to_set(W, _pair_sums(Fy, Gz), F.norm_y)
        for w in W[gap > tol_w]:
            bad_rows.append(np.concatenate([x, w]))
    details = {"L_F": L_F, "L_G": L_G, "r_U": r_U, "r_V": r_V, "tol_w": tol_w}
    if not bad_rows:
        return CheckReport("decomposable_calm", HOLDS, None, None, details)
    rows = np.array(bad_rows)
    row = rows[lex_smallest(rows)]
    wit = {"x": row[:F.dim_x].tolist(), "w": row[F.dim_x:].tolist()}
    return CheckReport("decomposable_calm", FAILS, wit, None, details)


def _radius_from_stability(report, cfg, default):
    """delta that sum-stability gives for the largest swept eps not above
    `default`, or `default` when nothing usable was found."""
    table = report.details.get("largest_delta", {})
    eps_ok = sorted((float(e) for e, d in table.items() if d is not None and float(e) <= default),
                    reverse=True)
    if not eps_ok:
        return default
    return table[str(eps_ok[0])]


def verify_calm_sum(F, G, xbar, ybar, zbar, cfg=None, decomposition=None):
    """Calmness of F+G from calmness of F, G and local sum-stability.

    With `decomposition=(L_F, L_G)` the premise is instead the decomposition
    condition on the neighborhoods of cfg.nbhd, and the claimed constant is
    L_F + L_G. The conclusion is checked on the neighborhoods the premises
    provide: radius delta from sum-stability, or the cfg radii.
    """
    cfg = cfg or TheoremConfig()
    nb = cfg.nbhd
    xbar, ybar = require_graph_point(F, xbar, ybar)
    _, zbar = require_graph_point(G, xbar, zbar)
    S = minkowski_sum(F, G)
    wbar = ybar + zbar
    details = {}
    if decomposition is not None:
        L_F, L_G = decomposition
        dec = check_decomposable_calmness(F, G, xbar, ybar, zbar, L_F, L_G, nb.r_U, nb.r_V)
        premises = (dec,)
        claimed = float(L_F + L_G)
        sub = nb
        theorem = "calm_sum_decomposition"
    else:
        est_f = estimate_modulus(F, xbar, ybar, "clm", nb)
        est_g = estimate_modulus(G, xbar, zbar, "clm", nb)
        p1 = premise_check("clm_F", check_property(F, xbar, ybar, "clm", cfg.premise_L, nb), est_f)
        p2 = premise_check("clm_G", check_property(G, xbar, zbar, "clm", cfg.premise_L, nb), est_g)
        p3 = check_sum_stability(F, G, xbar, ybar, zbar, cfg.sum_cfg)
        premises = (p1, p2, p3)
        claimed = est_f.value + est_g.value
        r = _radius_from_stability(p3, cfg.sum_cfg, min(nb.r_U, nb.r_V))
        sub = replace(nb, r_U=min(r, nb.r_U), r_V=min(r, nb.r_V))
        theorem = "clm_sum"
    details["conclusion_radii"] = {"r_U": sub.r_U, "r_V": sub.r_V}
    if cfg.mode == "gated" and not all(p.holds for p in premises):
        return TheoremReport(theorem, premises, None, claimed, None, cfg.mode, cfg.bound_tol, details)
    measured = estimate_modulus(S, xbar, wbar, "clm", sub).value
    L = slack(claimed, cfg.bound_tol) if all(p.holds for p in premises) else cfg.premise_L
    concl = check_property(S, xbar, wbar, "clm", L, sub)
    concl = replace(concl, property="clm_sum", details={**concl.details, "measured": measured})
    return TheoremReport(theorem, premises, concl, claimed, measured, cfg.mode, cfg.bound_tol, details)
