"""Implicit maps S(p) = {x : 0 in H(x, p)} and theorem verifiers.

Membership of 0 is decided up to `tau_zero` (default h_y / 4). Every
verifier returns a TheoremReport; in "gated" mode the conclusion is only
evaluated when all premises hold, in "falsification" mode always.

Premises that assert the existence of a finite constant are checked with
the constant cfg.premise_L; claimed bounds use the sampled estimates.
Conclusion neighborhoods follow the premises (radii found by the alpha/beta
search or by sum-stability) rather than fixed radii.
"""

from dataclasses import dataclass, replace
import math

import numpy as np

from .regmoduli import (FAILS, HOLDS, CheckReport, NbhdConfig, TheoremConfig, TheoremReport,
                        check_parametric, check_property, estimate_modulus, estimate_parametric,
                        gate_check, lex_smallest, premise_check, slack, trivial_check)
from .setcore import (INF, FiniteMultifunction, ParametricMultifunction, as_point, dists_to_set,
                      invert, norm, scaled, unique_rows)
from .sumstab import check_sum_stability_param, negate, parametric_sum

__all__ = ["ParametricMultifunction", "ZeroTolerance", "TheoremReport", "solve_implicit",
           "verify_thm_main", "check_M_condition", "verify_difference_openness", "verify_fixp",
           "verify_variational_system"]

CLOSED_NOTE = "finite sampled graphs are closed"


@dataclass(frozen=True)
class ZeroTolerance:
    tau_zero: float

    def __post_init__(self):
        if not self.tau_zero >= 0:
            raise ValueError("tau_zero must be nonnegative")

    @classmethod
    def default(cls, h_y):
        return cls(h_y / 4 if h_y else 1e-9)

    def flags(self, h_y):
        if h_y and self.tau_zero >= h_y / 2:
            return ("tau_zero_not_below_half_step",)
        return ()


def _tz(tz, H):
    if tz is None:
        return ZeroTolerance.default(H.h_y)
    if isinstance(tz, ZeroTolerance):
        return tz
    return ZeroTolerance(float(tz))


def zero_dists(H):
    """d(0, H(x, p)) for every grid pair, as an (nx, np) array."""
    out = np.full((H.x_grid.shape[0], H.p_grid.shape[0]), INF)
    for i, row in enumerate(H.images):
        for j, im in enumerate(row):
            if im.shape[0]:
                out[i, j] = float(norm(im, H.norm_y).min())
    return out


def truncated_gap(D, beta):
    """d(0, A n B(0, beta)) from d(0, A): the nearest point survives the
    cut exactly when it lies inside the open ball."""
    return np.where(D < beta, D, INF)


def solve_implicit(H, tz=None, zd=None):
    """S(p) = {x in x_grid : d(0, H(x, p)) <= tau_zero}, as a map on p_grid."""
    tz = _tz(tz, H)
    D = zero_dists(H) if zd is None else zd
    images = [H.x_grid[D[:, j] <= tz.tau_zero] for j in range(H.p_grid.shape[0])]
    return FiniteMultifunction(H.p_grid, images, codomain=H.x_grid, h_x=H.h_p, h_y=H.h_x,
                               norm_x=H.norm_p, norm_y=H.norm_x)


def _grid_row(grid, point, what):
    hits = np.flatnonzero(np.all(grid == point, axis=1))
    if hits.size == 0:
        raise ValueError(f"{what} {point.tolist()} is not a grid point")
    return int(hits[0])


def _base(H, xbar, pbar, D, tau):
    xbar, pbar = as_point(xbar, H.dim_x), as_point(pbar, H.dim_p)
    i, j = _grid_row(H.x_grid, xbar, "xbar"), _grid_row(H.p_grid, pbar, "pbar")
    if not D[i, j] <= tau:
        raise ValueError("(xbar, pbar, 0) is not on the graph within tau_zero")
    im = H.images[i][j]
    y0 = im[int(np.argmin(norm(im, H.norm_y)))]
    return xbar, pbar, i, j, y0


def _search(lhs, dist, gap_of, K, alphas, betas, tol, keys, fields, name):
    """Largest (alpha, beta) such that lhs <= K * gap(beta) for every sample
    with dist < alpha. Returns (report, alpha, beta, ratio)."""
    for a in alphas:
        inside = dist < a
        for b in betas:
            gap = gap_of(b)
            bad = inside & (lhs > scaled(K, gap) + tol)
            if not bad.any():
                usable = inside & np.isfinite(gap) & (gap > tol)
                with np.errstate(divide="ignore", invalid="ignore"):
                    r = np.where(usable, lhs / np.where(usable, gap, 1.0), 0.0)
                ratio = float(r.max()) if r.size else 0.0
                rep = CheckReport(name, HOLDS, None, None,
                                  {"alpha": a, "beta": b, "constant": K, "measured_ratio": ratio})
                return rep, a, b, ratio
    a, b = alphas[-1], betas[-1]
    gap = gap_of(b)
    bad = np.flatnonzero((dist < a) & (lhs > scaled(K, gap) + tol))
    rows = keys[bad]
    k = bad[lex_smallest(rows)]
    wit = {}
    col = 0
    for fname, width in fields:
        wit[fname] = keys[k, col:col + width].tolist()
        col += width
    wit.update(lhs=float(lhs[k]), rhs=float(scaled(K, gap[k])))
    rep = CheckReport(name, FAILS, wit, None, {"alpha": a, "beta": b, "constant": K})
    return rep, None, None, None


def _inequality(H, S, D, xbar, pbar, i0, j0, c, direction, cfg, tau):
    """Direction i: d(x, S(pbar)) <= c^-1 d(0, H(x, pbar) n B(0, beta)).
    Direction ii: d(p, S^-1(xbar)) <= c^-1 d(0, H(xbar, p) n B(0, beta))."""
    tol = cfg.nbhd.tol
    if direction == "i":
        pts, base = H.x_grid, H.x_grid[D[:, j0] <= tau]
        nrm = H.norm_x
        col = D[:, j0]
        name = "clmS_inequality"
        fields = [("x", H.dim_x)]
        dist = norm(pts - xbar, nrm)
    else:
        pts, base = H.p_grid, H.p_grid[D[i0, :] <= tau]
        nrm = H.norm_p
        col = D[i0, :]
        name = "subregS_inequality"
        fields = [("p", H.dim_p)]
        dist = norm(pts - pbar, nrm)
    lhs = dists_to_set(pts, base, nrm)
    return _search(lhs, dist, lambda b: truncated_gap(col, b), 1.0 / c,
                   cfg.alpha_grid, cfg.beta_grid, tol, pts, fields, name)


def _direction(direction):
    if direction not in ("i", "ii"):
        raise ValueError("direction must be 'i' or 'ii'")


def verify_thm_main(H, xbar, pbar, c, direction="i", cfg=None, tz=None):
    """Pseudo-openness of a slice of H gives the distance inequality for S;
    adding partial calmness of H gives calmness (i) or subregularity (ii)
    of S with constant c^-1 times the partial calmness modulus."""
    _direction(direction)
    if not c > 0:
        raise ValueError("c must be positive")
    cfg = cfg or TheoremConfig()
    tz = _tz(tz if tz is not None else cfg.tau_zero, H)
    tau = tz.tau_zero
    D = zero_dists(H)
    xbar, pbar, i0, j0, y0 = _base(H, xbar, pbar, D, tau)
    S = solve_implicit(H, tz, D)
    nb = cfg.nbhd
    if direction == "i":
        sl, a0, tag, calm_dir = H.slice_p_at(j0), xbar, "p", "p_unif_x"
    else:
        sl, a0, tag, calm_dir = H.slice_x_at(i0), pbar, "x", "x_unif_p"
    p_open = check_property(sl, a0, y0, "lpo", c, nb)
    p_open = replace(p_open, property=f"lpo_slice_{'pbar' if direction == 'i' else 'xbar'}")
    ineq, alpha, beta, ratio = _inequality(H, S, D, xbar, pbar, i0, j0, c, direction, cfg, tau)
    est = estimate_parametric(H, calm_dir, "calm", xbar, pbar, y0, nb)
    p_calm = premise_check(f"calm_{calm_dir}",
                           check_parametric(H, calm_dir, "calm", xbar, pbar, y0, cfg.premise_L, nb),
                           est)
    premises = (p_open, ineq, p_calm)
    claimed = est.value / c
    details = {"tau_zero": tau, "tau_flags": list(tz.flags(H.h_y)), "c": c,
               "direction": direction, "alpha": alpha, "beta": beta}
    if cfg.mode == "gated" and not all(p.holds for p in premises):
        return TheoremReport(f"main_{direction}", premises, None, claimed, None, cfg.mode,
                             cfg.bound_tol, details)
    # moving-variable radius s must satisfy l * s < beta
    beta_eff = beta if beta is not None else cfg.beta_grid[-1]
    alpha_eff = alpha if alpha is not None else cfg.alpha_grid[-1]
    s = nb.r_U if est.value == 0 else min(nb.r_U, beta_eff / est.value * (1 - 1e-9))
    a = min(alpha_eff, nb.r_V)
    sub = replace(nb, r_U=s, r_V=a)
    L = slack(claimed, cfg.bound_tol) if all(p.holds for p in premises) else cfg.premise_L
    if direction == "i":
        measured = estimate_modulus(S, pbar, xbar, "clm", sub).value
        concl = check_property(S, pbar, xbar, "clm", L, sub)
        concl = replace(concl, property="clm_S")
    else:
        T = invert(S)
        measured = estimate_modulus(T, xbar, pbar, "clm", sub).value
        concl = check_property(T, xbar, pbar, "clm", L, sub)
        sub_est = estimate_modulus(S, pbar, xbar, "subreg", replace(nb, r_U=a)).value
        concl = replace(concl, property="subreg_S_via_calm_inverse",
                        details={**concl.details, "subreg_estimate": sub_est})
        details["subreg_estimate"] = sub_est
    details["conclusion_radii"] = {"moving": s, "other": a}
    return TheoremReport(f"main_{direction}", premises, concl, claimed, measured, cfg.mode,
                         cfg.bound_tol, details)


def check_M_condition(H, xbar, pbar, M, direction="ii", cfg=None, c=1.0, tz=None):
    """Gap condition replacing partial calmness.

    i: d(p, pbar) < M d(0, H(x, pbar) n B(0, beta)) forces 0 not in H(x, p);
    then S is calm at (pbar, xbar) with constant 1/(cM).
    ii: d(x, xbar) < M d(0, H(xbar, p) n B(0, beta)) forces 0 not in H(x, p);
    then S is metrically subregular at (pbar, xbar) with constant 1/(cM),
    measured as calmness of S^-1.
    """
    _direction(direction)
    if not M > 0 or not c > 0:
        raise ValueError("M and c must be positive")
    cfg = cfg or TheoremConfig()
    tz = _tz(tz if tz is not None else cfg.tau_zero, H)
    tau = tz.tau_zero
    D = zero_dists(H)
    xbar, pbar, i0, j0, y0 = _base(H, xbar, pbar, D, tau)
    S = solve_implicit(H, tz, D)
    ineq, alpha, beta, _ = _inequality(H, S, D, xbar, pbar, i0, j0, c, direction, cfg, tau)
    if not ineq.holds:
        raise ValueError("prerequisite inequality not verified at resolution")
    nb = cfg.nbhd
    dx = norm(H.x_grid - xbar, H.norm_x)
    dp = norm(H.p_grid - pbar, H.norm_p)
    if direction == "i":
        gap = truncated_gap(D[:, j0], beta)
        rows_in = dx < alpha
        cols_in = dp <= nb.r_V + 1e-12
        trigger = dp[None, :] < M * gap[:, None]
    else:
        gap = truncated_gap(D[i0, :], beta)
        rows_in = dx <= nb.r_U + 1e-12
        cols_in = dp < alpha
        trigger = dx[:, None] < M * gap[None, :]
    bad = rows_in[:, None] & cols_in[None, :] & trigger & (D <= tau)
    details = {"tau_zero": tau, "M": M, "c": c, "alpha": alpha, "beta": beta}
    if bad.any():
        idx = np.argwhere(bad)
        keys = np.hstack([H.x_grid[idx[:, 0]], H.p_grid[idx[:, 1]]])
        k = lex_smallest(keys)
        wit = {"x": keys[k, :H.dim_x].tolist(), "p": keys[k, H.dim_x:].tolist()}
        scan = CheckReport(f"M_condition_{direction}", FAILS, wit, None, {"M": M})
    else:
        scan = CheckReport(f"M_condition_{direction}", HOLDS, None, None, {"M": M})
    premises = (ineq, scan)
    claimed = 1.0 / (c * M)
    if cfg.mode == "gated" and not scan.holds:
        return TheoremReport(f"M_condition_{direction}", premises, None, claimed, None,
                             cfg.mode, cfg.bound_tol, details)
    L = slack(claimed, cfg.bound_tol) if scan.holds else cfg.premise_L
    if direction == "i":
        sub = replace(nb, r_U=nb.r_V, r_V=alpha)
        measured = estimate_modulus(S, pbar, xbar, "clm", sub).value
        concl = replace(check_property(S, pbar, xbar, "clm", L, sub), property="clm_S")
    else:
        sub = replace(nb, r_U=nb.r_U, r_V=alpha)
        T = invert(S)
        measured = estimate_modulus(T, xbar, pbar, "clm", sub).value
        concl = replace(check_property(T, xbar, pbar, "clm", L, sub),
                        property="subreg_S_via_calm_inverse")
    return TheoremReport(f"M_condition_{direction}", premises, concl, claimed, measured,
                         cfg.mode, cfg.bound_tol, details)


def difference_map(F1, F2):
    """x -> F1(x) - F2^{-1}(x), with F2 : Y => X read through its graph."""
    rows = []
    for x, im in zip(F1.domain, F1.images):
        pre = F2.preimage(x) if F2.dim_y == F1.dim_x else np.empty((0, F1.dim_y))
        if im.shape[0] == 0 or pre.shape[0] == 0:
            rows.append(np.empty((0, F1.dim_y)))
            continue
        diff = (im[:, None, :] - pre[None, :, :]).reshape(-1, F1.dim_y)
        rows.append(unique_rows(np.round(diff, 12) + 0.0))
    return FiniteMultifunction(F1.domain, rows, h_x=F1.h_x, h_y=F1.h_y,
                               norm_x=F1.norm_x, norm_y=F1.norm_y)


def verify_difference_openness(F1, F2, xbar, ybar, zbar, L, M, cfg=None):
    """Openness of F1 at rate L and of F2 at rate M around the base points,
    with LM > 1, give B(ybar - zbar, (L - 1/M) rho) inside (F1 - F2^-1)(B(xbar, rho)).

    The ball is sampled on the lattice of step h (the finer of the two
    relevant steps) centered at ybar - zbar; a target counts as reached when
    it lies within h of the sampled image.
    """
    cfg = cfg or TheoremConfig()
    nb = cfg.nbhd
    xbar = as_point(xbar, F1.dim_x)
    ybar = as_point(ybar, F1.dim_y)
    zbar = as_point(zbar, F2.dim_x)
    if not F1.in_graph(xbar, ybar) or not F2.in_graph(zbar, xbar):
        raise ValueError("base points are not on the graphs")
    gate = gate_check("LM_gt_1", L * M > 1, f"L*M = {L * M}")
    if not gate.holds:
        return TheoremReport("difference_openness", (gate,), None, L - 1.0 / M, None, cfg.mode,
                             cfg.bound_tol, {"note": "premise gate LM > 1 violated"})
    o1 = replace(check_property(F1, xbar, ybar, "lop", L, nb), property="lop_F1")
    o2 = replace(check_property(F2, zbar, xbar, "lop", M, nb.swapped()), property="lop_F2")
    premises = (trivial_check("closed_graph_F1", CLOSED_NOTE),
                trivial_check("closed_graph_F2", CLOSED_NOTE), o1, o2, gate)
    claimed = L - 1.0 / M
    eps = min(nb.r_U, nb.r_V / L, M * nb.r_V)
    details = {"eps": eps}
    if cfg.mode == "gated" and not all(p.holds for p in premises):
        return TheoremReport("difference_openness", premises, None, claimed, None, cfg.mode,
                             cfg.bound_tol, details, "lower")
    Dm = difference_map(F1, F2)
    steps = [s for s in (F1.h_y, F2.h_x, F1.h_x) if s]
    h = min(steps) if steps else 1e-3
    center = ybar - zbar
    dx = norm(Dm.domain - xbar, Dm.norm_x)
    rhos = [r for r in nb.rho_grid if r < eps]
    worst = INF
    bad_rows = []
    for rho in rhos:
        reach = Dm.graph_y[np.isin(Dm.owners, np.flatnonzero(dx < rho))]
        R = claimed * rho
        k = int(math.ceil(R / h)) + 1
        axes = [np.arange(-k, k + 1) * h] * Dm.dim_y
        mesh = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1) + center
        gap = Dm.dist_y(mesh, reach)
        r_w = norm(mesh - center, Dm.norm_y)
        inside = r_w < R
        miss = inside & (gap > h + 1e-12)
        for w in mesh[miss]:
            bad_rows.append(np.concatenate([[rho], w]))
        # largest radius whose lattice points are all reached
        missed = r_w[gap > h + 1e-12]
        covered = float(missed.min()) if missed.size else INF
        worst = min(worst, covered / rho)
    if bad_rows:
        rows = np.array(bad_rows)
        row = rows[lex_smallest(rows)]
        concl = CheckReport("ball_inclusion", FAILS, {"rho": float(row[0]), "w": row[1:].tolist()},
                            nb, {"rate": claimed})
    else:
        concl = CheckReport("ball_inclusion", HOLDS, None, nb, {"rate": claimed})
    return TheoremReport("difference_openness", premises, concl, claimed, worst, cfg.mode,
                         cfg.bound_tol, details, "lower")


def verify_fixp(Phi, Psi, xbar, pbar, ybar, l, m, cfg=None, tz=None):
    """Aubin property of Phi in x (constant l), metric regularity of Psi
    (constant m), lm < 1 and sum-stability of (Phi, -Psi) give
    d(x, S(p)) <= (1/m - l)^-1 d(0, [Phi(x, p) - Psi(x)] n B(0, beta)),
    where S(p) = {x : Phi(x, p) meets Psi(x)}."""
    cfg = cfg or TheoremConfig()
    nb = cfg.nbhd
    xbar, pbar = as_point(xbar, Phi.dim_x), as_point(pbar, Phi.dim_p)
    ybar = as_point(ybar, Phi.dim_y)
    try:
        on_phi = np.any(np.all(Phi.image(xbar, pbar) == ybar, axis=1))
    except KeyError as exc:
        raise ValueError(str(exc)) from exc
    if not on_phi or not Psi.in_graph(xbar, ybar):
        raise ValueError("base points are not on the graphs")
    if not (l >= 0 and m > 0):
        raise ValueError("l must be nonnegative and m positive")
    gate = gate_check("lm_lt_1", l * m < 1, f"l*m = {l * m}")
    if not gate.holds:
        return TheoremReport("fixp", (gate,), None, None, None, cfg.mode, cfg.bound_tol,
                             {"note": "premise gate lm < 1 violated"})
    K = 1.0 / (1.0 / m - l)
    Hd = parametric_sum(Phi, negate(Psi))
    tz = _tz(tz if tz is not None else cfg.tau_zero, Hd)
    tau = tz.tau_zero
    ss = check_sum_stability_param(Phi, negate(Psi), xbar, pbar, ybar, -ybar, cfg.sum_cfg)
    aub = check_parametric(Phi, "x_unif_p", "aubin", xbar, pbar, ybar, l, nb)
    reg = check_property(Psi, xbar, ybar, "reg", m, nb)
    premises = (trivial_check("closed_graph_Phi", CLOSED_NOTE),
                trivial_check("closed_graph_Psi", CLOSED_NOTE), ss,
                replace(aub, property="aubin_x_unif_p"), replace(reg, property="reg_Psi"), gate)
    details = {"tau_zero": tau, "tau_flags": list(tz.flags(Hd.h_y)), "l": l, "m": m}
    if cfg.mode == "gated" and not all(p.holds for p in premises):
        return TheoremReport("fixp", premises, None, K, None, cfg.mode, cfg.bound_tol, details)
    D = zero_dists(Hd)
    S = solve_implicit(Hd, tz, D)
    dx = norm(Hd.x_grid - xbar, Hd.norm_x)
    dp = norm(Hd.p_grid - pbar, Hd.norm_p)
    nx, npr = D.shape
    lhs = np.concatenate([S.dist_y(Hd.x_grid, S.images[j]) for j in range(npr)])
    # samples ordered p-major to match lhs
    keys = np.hstack([np.tile(Hd.x_grid, (npr, 1)), np.repeat(Hd.p_grid, nx, axis=0)])
    dist = np.maximum(np.tile(dx, npr), np.repeat(dp, nx))
    flatD = D.T.reshape(-1)
    concl, alpha, beta, ratio = _search(lhs, dist, lambda b: truncated_gap(flatD, b), K,
                                        cfg.alpha_grid, cfg.beta_grid, nb.tol, keys,
                                        [("x", Hd.dim_x), ("p", Hd.dim_p)], "diffix")
    details.update(alpha=alpha, beta=beta)
    return TheoremReport("fixp", premises, concl, K, ratio, cfg.mode, cfg.bound_tol, details)


def _with_estimate(name, report, estimate):
    return premise_check(name, report, estimate)


def verify_variational_system(F, G, xbar, pbar, ybar, mode="msubreg_sol", cfg=None, tz=None):
    """S(p) = {x : 0 in F(x, p) + G(x)} near (pbar, xbar).

    msubreg_sol: sum-stability, calmness of F in x uniformly in p, metric
    regularity of F(xbar, .) and calmness of G give subregularity of S with
    constant reg * (clm_x F + clm G).
    clm_sol: sum-stability, Aubin property of F in x uniformly in p (lip),
    calmness of F in p uniformly in x (clm_p), metric regularity of G (reg)
    and lip * reg < 1 give calmness of S with constant
    reg * clm_p / (1 - lip * reg).
    """
    if mode not in ("msubreg_sol", "clm_sol"):
        raise ValueError("mode must be 'msubreg_sol' or 'clm_sol'")
    cfg = cfg or TheoremConfig()
    nb = cfg.nbhd
    xbar, pbar = as_point(xbar, F.dim_x), as_point(pbar, F.dim_p)
    ybar = as_point(ybar, F.dim_y)
    try:
        on_f = np.any(np.all(F.image(xbar, pbar) == ybar, axis=1))
    except KeyError as exc:
        raise ValueError(str(exc)) from exc
    if not on_f or not G.in_graph(xbar, -ybar):
        raise ValueError("base points are not on the graphs")
    H = parametric_sum(F, G)
    tz = _tz(tz if tz is not None else cfg.tau_zero, H)
    tau = tz.tau_zero
    D = zero_dists(H)
    S = solve_implicit(H, tz, D)
    cap = cfg.premise_L
    ss = check_sum_stability_param(F, G, xbar, pbar, ybar, -ybar, cfg.sum_cfg)
    details = {"tau_zero": tau, "tau_flags": list(tz.flags(H.h_y))}
    if mode == "msubreg_sol":
        e_cx = estimate_parametric(F, "x_unif_p", "calm", xbar, pbar, ybar, nb)
        Fx = F.slice_x(xbar)
        e_reg = estimate_modulus(Fx, pbar, ybar, "reg", nb)
        e_cg = estimate_modulus(G, xbar, -ybar, "clm", nb)
        premises = (
            ss,
            _with_estimate("calm_x_unif_p", check_parametric(F, "x_unif_p", "calm", xbar, pbar,
                                                             ybar, cap, nb), e_cx),
            _with_estimate("reg_F_xbar", check_property(Fx, pbar, ybar, "reg", cap, nb), e_reg),
            _with_estimate("clm_G", check_property(G, xbar, -ybar, "clm", cap, nb), e_cg),
        )
        claimed = e_reg.value * (e_cx.value + e_cg.value) if math.isfinite(e_reg.value) else INF
        kind, name = "subreg", "subreg_S"
    else:
        e_lip = estimate_parametric(F, "x_unif_p", "aubin", xbar, pbar, ybar, nb)
        e_cp = estimate_parametric(F, "p_unif_x", "calm", xbar, pbar, ybar, nb)
        e_reg = estimate_modulus(G, xbar, -ybar, "reg", nb)
        prod = e_lip.value * e_reg.value
        premises = (
            replace(ss, details={**ss.details, "note": "uniform-in-p sum-stability is read as "
                                 "the parametric sum-stability definition"}),
            trivial_check("closed_graph_F_p", CLOSED_NOTE),
            trivial_check("closed_graph_G", CLOSED_NOTE),
            _with_estimate("aubin_x_unif_p", check_parametric(F, "x_unif_p", "aubin", xbar, pbar,
                                                              ybar, cap, nb), e_lip),
            _with_estimate("calm_p_unif_x", check_parametric(F, "p_unif_x", "calm", xbar, pbar,
                                                             ybar, cap, nb), e_cp),
            _with_estimate("reg_G", check_property(G, xbar, -ybar, "reg", cap, nb), e_reg),
            gate_check("lip_times_reg_lt_1", prod < 1, f"lip * reg = {prod}"),
        )
        claimed = e_reg.value * e_cp.value / (1 - prod) if prod < 1 else INF
        kind, name = "clm", "clm_S"
    details["estimates"] = {p.property: p.details.get("estimate") for p in premises
                            if "estimate" in p.details}
    if cfg.mode == "gated" and not all(p.holds for p in premises):
        return TheoremReport(mode, premises, None, claimed, None, cfg.mode, cfg.bound_tol, details)
    ok = all(p.holds for p in premises) and math.isfinite(claimed)
    L = slack(claimed, cfg.bound_tol) if ok else cap
    measured = estimate_modulus(S, pbar, xbar, kind, nb).value
    concl = replace(check_property(S, pbar, xbar, kind, L, nb), property=name)
    details["clm_inverse_estimate"] = estimate_modulus(invert(S), xbar, pbar, "clm",
                                                       nb.swapped()).value
    return TheoremReport(mode, premises, concl, claimed, measured, cfg.mode, cfg.bound_tol, details)
