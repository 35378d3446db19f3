"""Solid vector optimization on sampled data.

Cones are polyhedral, K = {z : w_j . z >= 0}. The scalarizing functional
s_e(z) = inf{t : t e in z + K} has the closed form max_j (w_j . z) / (w_j . e).
The epigraphical constraint map is E_G(x, q) = G(x) + q for q in Q, empty
otherwise; its domain X x Z carries the additive metric.
"""

from dataclasses import dataclass, field
import itertools
import math

import numpy as np

from .regmoduli import (FAILS, HOLDS, CheckReport, NbhdConfig, Samples, TheoremReport,
                        check_property, estimate_from_samples, gate_check, lex_smallest,
                        premise_check, report_from_samples)
from .setcore import (INF, FiniteMultifunction, as_point, check_norm, dists_to_set, jsonable,
                      lattice, norm, snap)

RAY_TOL = 1e-10
MAX_CONE_DIM = 4
DUAL_NORM = {"max": "sum", "sum": "max", "euclid": "euclid"}


def _rays(rows, dim):
    """Extreme rays of {n : rows @ n >= 0}, as unit vectors.

    An extreme ray is cut out by dim - 1 independent active rows.
    """
    rows = np.asarray(rows, dtype=float).reshape(-1, dim)
    found = []
    for combo in itertools.combinations(range(rows.shape[0]), dim - 1):
        if dim == 1:
            cands = [np.ones(1)]
        else:
            sub = rows[list(combo)]
            _, sv, vt = np.linalg.svd(sub)
            if np.count_nonzero(sv > RAY_TOL * max(1.0, sv[0])) != dim - 1:
                continue
            cands = [vt[-1]]
        for n in cands:
            for s in (1.0, -1.0):
                v = s * n / np.linalg.norm(n)
                if np.all(rows @ v >= -RAY_TOL):
                    found.append(v)
    if not found:
        return np.empty((0, dim))
    out = np.unique(np.round(np.array(found), 12) + 0.0, axis=0)
    return out


class PolyhedralCone:
    """Closed convex pointed proper cone given by generators.

    Either description may be supplied; the other is computed by extreme-ray
    enumeration (dimension at most 4). Both are stored as unit vectors and
    the dual description is irredundant.
    """

    def __init__(self, dual_generators=None, primal_generators=None):
        if dual_generators is None and primal_generators is None:
            raise ValueError("a cone needs primal or dual generators")
        src = primal_generators if primal_generators is not None else dual_generators
        src = np.asarray(src, dtype=float)
        if src.ndim == 1:
            src = src.reshape(1, -1)
        dim = src.shape[1]
        if not 1 <= dim <= MAX_CONE_DIM:
            raise ValueError(f"cone dimension must be between 1 and {MAX_CONE_DIM}")
        if not np.all(np.isfinite(src)) or np.any(np.linalg.norm(src, axis=1) == 0):
            raise ValueError("generators must be finite and nonzero")
        if primal_generators is None:
            primal = _rays(src, dim)
            if primal.shape[0] == 0 or np.linalg.matrix_rank(src) < dim:
                raise ValueError("cone is not pointed")
        else:
            primal = _rays(_rays(src, dim), dim)
        dual = _rays(primal, dim)
        if primal.shape[0] == 0:
            raise ValueError("cone is {0}")
        if dual.shape[0] == 0:
            raise ValueError("cone is the whole space")
        if np.linalg.matrix_rank(dual) < dim:
            raise ValueError("cone is not pointed")
        self.primal_generators = primal
        self.dual_generators = dual
        self.dimension = dim
        self.solid = bool(np.linalg.matrix_rank(primal) == dim)

    def __repr__(self):
        return f"PolyhedralCone(dim={self.dimension}, dual={self.dual_generators.tolist()})"

    def contains(self, z, tol=1e-12):
        z = np.asarray(z, dtype=float)
        return np.all(z.reshape(-1, self.dimension) @ self.dual_generators.T >= -tol, axis=1)

    def in_interior(self, z):
        z = np.asarray(z, dtype=float)
        return np.all(z.reshape(-1, self.dimension) @ self.dual_generators.T > 0, axis=1)

    def interior_point(self):
        if not self.solid:
            raise ValueError("cone has empty interior")
        return self.primal_generators.sum(axis=0)

    def to_dict(self):
        return jsonable({"dual_generators": self.dual_generators,
                         "primal_generators": self.primal_generators,
                         "solid": self.solid, "dimension": self.dimension})

    @classmethod
    def from_dict(cls, data):
        if "dual_generators" in data:
            return cls(dual_generators=data["dual_generators"])
        return cls(primal_generators=data["primal_generators"])

    @classmethod
    def orthant(cls, dim):
        return cls(dual_generators=np.eye(dim))


class GerstewitzFunctional:
    """s_e for a solid polyhedral cone K and e in int K; `norm` is the norm
    of Y used for the Lipschitz constant."""

    def __init__(self, cone, e, norm="max"):
        if not cone.solid:
            raise ValueError("cone must be solid")
        self.cone = cone
        self.e = as_point(e, cone.dimension)
        self.norm = check_norm(norm)
        self._we = cone.dual_generators @ self.e
        if np.any(self._we <= 0):
            raise ValueError("e is not an interior point of the cone")
        self.L_e = gerstewitz_lipschitz(self)

    def __call__(self, z):
        return gerstewitz_value(self, z)

    def to_dict(self):
        return jsonable({"cone": self.cone.to_dict(), "e": self.e, "norm": self.norm,
                         "L_e": self.L_e})


def gerstewitz_value(s, z):
    """max_j (w_j . z) / (w_j . e); vectorized over rows of z."""
    z = np.asarray(z, dtype=float)
    vals = (z.reshape(-1, s.cone.dimension) @ s.cone.dual_generators.T) / s._we
    out = vals.max(axis=1)
    return float(out[0]) if z.ndim <= 1 else out


def gerstewitz_lipschitz(s):
    """1 / d(e, bd K): the distance to the complement of K is the smallest
    distance to one of the open halfspaces w_j . z < 0."""
    w = s.cone.dual_generators
    dual = norm(w, DUAL_NORM[s.norm])
    we = w @ s.e
    if np.any(we <= 0):
        raise ValueError("e lies on the boundary of the cone")
    return float(1.0 / np.min(we / dual))


def gerstewitz_subdiff(s, u):
    """Vertices of {v in K* : v . e = 1, v . u = s_e(u)}.

    The normalized dual generators w_j / (w_j . e) are the vertices of the
    base of K*; the face is spanned by the active ones.
    """
    u = as_point(u, s.cone.dimension)
    w = s.cone.dual_generators
    ratios = (w @ u) / s._we
    top = ratios.max()
    active = ratios >= top - 1e-12 * max(1.0, abs(top))
    verts = w[active] / s._we[active, None]
    return np.unique(np.round(verts, 12) + 0.0, axis=0)


def check_weak_pareto(A, ybar, K, e=None):
    """ybar is a weak Pareto minimum of A when no a - ybar lies in -int K."""
    A = np.asarray(A, dtype=float).reshape(-1, K.dimension)
    ybar = as_point(ybar, K.dimension)
    if not np.any(np.all(np.abs(A - ybar) <= 1e-12, axis=1)):
        raise ValueError("ybar is not in A")
    if not K.solid:
        raise ValueError("cone must be solid")
    d = A - ybar
    strict = np.all(d @ K.dual_generators.T < 0, axis=1)
    s = GerstewitzFunctional(K, K.interior_point() if e is None else e)
    smin = float(np.min(gerstewitz_value(s, d)))
    details = {"scalarized_min": smin, "e": s.e.tolist()}
    if strict.any():
        bad = A[strict]
        return CheckReport("weak_pareto", FAILS, {"a": bad[lex_smallest(bad)].tolist()}, None,
                           details)
    return CheckReport("weak_pareto", HOLDS, None, None, details)


# built-in objectives for problem files
OBJECTIVES = {
    "identity_pair": lambda x, p: np.array([x[0], x[0]]),
    "square_pair": lambda x, p: np.array([x[0], x[0] ** 2]),
    "constant": lambda x, p: np.asarray(p["value"], dtype=float),
    "affine": lambda x, p: np.asarray(p["A"], dtype=float) @ x + np.asarray(p.get("b", 0.0)),
}


@dataclass
class VectorProblem:
    """minimize f(x) subject to 0 in G(x) + Q, ordered by K."""

    f: object
    G: FiniteMultifunction
    K: PolyhedralCone
    Q: PolyhedralCone
    L: float
    M: float
    f_spec: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.L > 0 or not self.M > 0:
            raise ValueError("L and M must be positive")
        if self.Q.dimension != self.G.dim_y:
            raise ValueError("Q must live in the codomain of G")

    def objective(self, x):
        return np.asarray(self.f(as_point(x, self.G.dim_x)), dtype=float)

    def feasible(self, x):
        return bool(np.any(self.Q.contains(-self.G.image(x))))

    def feasible_mask(self):
        """Feasibility of every grid point of G."""
        ok = self.Q.contains(-self.G.graph_y) if self.G.graph_y.shape[0] else np.zeros(0, bool)
        out = np.zeros(self.G.domain.shape[0], dtype=bool)
        np.logical_or.at(out, self.G.owners, ok)
        return out

    @classmethod
    def from_dict(cls, data):
        spec = data["f"]
        name = spec["name"]
        if name not in OBJECTIVES:
            raise ValueError(f"unknown objective {name!r}")
        params = spec.get("params", {})
        f = lambda x, _fn=OBJECTIVES[name], _p=params: _fn(np.atleast_1d(x), _p)
        return cls(f, _load_G(data["G"]), PolyhedralCone.from_dict(data["K"]),
                   PolyhedralCone.from_dict(data["Q"]), float(data["L"]), float(data["M"]), spec)

    def to_dict(self):
        return jsonable({"f": self.f_spec, "G": self.G.to_dict(), "K": self.K.to_dict(),
                         "Q": self.Q.to_dict(), "L": self.L, "M": self.M})


def _load_G(spec):
    if "linear" in spec:
        lin = spec["linear"]
        A = np.atleast_2d(np.asarray(lin["A"], dtype=float))
        b = np.asarray(lin.get("b", np.zeros(A.shape[0])), dtype=float)
        grid = lattice(lin["lo"], lin["hi"], lin["h"])
        return FiniteMultifunction(grid, [snap(A @ x + b).reshape(1, -1) for x in grid],
                                   h_x=lin["h"], norm_x=lin.get("norm_x", "max"),
                                   norm_y=lin.get("norm_y", "max"))
    return FiniteMultifunction.from_dict(spec)


class EpigraphicalMap:
    """(x, q) -> G(x) + q if q in Q, empty otherwise."""

    def __init__(self, G, Q):
        if Q.dimension != G.dim_y:
            raise ValueError("Q must live in the codomain of G")
        self.G, self.Q = G, Q

    def __call__(self, x, q):
        q = as_point(q, self.Q.dimension)
        if not self.Q.contains(q)[0]:
            return np.empty((0, self.G.dim_y))
        return snap(self.G.image(x) + q)

    def sample(self, q_grid):
        """Sampled map on G.domain x (q_grid n Q) with the additive metric."""
        dom, owners, values = self.graph_arrays(q_grid)
        return FiniteMultifunction.from_graph(dom, owners, values, h_x=self.G.h_x, h_y=self.G.h_y,
                                              norm_x="sum", norm_y=self.G.norm_y)

    def graph_arrays(self, q_grid):
        """Domain grid, owner index and value of every graph row."""
        q_grid = np.asarray(q_grid, dtype=float).reshape(-1, self.Q.dimension)
        q_grid = q_grid[self.Q.contains(q_grid)]
        if q_grid.shape[0] == 0:
            raise ValueError("no sampled q lies in Q")
        G = self.G
        nx, nq = G.domain.shape[0], q_grid.shape[0]
        dom = np.hstack([np.repeat(G.domain, nq, axis=0), np.tile(q_grid, (nx, 1))])
        owners = (G.owners[:, None] * nq + np.arange(nq)[None, :]).ravel()
        values = snap((G.graph_y[:, None, :] + q_grid[None, :, :]).reshape(-1, G.dim_y))
        return dom, owners, values


def penalized_objective(prob, xbar, e, M=None):
    """(x, q, z) -> s_e(f(x) - f(xbar)) + L L_e M ||z||.

    `M` overrides prob.M; M = 0 is allowed here for control runs.
    """
    if not prob.feasible(xbar):
        raise ValueError("xbar is not feasible")
    s = GerstewitzFunctional(prob.K, e)
    M = prob.M if M is None else M
    weight = prob.L * s.L_e * M
    fbar = prob.objective(xbar)
    zn = prob.G.norm_y

    def phi(x, q, z):
        return gerstewitz_value(s, prob.objective(x) - fbar) + weight * float(norm(
            as_point(z, prob.G.dim_y), zn))

    phi.weight = weight
    phi.functional = s
    return phi


def _sampled_lipschitz(prob, grid, limit=2000):
    pts = grid if grid.shape[0] <= limit else grid[:: int(math.ceil(grid.shape[0] / limit))]
    vals = np.array([prob.objective(x) for x in pts])
    dx = norm(pts[:, None, :] - pts[None, :, :], prob.G.norm_x)
    dy = norm(vals[:, None, :] - vals[None, :, :], "max")
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(dx > 0, dy / np.where(dx > 0, dx, 1.0), 0.0)
    return float(q.max())


def verify_penalization(prob, xbar, qbar, q_grid, cfg=None, e=None, mode="gated", y_norm="max"):
    """Weak Pareto minimality of xbar, Lipschitz f and subregularity of E_G
    at ((xbar, qbar), 0) with constant M make (xbar, qbar, 0) a local
    minimum of the penalized objective over Gr E_G.

    The subregularity premise is checked with constant M itself.
    """
    cfg = cfg or NbhdConfig()
    xbar = as_point(xbar, prob.G.dim_x)
    qbar = as_point(qbar, prob.Q.dimension)
    if not prob.feasible(xbar):
        raise ValueError("xbar is not feasible")
    e = prob.K.interior_point() if e is None else as_point(e, prob.K.dimension)
    interior = bool(prob.K.in_interior(e)[0])
    gate_e = gate_check("e_interior", interior, "e must lie in int K")
    if not interior:
        return TheoremReport("penalization", (gate_e,), None, None, None, mode)
    dom, owners, zs = EpigraphicalMap(prob.G, prob.Q).graph_arrays(q_grid)
    base = np.concatenate([xbar, qbar])
    z0 = np.zeros(prob.G.dim_y)
    hit = np.flatnonzero(np.all(dom == base, axis=1))
    if hit.size == 0 or not np.any(np.all(zs[np.isin(owners, hit)] == z0, axis=1)):
        raise ValueError("(xbar, qbar, 0) is not on the graph of E_G")
    grid = prob.G.domain
    near = norm(grid - xbar, prob.G.norm_x) <= cfg.r_U + 1e-12
    feas = prob.feasible_mask() & near
    fvals = np.array([prob.objective(x) for x in grid[feas]])
    pareto = check_weak_pareto(fvals, prob.objective(xbar), prob.K, e)
    lip = _sampled_lipschitz(prob, grid[near])
    lip_chk = gate_check("lipschitz_f", lip <= prob.L * (1 + 1e-9) + 1e-12,
                         f"sampled difference quotient {lip}")
    samples = epigraph_subreg_samples(dom, owners, zs, base, z0, cfg.r_U, prob.G.norm_y)
    res = (prob.G.h_x, prob.G.h_y)
    sub_est = estimate_from_samples("subreg", samples, cfg, res)
    sub = premise_check("subreg_E_G",
                        report_from_samples("subreg", samples, prob.M, cfg), sub_est)
    premises = (gate_e, pareto, lip_chk, sub)
    phi = penalized_objective(prob, xbar, e)
    details = {"weight": phi.weight, "L_e": phi.functional.L_e, "y_norm": y_norm,
               "subreg_estimate": sub_est.value}
    if mode == "gated" and not all(p.holds for p in premises):
        return TheoremReport("penalization", premises, None, 0.0, None, mode, 0.0, details)
    concl, vmin = local_min_check(prob, dom[owners], zs, xbar, base, phi, cfg)
    details["min_value"] = vmin
    return TheoremReport("penalization", premises, concl, None, None, mode, 0.0, details)


def epigraph_subreg_samples(dom, owners, zs, base, zbar, r_U, z_norm):
    """Subregularity samples of E_G at (base, zbar) straight from graph rows:
    d((x, q), E_G^-1(zbar)) against d(zbar, E_G(x, q)) for (x, q) near base."""
    den = np.full(dom.shape[0], INF)
    np.minimum.at(den, owners, norm(zs - zbar, z_norm))
    U = norm(dom - base, "sum") <= r_U + 1e-12
    num = dists_to_set(dom[U], dom[den == 0], "sum")
    return Samples(num, den[U], dom[U], [("xq", dom.shape[1])])


def local_min_check(prob, doms, zs, xbar, base, phi, cfg, tol=1e-12):
    """min of phi over sampled graph points near (base, 0) must be >= -tol."""
    keep = ((norm(doms - base, "sum") <= cfg.r_U + 1e-12)
            & (norm(zs, prob.G.norm_y) <= cfg.r_W + 1e-12))
    doms, zs = doms[keep], zs[keep]
    dx = prob.G.dim_x
    xs = doms[:, :dx]
    ux, inv = np.unique(xs, axis=0, return_inverse=True)
    fbar = prob.objective(xbar)
    sx = gerstewitz_value(phi.functional, np.array([prob.objective(x) for x in ux]) - fbar)
    vals = np.atleast_1d(sx)[inv.ravel()] + phi.weight * norm(zs, prob.G.norm_y)
    vmin = float(vals.min()) if vals.size else 0.0
    bad = vals < -tol
    if bad.any():
        k = int(np.argmin(vals))
        wit = {"x": xs[k].tolist(), "q": doms[k, dx:].tolist(), "z": zs[k].tolist(),
               "value": float(vals[k])}
        return CheckReport("local_minimum", FAILS, wit, cfg, {"min_value": vmin}), vmin
    return CheckReport("local_minimum", HOLDS, None, cfg, {"min_value": vmin}), vmin


@dataclass(frozen=True)
class SlopeEstimate:
    value: float
    radii: tuple
    per_radius: tuple

    def to_dict(self):
        return jsonable({"value": self.value, "radii": self.radii, "per_radius": self.per_radius})


def strong_slope(fn, x, radii, steps=8, kind="max"):
    """max over sampled y in B(x, r) minus x of (fn(x) - fn(y))_+ / d(x, y),
    for each radius; the value reported is the one at the smallest radius.

    Each ball is sampled on the lattice of step r / steps.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    radii = tuple(sorted((float(r) for r in radii), reverse=True))
    if not radii or radii[-1] <= 0:
        raise ValueError("radii must be positive")
    fx = float(fn(x if x.size > 1 else float(x[0])))
    if not math.isfinite(fx):
        return SlopeEstimate(INF, radii, tuple(INF for _ in radii))
    seq = []
    for r in radii:
        k = np.arange(-steps, steps + 1) * (r / steps)
        mesh = np.stack([g.ravel() for g in np.meshgrid(*([k] * x.size), indexing="ij")], axis=1)
        d = norm(mesh, kind)
        mesh = mesh[(d > 0) & (d <= r * (1 + 1e-12))]
        if mesh.shape[0] == 0:
            raise ValueError("empty sample ball")
        ys = x + mesh
        fy = np.array([fn(y if y.size > 1 else float(y[0])) for y in ys], dtype=float)
        q = np.maximum(fx - fy, 0.0) / norm(mesh, kind)
        seq.append(float(q.max()))
    return SlopeEstimate(seq[-1], radii, tuple(seq))


def grid_slopes(values, grid, radius, kind="max"):
    """Slope of sampled values at every grid point, using grid neighbors
    within `radius` (0 where no neighbor decreases the value)."""
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    out = np.zeros(grid.shape[0])
    order = np.argsort(grid[:, 0], kind="stable")
    g, v = grid[order], values[order]
    lo = np.searchsorted(g[:, 0], g[:, 0] - radius - 1e-12, side="left")
    hi = np.searchsorted(g[:, 0], g[:, 0] + radius + 1e-12, side="right")
    res = np.zeros(g.shape[0])
    for i in range(g.shape[0]):
        if not math.isfinite(v[i]):
            res[i] = INF
            continue
        nb = slice(lo[i], hi[i])
        d = norm(g[nb] - g[i], kind)
        m = (d > 0) & (d <= radius + 1e-12)
        if m.any():
            drop = np.maximum(v[i] - v[nb][m], 0.0)
            drop = np.where(np.isfinite(drop), drop, 0.0)
            res[i] = float((drop / d[m]).max())
    out[order] = res
    return out


def _nearest_witness(points, mask, center, kind):
    idx = np.flatnonzero(mask)
    d = norm(points[idx] - center, kind)
    best = idx[d <= d.min() + 1e-12]
    return best[lex_smallest(points[best])]


def check_error_bound(fn, xbar, tau, eta, grid, kind="max", tol=1e-9):
    """d(x, S) <= tau [fn(x)]_+ on sampled x in B(xbar, eta / 2), where
    S = {x in grid : fn(x) <= 0}. The witness is the violation nearest xbar."""
    grid = np.asarray(grid, dtype=float)
    grid = grid.reshape(grid.shape[0], -1)
    xbar = np.atleast_1d(np.asarray(xbar, dtype=float))
    vals = np.array([fn(x if x.size > 1 else float(x[0])) for x in grid], dtype=float)
    fbar = fn(xbar if xbar.size > 1 else float(xbar[0]))
    if fbar > 0:
        raise ValueError("xbar is not in the sublevel set")
    S = grid[vals <= 0]
    near = norm(grid - xbar, kind) < eta / 2
    lhs = dists_to_set(grid, S, kind)
    rhs = tau * np.maximum(vals, 0.0)
    bad = near & (lhs > rhs + tol)
    pos = near & (vals > tol)
    ratio = float((lhs[pos] / vals[pos]).max()) if pos.any() else 0.0
    details = {"tau": tau, "eta": eta, "ratio": ratio}
    if bad.any():
        k = _nearest_witness(grid, bad, xbar, kind)
        wit = {"x": grid[k].tolist(), "dist_to_S": float(lhs[k]), "bound": float(rhs[k])}
        return CheckReport("error_bound", FAILS, wit, None, details)
    return CheckReport("error_bound", HOLDS, None, None, details)


def verify_slope_error_bound(fn, xbar, m, gamma, grid, radius=0.5, slope_radius=None,
                             kind="max", mode="gated", tol=1e-9):
    """Slope at least m wherever fn lies in (0, gamma) near xbar gives
    m d(x, S) <= [fn(x)]_+ near xbar.

    Slopes come from grid neighbors within `slope_radius` (default: one and a
    half grid steps, estimated from the grid spacing).
    """
    grid = np.asarray(grid, dtype=float)
    grid = grid.reshape(grid.shape[0], -1)
    xbar = np.atleast_1d(np.asarray(xbar, dtype=float))
    if not m > 0 or not gamma > 0:
        raise ValueError("m and gamma must be positive")
    vals = np.array([fn(x if x.size > 1 else float(x[0])) for x in grid], dtype=float)
    if slope_radius is None:
        slope_radius = 1.5 * _spacing(grid)
    slopes = grid_slopes(vals, grid, slope_radius, kind)
    near = norm(grid - xbar, kind) < radius
    active = near & (vals > 0) & (vals < gamma)
    bad = active & (slopes < m - tol)
    details = {"m": m, "gamma": gamma, "slope_radius": slope_radius,
               "active_points": int(active.sum())}
    if bad.any():
        k = _nearest_witness(grid, bad, xbar, kind)
        prem = CheckReport("slope_lower_bound", FAILS,
                           {"x": grid[k].tolist(), "slope": float(slopes[k])}, None, details)
    else:
        prem = CheckReport("slope_lower_bound", HOLDS, None, None, details)
    claimed = 1.0 / m
    if mode == "gated" and not prem.holds:
        return TheoremReport("slope_error_bound", (prem,), None, claimed, None, mode,
                             details=details)
    concl = check_error_bound(fn, xbar, claimed, 2 * radius, grid, kind, tol)
    return TheoremReport("slope_error_bound", (prem,), concl, claimed, concl.details["ratio"], mode,
                         details=details)


def _spacing(grid):
    col = np.unique(grid[:, 0])
    if col.size < 2:
        return 1.0
    return float(np.min(np.diff(col)))


def phi_EG(G, Q, x, q, z, radii=None, profile=False):
    """liminf over u -> x of d(z, G(u) + q) for q in Q, +inf otherwise.

    The liminf is a minimum over sampled u in shrinking balls; the default
    radii are (2 h, h, 0) with h the grid step of G.
    """
    q = as_point(q, Q.dimension)
    z = as_point(z, G.dim_y)
    x = as_point(x, G.dim_x)
    if radii is None:
        h = G.h_x or 0.0
        radii = (2 * h, h, 0.0)
    radii = tuple(sorted((float(r) for r in radii), reverse=True))
    if not Q.contains(q)[0]:
        vals = tuple(INF for _ in radii)
        return (INF, vals) if profile else INF
    d_dom = norm(G.domain - x, G.norm_x)
    per_point = np.array([float(dists_to_set(z[None, :], snap(im + q), G.norm_y)[0])
                          if im.shape[0] else INF for im in G.images])
    vals = []
    for r in radii:
        m = d_dom <= r + 1e-12
        vals.append(float(per_point[m].min()) if m.any() else INF)
    vals = tuple(vals)
    return (vals[-1], vals) if profile else vals[-1]


def verify_mreg_EF(G, Q, xbar, qbar, zbar, m, gamma, q_grid, cfg=None, mode="gated", tol=1e-9):
    """Slope of (x, q) -> phi_EG((x, q), zbar) at least m where phi lies in
    (0, gamma) gives d((x, q), E_G^-1(zbar)) <= d(zbar, G(x) + q) / m near
    (xbar, qbar) with q in Q."""
    cfg = cfg or NbhdConfig()
    if not m > 0 or not gamma > 0:
        raise ValueError("m and gamma must be positive")
    xbar = as_point(xbar, G.dim_x)
    qbar = as_point(qbar, Q.dimension)
    zbar = as_point(zbar, G.dim_y)
    if not Q.contains(qbar)[0]:
        raise ValueError("qbar is not in Q")
    E = EpigraphicalMap(G, Q).sample(q_grid)
    base = np.concatenate([xbar, qbar])
    if not E.in_graph(base, zbar):
        raise ValueError("zbar is not in G(xbar) + qbar")
    # phi at sampled points (radius 0); closed graphs make this the liminf
    phi = np.array([float(dists_to_set(zbar[None, :], im, E.norm_y)[0]) if im.shape[0] else INF
                    for im in E.images])
    step = min(v for v in (G.h_x, _spacing(np.asarray(q_grid, dtype=float).reshape(
        -1, Q.dimension))) if v)
    slopes = grid_slopes(phi, E.domain, 2 * step + 1e-12, "sum")
    dist_base = norm(E.domain - base, "sum")
    region = dist_base <= cfg.r_U + 1e-12
    active = region & (phi > tol) & (phi < gamma)
    bad = active & (slopes < m - tol)
    details = {"m": m, "gamma": gamma, "active_points": int(active.sum()),
               "domain_metric": "additive"}
    if bad.any():
        k = _nearest_witness(E.domain, bad, base, "sum")
        prem = CheckReport("phi_slope_lower_bound", FAILS,
                           {"xq": E.domain[k].tolist(), "slope": float(slopes[k])}, cfg, details)
    else:
        prem = CheckReport("phi_slope_lower_bound", HOLDS, None, cfg, details)
    claimed = 1.0 / m
    if mode == "gated" and not prem.holds:
        return TheoremReport("mreg_EF", (prem,), None, claimed, None, mode, details=details)
    zero = E.domain[phi <= tol]
    lhs = dists_to_set(E.domain, zero, "sum")
    with np.errstate(invalid="ignore"):
        viol = region & (lhs > claimed * phi + tol)
    usable = region & (phi > tol) & np.isfinite(phi)
    measured = float((lhs[usable] / phi[usable]).max()) if usable.any() else 0.0
    if viol.any():
        k = _nearest_witness(E.domain, viol, base, "sum")
        concl = CheckReport("mreg_E_G", FAILS, {"xq": E.domain[k].tolist(), "lhs": float(lhs[k]),
                                                "rhs": float(claimed * phi[k])}, cfg, {})
    else:
        concl = CheckReport("mreg_E_G", HOLDS, None, cfg, {})
        lpo = check_property(E, base, zbar, "lpo", m, cfg)
        details["lpo_E_G"] = lpo.verdict
    return TheoremReport("mreg_EF", (prem,), concl, claimed, measured, mode, details=details)
