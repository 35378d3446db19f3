"""Metric primitives and sampled set-valued maps.

A set-valued map is stored as a finite relation: a domain grid, one finite
image set per grid point, and a codomain universe used whenever a property
quantifies over target points that need not be attained.
"""

from dataclasses import dataclass
from functools import cached_property
import math

import numpy as np
from scipy.spatial import cKDTree

INF = math.inf
NORM_KINDS = ("max", "sum", "euclid")
SNAP_DECIMALS = 12
KDTREE_MIN_PAIRS = 4_000_000
KDTREE_P = {"max": np.inf, "sum": 1, "euclid": 2}


def snap(values):
    # Lattice nodes are rounded so that equal nodes compare equal bitwise.
    return np.round(np.asarray(values, dtype=float), SNAP_DECIMALS) + 0.0


def unique_rows(a):
    """Sorted distinct rows; same order as np.unique(a, axis=0) but much
    faster, and -0.0 is merged with 0.0."""
    a = np.asarray(a, dtype=float)
    if a.shape[0] <= 1:
        return a.copy()
    if a.shape[1] == 1:
        return np.unique(a[:, 0]).reshape(-1, 1)
    s = a[np.lexsort(a.T[::-1])]
    keep = np.ones(s.shape[0], dtype=bool)
    keep[1:] = np.any(s[1:] != s[:-1], axis=1)
    return s[keep]


def check_norm(kind):
    if kind not in NORM_KINDS:
        raise ValueError(f"unknown norm {kind!r}, expected one of {NORM_KINDS}")
    return kind


def norm(v, kind="max"):
    """Norm along the last axis."""
    v = np.abs(np.asarray(v, dtype=float))
    if kind == "max":
        return v.max(axis=-1)
    if kind == "sum":
        return v.sum(axis=-1)
    if kind == "euclid":
        return np.sqrt(np.einsum("...i,...i->...", v, v))
    raise ValueError(f"unknown norm {kind!r}")


def product_dist(*parts):
    """Distance on a product space: component distances are added."""
    return sum(parts)


def as_point(x, dim=None):
    p = np.atleast_1d(np.asarray(x, dtype=float))
    if p.ndim != 1:
        raise ValueError("a point must be a flat coordinate vector")
    if not np.all(np.isfinite(p)):
        raise ValueError("point coordinates must be finite")
    if dim is not None and p.shape[0] != dim:
        raise ValueError(f"dimension mismatch: got {p.shape[0]}, expected {dim}")
    return p


def as_set(points, dim=None):
    """Finite point set as a duplicate-free (k, d) array."""
    a = np.asarray(points, dtype=float)
    if a.size == 0:
        if dim is None:
            dim = a.shape[-1] if a.ndim == 2 else 1
        return np.empty((0, dim))
    if a.ndim == 1:
        a = a.reshape(-1, 1) if dim in (None, 1) else a.reshape(1, -1)
    if a.ndim != 2:
        raise ValueError("a point set must be a 2-D array of points")
    if dim is not None and a.shape[1] != dim:
        raise ValueError(f"dimension mismatch: got {a.shape[1]}, expected {dim}")
    if not np.all(np.isfinite(a)):
        raise ValueError("point coordinates must be finite")
    if a.shape[0] == 1:
        return a.copy()
    return unique_rows(a)


def dists_to_set(X, A, kind="max"):
    """d(x, A) for every row x of X; +inf where A is empty."""
    X = np.asarray(X, dtype=float)
    A = np.asarray(A, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if A.size == 0:
        return np.full(X.shape[0], INF)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    if X.shape[1] != A.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {A.shape[1]}")
    if X.shape[0] * A.shape[0] > KDTREE_MIN_PAIRS:
        # exact nearest-neighbor query; same metric as the brute-force path
        d, _ = cKDTree(A).query(X, k=1, p=KDTREE_P[check_norm(kind)])
        return d
    out = np.empty(X.shape[0])
    step = max(1, 2_000_000 // max(1, A.shape[0]))
    for s in range(0, X.shape[0], step):
        block = X[s:s + step, None, :] - A[None, :, :]
        out[s:s + step] = norm(block, kind).min(axis=1)
    return out


def _as_rows(A, dim):
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return np.empty((0, dim))
    if A.ndim == 1:
        A = A.reshape(-1, dim) if dim == 1 or A.shape[0] != dim else A.reshape(1, dim)
    if A.ndim != 2 or A.shape[1] != dim:
        raise ValueError(f"dimension mismatch: expected {dim} coordinates")
    return A


def dist_point_set(x, A, kind="max"):
    """d(x, A) = inf over a in A of d(x, a), with d(x, empty) = +inf."""
    x = as_point(x)
    A = _as_rows(A, x.shape[0])
    if A.shape[0] == 0:
        return INF
    return float(norm(A - x, kind).min())


def excess(A, B, kind="max"):
    """e(A, B) = sup over a in A of d(a, B).

    The excess of the empty set is 0; a nonempty set has infinite excess
    over the empty set. One-dimensional arrays are read as lists of scalars.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    B = _as_rows(B, A.shape[1])
    if A.shape[0] == 0:
        return 0.0
    if B.shape[0] == 0:
        return INF
    return float(dists_to_set(A, B, kind).max())


def scaled(L, d):
    """L * d with 0 * inf read as 0."""
    if L == 0:
        return 0.0 * np.where(np.isinf(d), 0.0, d)
    return L * d


@dataclass(frozen=True)
class Window:
    """Axis-aligned truncation box for unbounded images."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        if len(lo) != len(hi):
            raise ValueError("window bounds differ in dimension")
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError("degenerate window: lo > hi")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return len(self.lo)

    def lattice(self, h):
        axes = [_axis_nodes(a, b, h) for a, b in zip(self.lo, self.hi)]
        return _product(axes)

    def contains(self, points):
        points = np.asarray(points, dtype=float).reshape(-1, self.dim)
        return np.all((points >= np.array(self.lo)) & (points <= np.array(self.hi)), axis=1)

    def to_dict(self):
        return {"lo": list(self.lo), "hi": list(self.hi)}


def _axis_nodes(start, end, h, include_end=True):
    if end < start:
        return np.empty(0)
    k = int(math.floor((end - start) / h + 1e-9))
    nodes = start + h * np.arange(k + 1)
    if include_end:
        nodes = np.append(nodes, end)
    return np.unique(snap(nodes))


def _product(axes):
    if any(a.size == 0 for a in axes):
        return np.empty((0, len(axes)))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def lattice(lo, hi, h):
    """Grid nodes lo + k*h up to hi, with hi itself included."""
    return Window(lo, hi).lattice(h)


# Set descriptions returned by image oracles.

@dataclass(frozen=True)
class Singleton:
    point: tuple

    def __post_init__(self):
        object.__setattr__(self, "point", tuple(float(v) for v in np.atleast_1d(self.point)))


@dataclass(frozen=True)
class Box:
    """Closed box; infinite bounds are cut by the sampling window."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in np.atleast_1d(self.lo)))
        object.__setattr__(self, "hi", tuple(float(v) for v in np.atleast_1d(self.hi)))


@dataclass(frozen=True)
class Interval:
    """One-dimensional interval with explicit open-endpoint markers."""

    lo: float
    hi: float
    lo_open: bool = False
    hi_open: bool = False


@dataclass(frozen=True)
class PointList:
    points: tuple

    def __post_init__(self):
        pts = as_set(self.points) if len(self.points) else np.empty((0, 1))
        object.__setattr__(self, "points", tuple(tuple(p) for p in pts))


def discretize(pieces, window, h):
    """Finite sample of a union of pieces inside a window at step h."""
    if h <= 0:
        raise ValueError("sampling step must be positive")
    dim = window.dim
    lo_w, hi_w = np.array(window.lo), np.array(window.hi)
    chunks = []
    for piece in pieces:
        if isinstance(piece, Singleton):
            p = np.array(piece.point).reshape(1, -1)
            chunks.append(p[window.contains(p)])
        elif isinstance(piece, PointList):
            if piece.points:
                p = np.array(piece.points).reshape(-1, dim)
                chunks.append(p[window.contains(p)])
        elif isinstance(piece, Box):
            lo = np.maximum(np.array(piece.lo), lo_w)
            hi = np.minimum(np.array(piece.hi), hi_w)
            if np.any(lo > hi):
                continue
            chunks.append(_product([_axis_nodes(a, b, h) for a, b in zip(lo, hi)]))
        elif isinstance(piece, Interval):
            if dim != 1:
                raise ValueError("intervals are one-dimensional")
            start = piece.lo + h if piece.lo_open else piece.lo
            end = piece.hi - h if piece.hi_open else piece.hi
            start, end = max(start, lo_w[0]), min(end, hi_w[0])
            if start <= end:
                chunks.append(_axis_nodes(start, end, h).reshape(-1, 1))
        else:
            raise TypeError(f"unsupported set piece {piece!r}")
    if not chunks:
        return np.empty((0, dim))
    return unique_rows(snap(np.concatenate(chunks, axis=0)))


class FiniteMultifunction:
    """A sampled relation F : X => Y.

    Parameters
    ----------
    domain : (n, dx) array of grid points, no duplicates.
    images : sequence of n point sets in Y (possibly empty).
    codomain : optional extra target points; the universe of Y is this set
        joined with the attained values and, when `window` and `h_y` are both
        given and `codomain` is not, the window lattice.
    """

    def __init__(self, domain, images, codomain=None, h_x=None, h_y=None,
                 window=None, norm_x="max", norm_y="max", _clean=False):
        dom = np.asarray(domain, dtype=float)
        if dom.ndim == 1:
            dom = dom.reshape(-1, 1)
        if dom.shape[0] == 0:
            raise ValueError("domain grid must be nonempty")
        if not np.all(np.isfinite(dom)):
            raise ValueError("domain coordinates must be finite")
        if unique_rows(dom).shape[0] != dom.shape[0]:
            raise ValueError("domain grid contains duplicate points")
        images = list(images)
        if len(images) != dom.shape[0]:
            raise ValueError("one image set is required per domain point")
        dy = None
        for im in images:
            a = np.asarray(im, dtype=float)
            if a.size:
                dy = a.shape[1] if a.ndim == 2 else (1 if a.ndim == 1 else None)
                break
        if dy is None:
            if codomain is not None and np.asarray(codomain).size:
                c = np.asarray(codomain, dtype=float)
                dy = c.shape[1] if c.ndim == 2 else 1
            elif window is not None:
                dy = window.dim
            else:
                dy = 1
        self.domain = dom
        self.images = tuple(images) if _clean else tuple(as_set(im, dy) for im in images)
        self.dim_x = dom.shape[1]
        self.dim_y = dy
        self.h_x = h_x
        self.h_y = h_y
        self.window = window
        self.norm_x = check_norm(norm_x)
        self.norm_y = check_norm(norm_y)
        self._codomain = None if codomain is None else as_set(codomain, dy)
        for arr in (self.domain,) + self.images:
            arr.setflags(write=False)

    @classmethod
    def from_graph(cls, domain, owners, values, **kw):
        """Build from graph rows: values[k] belongs to domain[owners[k]]."""
        dom = np.asarray(domain, dtype=float)
        if dom.ndim == 1:
            dom = dom.reshape(-1, 1)
        vals = snap(np.asarray(values, dtype=float))
        if vals.ndim == 1:
            vals = vals.reshape(-1, 1)
        if not np.all(np.isfinite(vals)):
            raise ValueError("point coordinates must be finite")
        owners = np.asarray(owners, dtype=int)
        rows = unique_rows(np.hstack([owners[:, None].astype(float), vals]))
        own = rows[:, 0].astype(int)
        cuts = np.searchsorted(own, np.arange(1, dom.shape[0]))
        images = np.split(rows[:, 1:], cuts)
        return cls(dom, images, _clean=True, **kw)

    def __len__(self):
        return self.domain.shape[0]

    def __repr__(self):
        return (f"FiniteMultifunction(n={len(self)}, dim_x={self.dim_x}, "
                f"dim_y={self.dim_y}, graph={self.graph_y.shape[0]})")

    @cached_property
    def owners(self):
        """Domain index of every graph row."""
        return np.repeat(np.arange(len(self)), [im.shape[0] for im in self.images])

    @cached_property
    def graph_y(self):
        if not any(im.size for im in self.images):
            return np.empty((0, self.dim_y))
        return np.concatenate(self.images, axis=0)

    @property
    def graph_x(self):
        return self.domain[self.owners]

    def graph(self):
        return self.graph_x, self.graph_y

    @cached_property
    def codomain(self):
        parts = [self.graph_y]
        if self._codomain is not None:
            parts.append(self._codomain)
        elif self.window is not None and self.h_y is not None:
            parts.append(self.window.lattice(self.h_y))
        return as_set(np.concatenate(parts, axis=0), self.dim_y)

    @cached_property
    def _index(self):
        return {tuple(p): i for i, p in enumerate(self.domain)}

    def index(self, x):
        key = tuple(as_point(x, self.dim_x))
        if key not in self._index:
            raise KeyError(f"{key} is not a domain grid point")
        return self._index[key]

    def image(self, x):
        return self.images[self.index(x)]

    @cached_property
    def _preimage_index(self):
        table = {}
        for row, (i, y) in enumerate(zip(self.owners, self.graph_y)):
            table.setdefault(tuple(y), []).append(i)
        return table

    def preimage(self, y):
        idx = self._preimage_index.get(tuple(as_point(y, self.dim_y)), [])
        return self.domain[np.array(idx, dtype=int)] if idx else np.empty((0, self.dim_x))

    def dom_mask(self):
        return np.array([im.shape[0] > 0 for im in self.images])

    def in_graph(self, x, y):
        try:
            im = self.image(x)
        except KeyError:
            return False
        y = as_point(y, self.dim_y)
        return bool(np.any(np.all(im == y, axis=1)))

    def dist_x(self, X, A):
        return dists_to_set(X, A, self.norm_x)

    def dist_y(self, Y, B):
        return dists_to_set(Y, B, self.norm_y)

    def graph_set(self):
        """Graph as a Python set of (x, y) coordinate tuples."""
        return {(tuple(x), tuple(y)) for x, y in zip(self.graph_x, self.graph_y)}

    def inverse(self):
        return invert(self)

    def to_dict(self):
        out = {
            "domain": self.domain.tolist(),
            "images": [im.tolist() for im in self.images],
            "window": None if self.window is None else self.window.to_dict(),
            "h_x": self.h_x,
            "h_y": self.h_y,
            "norm": self.norm_x if self.norm_x == self.norm_y else {"x": self.norm_x, "y": self.norm_y},
        }
        if self._codomain is not None:
            out["codomain"] = self._codomain.tolist()
        return out

    @classmethod
    def from_dict(cls, data):
        for key in ("domain", "images"):
            if key not in data:
                raise ValueError(f"missing key {key!r}")
        norm_spec = data.get("norm", "max")
        if isinstance(norm_spec, dict):
            nx, ny = norm_spec.get("x", "max"), norm_spec.get("y", "max")
        else:
            nx = ny = norm_spec
        win = data.get("window")
        window = None if win is None else Window(win["lo"], win["hi"])
        dom = np.asarray(data["domain"], dtype=float)
        dom = dom.reshape(-1, 1) if dom.ndim == 1 else dom
        images = []
        for im in data["images"]:
            a = np.asarray(im, dtype=float)
            images.append(a.reshape(-1, 1) if a.ndim == 1 else a)
        return cls(dom, images, codomain=data.get("codomain"), h_x=data.get("h_x"),
                   h_y=data.get("h_y"), window=window, norm_x=nx, norm_y=ny)


def sample_multifunction(oracle, grid, window, h_y, h_x=None, norm_x="max", norm_y="max",
                         codomain=None):
    """Turn an image oracle into a finite relation.

    Each image description is cut by `window` and sampled at step `h_y`.
    Closed endpoints are kept; an open endpoint is replaced by the node at
    distance `h_y` inside the interval.
    """
    if h_y <= 0:
        raise ValueError("h_y must be positive")
    if not isinstance(window, Window):
        window = Window(*window)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim == 1:
        grid = grid.reshape(-1, 1)
    if grid.shape[0] == 0:
        raise ValueError("grid must be nonempty")
    grid = snap(grid)
    images = []
    for x in grid:
        arg = float(x[0]) if grid.shape[1] == 1 else x.copy()
        images.append(discretize(oracle(arg), window, h_y))
    return FiniteMultifunction(grid, images, codomain=codomain, h_x=h_x, h_y=h_y,
                               window=window, norm_x=norm_x, norm_y=norm_y)


def invert(F):
    """F^{-1}: the transposed relation.

    The inverse lives on the codomain universe of F and takes the domain grid
    of F as its own universe, so inverting twice restores F.
    """
    univ = F.codomain
    if univ.shape[0] == 0:
        raise ValueError("cannot invert: empty graph and no declared codomain")
    table = F._preimage_index
    images = []
    for y in univ:
        idx = table.get(tuple(y), [])
        images.append(F.domain[np.array(idx, dtype=int)] if idx else np.empty((0, F.dim_x)))
    lo, hi = F.domain.min(axis=0), F.domain.max(axis=0)
    return FiniteMultifunction(univ, images, codomain=F.domain, h_x=F.h_y, h_y=F.h_x,
                               window=Window(lo, hi), norm_x=F.norm_y, norm_y=F.norm_x)


class ParametricMultifunction:
    """A sampled relation H : X x P => Y on a product grid.

    `images[i][j]` is the sampled value H(x_grid[i], p_grid[j]). The slices
    H_p = H(., p) and H_x = H(x, .) are FiniteMultifunction instances.
    """

    def __init__(self, x_grid, p_grid, images, codomain=None, h_x=None, h_p=None,
                 h_y=None, window=None, norm_x="max", norm_p="max", norm_y="max", _clean=False):
        self.x_grid = _grid(x_grid)
        self.p_grid = _grid(p_grid)
        nx, npar = self.x_grid.shape[0], self.p_grid.shape[0]
        rows = list(images)
        if len(rows) != nx or any(len(r) != npar for r in rows):
            raise ValueError("images must be a nested list of shape (len(x_grid), len(p_grid))")
        dy = None
        for r in rows:
            for im in r:
                a = np.asarray(im, dtype=float)
                if a.size:
                    dy = a.shape[1] if a.ndim == 2 else 1
                    break
            if dy is not None:
                break
        if dy is None:
            dy = window.dim if window is not None else 1
        self.dim_y = dy
        self.images = [list(r) for r in rows] if _clean else \
            [[as_set(im, dy) for im in r] for r in rows]
        self.h_x, self.h_p, self.h_y = h_x, h_p, h_y
        self.window = window
        self.norm_x = check_norm(norm_x)
        self.norm_p = check_norm(norm_p)
        self.norm_y = check_norm(norm_y)
        self._codomain = None if codomain is None else as_set(codomain, dy)

    @classmethod
    def from_oracle(cls, oracle, x_grid, p_grid, window, h_y, **kw):
        """Sample H(x, p) = oracle(x, p) on the product grid."""
        if not isinstance(window, Window):
            window = Window(*window)
        xg, pg = snap(_grid(x_grid)), snap(_grid(p_grid))
        unpack = lambda g, v: float(v[0]) if g.shape[1] == 1 else v.copy()
        images = [[discretize(oracle(unpack(xg, x), unpack(pg, p)), window, h_y) for p in pg]
                  for x in xg]
        return cls(xg, pg, images, h_y=h_y, window=window, **kw)

    @property
    def dim_x(self):
        return self.x_grid.shape[1]

    @property
    def dim_p(self):
        return self.p_grid.shape[1]

    @cached_property
    def codomain(self):
        parts = [im for r in self.images for im in r if im.size]
        if self._codomain is not None:
            parts.append(self._codomain)
        elif self.window is not None and self.h_y is not None:
            parts.append(self.window.lattice(self.h_y))
        if not parts:
            return np.empty((0, self.dim_y))
        return as_set(np.concatenate(parts, axis=0), self.dim_y)

    @cached_property
    def _x_index(self):
        return {tuple(x): i for i, x in enumerate(self.x_grid)}

    @cached_property
    def _p_index(self):
        return {tuple(p): j for j, p in enumerate(self.p_grid)}

    def x_index(self, x):
        key = tuple(as_point(x, self.dim_x))
        if key not in self._x_index:
            raise KeyError(f"{key} is not an x grid point")
        return self._x_index[key]

    def p_index(self, p):
        key = tuple(as_point(p, self.dim_p))
        if key not in self._p_index:
            raise KeyError(f"{key} is not a p grid point")
        return self._p_index[key]

    def image(self, x, p):
        return self.images[self.x_index(x)][self.p_index(p)]

    # A slice's universe is what it attains plus the declared codomain (or
    # the window lattice); values attained only by other slices are left out.

    def slice_p_at(self, j):
        """H_p for p = p_grid[j], as a map on the x grid."""
        return FiniteMultifunction(self.x_grid, [r[j] for r in self.images],
                                   codomain=self._codomain, h_x=self.h_x, h_y=self.h_y,
                                   window=self.window, norm_x=self.norm_x, norm_y=self.norm_y,
                                   _clean=True)

    def slice_x_at(self, i):
        """H_x for x = x_grid[i], as a map on the p grid."""
        return FiniteMultifunction(self.p_grid, self.images[i], codomain=self._codomain,
                                   h_x=self.h_p, h_y=self.h_y, window=self.window,
                                   norm_x=self.norm_p, norm_y=self.norm_y, _clean=True)

    def slice_p(self, p):
        return self.slice_p_at(self.p_index(p))

    def slice_x(self, x):
        return self.slice_x_at(self.x_index(x))

    def swapped(self):
        """The same relation read as a map on P x X."""
        images = [[self.images[i][j] for i in range(self.x_grid.shape[0])]
                  for j in range(self.p_grid.shape[0])]
        return ParametricMultifunction(self.p_grid, self.x_grid, images,
                                       codomain=self._codomain, h_x=self.h_p, h_p=self.h_x,
                                       h_y=self.h_y, window=self.window, norm_x=self.norm_p,
                                       norm_p=self.norm_x, norm_y=self.norm_y, _clean=True)

    def to_dict(self):
        out = {
            "x_grid": self.x_grid.tolist(),
            "p_grid": self.p_grid.tolist(),
            "images": [[im.tolist() for im in r] for r in self.images],
            "window": None if self.window is None else self.window.to_dict(),
            "h_x": self.h_x,
            "h_p": self.h_p,
            "h_y": self.h_y,
            "norm": {"x": self.norm_x, "p": self.norm_p, "y": self.norm_y},
        }
        if self._codomain is not None:
            out["codomain"] = self._codomain.tolist()
        return out

    @classmethod
    def from_dict(cls, data):
        for key in ("x_grid", "p_grid", "images"):
            if key not in data:
                raise ValueError(f"missing key {key!r}")
        norm_spec = data.get("norm", "max")
        if isinstance(norm_spec, dict):
            nx, npar, ny = (norm_spec.get(k, "max") for k in ("x", "p", "y"))
        else:
            nx = npar = ny = norm_spec
        images = []
        for r in data["images"]:
            row = []
            for im in r:
                a = np.asarray(im, dtype=float)
                row.append(a.reshape(-1, 1) if a.ndim == 1 else a)
            images.append(row)
        win = data.get("window")
        window = None if win is None else Window(win["lo"], win["hi"])
        return cls(data["x_grid"], data["p_grid"], images, codomain=data.get("codomain"),
                   h_x=data.get("h_x"), h_p=data.get("h_p"), h_y=data.get("h_y"),
                   window=window, norm_x=nx, norm_p=npar, norm_y=ny)


def _grid(g):
    g = np.asarray(g, dtype=float)
    if g.ndim == 1:
        g = g.reshape(-1, 1)
    if g.shape[0] == 0:
        raise ValueError("grid must be nonempty")
    if unique_rows(g).shape[0] != g.shape[0]:
        raise ValueError("grid contains duplicate points")
    return g


def jsonable(obj):
    """Plain JSON-ready structure; infinities become the string "+inf"."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "+inf" if v > 0 else "-inf"
        return v
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    return obj
