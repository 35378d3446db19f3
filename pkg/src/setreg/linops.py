"""Regularity moduli of matrices.

Euclidean norms throughout unless a function says otherwise. Singular values
come from a one-sided Jacobi iteration written here; numpy supplies array
algebra and the QR / least-squares solves that place preimages.
"""

from dataclasses import dataclass
import itertools
import math

import numpy as np

from .regmoduli import NbhdConfig, estimate_modulus, check_property
from .setcore import INF, FiniteMultifunction, invert, jsonable, snap

JACOBI_TOL = 1e-15
# after unit scaling, smaller inner products are below resolution
TINY = 1e-290
MAX_SWEEPS = 60


def as_matrix(A):
    A = np.array(A, dtype=float)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    if A.ndim != 2 or 0 in A.shape:
        raise ValueError("a matrix must be a nonempty 2-D array")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix entries must be finite")
    return A


def singular_values(A):
    """Singular values in decreasing order (min(m, n) of them).

    One-sided Jacobi: plane rotations orthogonalize the columns of the tall
    orientation of A; the column norms are then the singular values.
    """
    A = as_matrix(A)
    # unit scale keeps the squared column norms away from under/overflow
    scale = float(np.max(np.abs(A)))
    if scale == 0.0:
        return np.zeros(min(A.shape))
    W = (A.T if A.shape[0] < A.shape[1] else A) / scale
    n = W.shape[1]
    for _ in range(MAX_SWEEPS):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = W[:, p] @ W[:, p]
                beta = W[:, q] @ W[:, q]
                gamma = W[:, p] @ W[:, q]
                if abs(gamma) <= max(JACOBI_TOL * math.sqrt(alpha * beta), TINY):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.hypot(1.0, zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                wp = W[:, p].copy()
                W[:, p] = c * wp - s * W[:, q]
                W[:, q] = s * wp + c * W[:, q]
        if not rotated:
            break
    return scale * np.sort(np.sqrt((W * W).sum(axis=0)))[::-1]


def numerical_rank(sigma, shape):
    if sigma.size == 0 or sigma[0] == 0.0:
        return 0
    cutoff = max(shape) * np.finfo(float).eps * sigma[0] * 16
    return int(np.count_nonzero(sigma > cutoff))


def subreg_modulus(A):
    """1 / (smallest nonzero singular value); 0 for the zero matrix."""
    A = as_matrix(A)
    sigma = singular_values(A)
    r = numerical_rank(sigma, A.shape)
    if r == 0:
        return 0.0
    with np.errstate(over="ignore"):
        return float(1.0 / sigma[r - 1])


def is_surjective(A):
    A = as_matrix(A)
    return numerical_rank(singular_values(A), A.shape) == A.shape[0]


def truncated_T(k):
    """diag(1, 1/2, ..., 1/k): the first k coordinates of x_n -> x_n / n."""
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    return np.diag(1.0 / np.arange(1, int(k) + 1))


def mixed_norm(A):
    """Operator norm from the max-norm on the domain to the Euclidean norm.

    The supremum of a convex function over the unit cube is attained at a
    vertex; diagonal matrices have the closed form sqrt(sum d_i^2).
    """
    A = as_matrix(A)
    if A.shape[0] == A.shape[1] and np.count_nonzero(A - np.diag(np.diag(A))) == 0:
        return float(np.sqrt(np.sum(np.diag(A) ** 2)))
    n = A.shape[1]
    if n > 16:
        raise ValueError("vertex enumeration is limited to 16 columns")
    best = 0.0
    for signs in itertools.product((-1.0, 1.0), repeat=n):
        best = max(best, float(np.linalg.norm(A @ np.array(signs))))
    return best


def required_L(A, x):
    """Smallest L with ||x||_inf <= L ||A x||_2 at the given vector."""
    x = np.asarray(x, dtype=float)
    img = float(np.linalg.norm(as_matrix(A) @ x))
    top = float(np.max(np.abs(x)))
    if img == 0.0:
        return INF if top > 0 else 0.0
    return top / img


def _range_basis(A):
    """Orthonormal bases of the row space and the kernel, from QR of A^T."""
    m, n = A.shape
    Q, R = np.linalg.qr(A.T, mode="complete")
    diag = np.abs(np.diag(R)) if R.size else np.empty(0)
    scale = diag.max() if diag.size else 0.0
    rank = int(np.count_nonzero(diag > max(m, n) * 1e-12 * max(scale, 1.0)))
    row_space = Q[:, :rank]
    kernel = Q[:, rank:]
    return row_space, kernel


def sample_linear(A, h=0.05, radius=8, kernel_offsets=True):
    """Finite subset of the graph of A.

    Targets are the codomain lattice points of step h within `radius` steps
    of 0. Each reachable target y gets the least-norm preimage plus optional
    offsets of +-h along a kernel basis; unreachable lattice points stay in
    the codomain universe with empty preimage.
    """
    A = as_matrix(A)
    m, n = A.shape
    k = np.arange(-radius, radius + 1)
    mesh = np.stack([g.ravel() for g in np.meshgrid(*([k] * m), indexing="ij")], axis=1)
    lat = mesh[np.sqrt((mesh ** 2).sum(axis=1)) <= radius + 1e-9]
    ys = snap(lat * h)
    row_space, kernel = _range_basis(A)
    B = A @ row_space
    offsets = [np.zeros(n)]
    if kernel_offsets:
        for j in range(kernel.shape[1]):
            offsets += [h * kernel[:, j], -h * kernel[:, j]]
    coef, *_ = np.linalg.lstsq(B, ys.T, rcond=None)
    x0 = (row_space @ coef).T
    reach = np.linalg.norm(x0 @ A.T - ys, axis=1) <= 1e-9
    x0, targets = x0[reach], ys[reach]
    domain = (x0[:, None, :] + np.array(offsets)[None, :, :]).reshape(-1, n)
    images = np.repeat(targets, len(offsets), axis=0)[:, None, :]
    return FiniteMultifunction(domain, images, codomain=ys, h_x=h, h_y=h,
                               norm_x="euclid", norm_y="euclid")


def default_radius(m):
    # keeps the codomain sample near 3000 points
    return {1: 8, 2: 8, 3: 8, 4: 5}.get(m, 3)


@dataclass(frozen=True)
class ChainReport:
    surjective: bool
    sigma_min: float
    subreg_value: float
    chain_values: dict
    sampled_reg_estimate: float
    max_discrepancy: float
    reg_check: object = None
    norm: str = "euclid"

    def to_dict(self):
        return jsonable({"surjective": self.surjective, "sigma_min": self.sigma_min,
                         "subreg_value": self.subreg_value, "chain_values": self.chain_values,
                         "sampled_reg_estimate": self.sampled_reg_estimate,
                         "max_discrepancy": self.max_discrepancy, "norm": self.norm,
                         "reg_check": None if self.reg_check is None else self.reg_check.to_dict()})


def verify_chain(A, h=0.05, radius=None, reg_radius=None):
    """Compare the closed-form moduli of A with sampled estimates.

    For surjective A every member of the chain should equal 1 / sigma_min.
    Otherwise only the subregularity branch is estimated and the metric
    regularity check is reported (it is expected to fail).
    """
    A = as_matrix(A)
    if radius is None:
        radius = default_radius(A.shape[0])
    if reg_radius is None:
        reg_radius = 3 if A.shape[0] < 4 else 2
    sigma = singular_values(A)
    surj = numerical_rank(sigma, A.shape) == A.shape[0]
    sub = subreg_modulus(A)
    F = sample_linear(A, h, radius)
    zx, zy = np.zeros(A.shape[1]), np.zeros(A.shape[0])
    wide = NbhdConfig(r_U=radius * h * 2, r_V=radius * h, r_W=radius * h, eps=radius * h)
    # reg is quadratic in the sample size, so it gets its own small sample
    F_near = sample_linear(A, h, reg_radius)
    near = NbhdConfig(r_U=INF, r_V=reg_radius * h * 1.001,
                      r_W=reg_radius * h, eps=reg_radius * h * 1.01)
    sub_est = estimate_modulus(F, zx, zy, "subreg", wide).value
    values = {"subreg_formula": sub, "subreg_sampled": sub_est}
    if surj:
        target = 1.0 / float(sigma[-1])
        reg_est = estimate_modulus(F_near, zx, zy, "reg", near).value
        clm_inv = estimate_modulus(invert(F), zy, zx, "clm", wide.swapped()).value
        values.update(inverse_sigma_min=target, reg_sampled=reg_est, clm_inverse_sampled=clm_inv)
        disc = max(abs(v - target) / target for v in values.values())
        return ChainReport(True, float(sigma[-1]), sub, values, reg_est, disc)
    reg_check = check_property(F_near, zx, zy, "reg", max(sub, 1.0) * 10, near)
    disc = abs(sub_est - sub) / sub if sub > 0 else abs(sub_est)
    smin = float(sigma[-1]) if sigma.size else 0.0
    return ChainReport(False, smin, sub, values, INF, disc, reg_check)
