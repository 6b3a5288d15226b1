"""Dense matrix kernels.

A dense matrix is a 2-D, C-contiguous ``float64`` numpy array with at least
one row and one column and only finite entries; :func:`as_dense` enforces
that on the way in.  Products and the SVD go through BLAS/LAPACK; the
Householder QR runs on the compiled kernel when it is built.
"""

from dataclasses import dataclass

import numpy as np

from brp import _backend
from brp.errors import NonFiniteError, ShapeError, SingularMatrixError

DEFAULT_COND_LIMIT = 1e12
SPECTRAL_TOL = 1e-12
SPECTRAL_MAX_ITER = 10_000
_SPECTRAL_SEED = 0x5EC7
_start_cache = {}


def as_dense(a, name="matrix"):
    """Return ``a`` as a finite, C-contiguous 2-D float64 array."""
    out = np.ascontiguousarray(a, dtype=np.float64)
    if out.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {out.shape}")
    if out.shape[0] < 1 or out.shape[1] < 1:
        raise ShapeError(f"{name} must have positive dimensions, got {out.shape[0]}x{out.shape[1]}")
    if not np.isfinite(out).all():
        raise NonFiniteError(f"{name} contains NaN or Inf")
    return out


def _check_finite(a, what):
    if not np.isfinite(a).all():
        raise NonFiniteError(f"{what} produced a non-finite result")
    return a


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD ``a = u @ diag(sigma) @ v.T`` with ``sigma`` descending."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    def reconstruct(self):
        return (self.u * self.sigma) @ self.v.T

    def split(self, r):
        """``(u1, sigma1, v1), (u2, sigma2, v2)``: leading ``r`` triplets and the rest."""
        return ((self.u[:, :r], self.sigma[:r], self.v[:, :r]),
                (self.u[:, r:], self.sigma[r:], self.v[:, r:]))


def matmul(a, b):
    a = as_dense(a, "left operand")
    b = as_dense(b, "right operand")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}")
    return _check_finite(a @ b, "matmul")


def transpose(a):
    return np.ascontiguousarray(as_dense(a).T)


def thin_qr(a):
    """Householder QR ``a = q @ r``; ``r`` upper triangular with diagonal >= 0.

    Rank-deficient input is fine: ``r`` then has zero diagonal entries.
    """
    a = as_dense(a)
    if a.shape[0] < a.shape[1]:
        raise ShapeError(f"thin_qr needs rows >= cols, got {a.shape[0]}x{a.shape[1]}")
    return _backend.householder_qr(a)


def svd_full(a):
    """Thin SVD of ``a`` (rows >= cols) via LAPACK."""
    a = as_dense(a)
    if a.shape[0] < a.shape[1]:
        raise ShapeError(f"svd_full needs rows >= cols, got {a.shape[0]}x{a.shape[1]}; transpose first")
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    return SvdFactors(np.ascontiguousarray(u), s, np.ascontiguousarray(vt.T))


def _svd_any(a):
    if a.shape[0] >= a.shape[1]:
        return svd_full(a)
    f = svd_full(a.T)
    return SvdFactors(f.v, f.sigma, f.u)


def condition_number(m):
    s = _svd_any(as_dense(m)).sigma
    return float("inf") if s[-1] == 0.0 else float(s[0] / s[-1])


def invert_small(m, cond_limit=DEFAULT_COND_LIMIT):
    """Inverse of a small square matrix through its SVD.

    Raises :class:`SingularMatrixError` when ``sigma_max / sigma_min``
    exceeds ``cond_limit``.
    """
    m = as_dense(m)
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"invert_small needs a square matrix, got {m.shape[0]}x{m.shape[1]}")
    f = svd_full(m)
    cond = float("inf") if f.sigma[-1] == 0.0 else float(f.sigma[0] / f.sigma[-1])
    if f.sigma[-1] == 0.0 or not cond <= cond_limit:
        raise SingularMatrixError(
            f"matrix is singular to working precision (condition {cond:.3g} > {cond_limit:.3g})", cond)
    return _check_finite((f.v / f.sigma) @ f.u.T, "invert_small")


def pinv(m, tol=None):
    """Moore-Penrose pseudo-inverse.

    Singular values not above ``tol * sigma_max`` are treated as zero;
    ``tol`` defaults to ``1e-12 * max(rows, cols)``.
    """
    m = as_dense(m)
    if tol is None:
        tol = 1e-12 * max(m.shape)
    f = _svd_any(m)
    cutoff = tol * (f.sigma[0] if f.sigma.size else 0.0)
    keep = f.sigma > cutoff
    inv_s = np.zeros_like(f.sigma)
    inv_s[keep] = 1.0 / f.sigma[keep]
    return np.ascontiguousarray((f.v * inv_s) @ f.u.T)


def _start_vector(n):
    v = _start_cache.get(n)
    if v is None:
        from brp.randgen import gaussian_matrix

        v = gaussian_matrix(n, 1, _SPECTRAL_SEED)[:, 0]
        v = v / np.linalg.norm(v)
        _start_cache[n] = v
    return v


def spectral_norm(a, tol=SPECTRAL_TOL, max_iter=SPECTRAL_MAX_ITER):
    """Largest singular value by power iteration on ``a.T @ a``.

    Stops when the estimate ``||a v||`` changes by at most ``tol`` relative.
    """
    a = as_dense(a)
    if a.shape[0] < a.shape[1]:
        a = a.T
    v = _start_vector(a.shape[1])
    est = 0.0
    for _ in range(max_iter):
        u = a @ v
        new = float(np.linalg.norm(u))
        if new == 0.0 or abs(new - est) <= tol * new:
            return new
        est = new
        w = a.T @ u
        v = w / np.linalg.norm(w)
    return est


def frobenius_norm(a):
    return float(np.linalg.norm(as_dense(a)))


def fractional_power_small(m, root):
    """``U diag(s ** (1/root)) V^T`` for the SVD ``m = U diag(s) V^T``.

    ``root`` must be an odd positive integer; ``root == 1`` returns a copy of
    ``m`` unchanged.  Negative eigen-directions are absorbed into the singular
    vectors rather than producing a real odd root.
    """
    m = as_dense(m)
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"fractional_power_small needs a square matrix, got {m.shape[0]}x{m.shape[1]}")
    if isinstance(root, bool) or int(root) != root or root < 1 or root % 2 == 0:
        raise ValueError(f"root must be an odd positive integer, got {root!r}")
    if root == 1:
        return m.copy()
    f = svd_full(m)
    return np.ascontiguousarray((f.u * f.sigma ** (1.0 / root)) @ f.v.T)
