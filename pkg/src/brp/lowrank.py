"""Low-rank approximation from bilateral random projections.

Given ``X`` (m x n), draw ``A1`` (n x k) and ``A2`` (m x k), form
``Y1 = X A1`` and ``Y2 = X^T A2``, and approximate

    L = Y1 (A2^T Y1)^{-1} Y2^T.

With the correlated scheme ``A2`` is replaced by ``Y1`` and then ``A1`` by
``Y2`` before the final right projection.  The power variant sketches
``(X X^T)^q X`` instead and takes the ``(2q+1)``-th root of the small middle
factor after QR-compressing both sketches.  Sketch width is ``k = r + p``
(target rank plus oversampling), and the returned factors have rank ``k``.

Each product with ``X`` or ``X^T`` squares the conditioning the sketch has
to carry, so the literal formulas lose the small directions in floating
point (badly once ``q > 0`` and the spectrum decays fast).  For the
correlated scheme the pipeline therefore re-orthonormalizes after every pass
(``SketchConfig.stabilize``); this gives the same approximation in exact
arithmetic.  ``stabilize=False`` runs the formulas literally, and
:func:`brp_approximate` always works from a given sketch.
"""

from dataclasses import dataclass

import numpy as np

from brp.errors import ConfigError, ShapeError, SingularMatrixError
from brp.matrix import (
    DEFAULT_COND_LIMIT,
    SvdFactors,
    _check_finite,
    _svd_any,
    as_dense,
    condition_number,
    fractional_power_small,
    frobenius_norm,
    invert_small,
    pinv,
    spectral_norm,
    thin_qr,
)
from brp.randgen import check_seed, derive_seed, gaussian_matrix

SCHEMES = ("independent", "correlated")
STREAM_A1 = 1
STREAM_A2 = 2


@dataclass(frozen=True)
class SketchConfig:
    rank: int
    oversample: int = 0
    power: int = 0
    scheme: str = "correlated"
    seed: int = 0
    pinv_fallback: bool = False
    cond_limit: float = DEFAULT_COND_LIMIT
    stabilize: bool = True

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        for name in ("rank", "oversample", "power"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise ConfigError(f"{name} must be an integer, got {value!r}")
        if self.rank < 1:
            raise ConfigError(f"rank must be >= 1, got {self.rank}")
        if self.oversample < 0:
            raise ConfigError(f"oversample must be >= 0, got {self.oversample}")
        if self.power < 0:
            raise ConfigError(f"power must be >= 0, got {self.power}")
        try:
            check_seed(self.seed)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def width(self):
        return self.rank + self.oversample

    def check_shape(self, shape):
        m, n = shape
        if self.width > min(m, n):
            raise ConfigError(
                f"rank + oversample = {self.width} exceeds min(m, n) = {min(m, n)} for a {m}x{n} matrix")


@dataclass(frozen=True)
class BilateralSketch:
    """Projection matrices and projections; ``a1_draw`` is the Gaussian A1 before any update."""

    a1: np.ndarray
    a2: np.ndarray
    y1: np.ndarray
    y2: np.ndarray
    a1_draw: np.ndarray
    scheme: str = "correlated"

    @property
    def width(self):
        return self.y1.shape[1]


@dataclass(frozen=True)
class LowRankFactors:
    """``L = left @ right`` with ``left`` m x k and ``right`` k x n."""

    left: np.ndarray
    right: np.ndarray

    @property
    def nominal_rank(self):
        return self.left.shape[1]

    @property
    def shape(self):
        return (self.left.shape[0], self.right.shape[1])


def _apply_power(x, a, q):
    """``(X X^T)^q X a`` without forming the power."""
    y = x @ a
    for _ in range(q):
        y = x @ (x.T @ y)
    return _check_finite(y, "power sketch")


def _apply_power_t(x, a, q):
    """``X^T (X X^T)^q a``."""
    y = x.T @ a
    for _ in range(q):
        y = x.T @ (x @ y)
    return _check_finite(y, "power sketch")


def _sketch(x, cfg, q):
    x = as_dense(x, "x")
    cfg.check_shape(x.shape)
    m, n = x.shape
    k = cfg.width
    a1 = gaussian_matrix(n, k, derive_seed(cfg.seed, STREAM_A1))
    draw = a1
    y1 = _apply_power(x, a1, q)
    if cfg.scheme == "independent":
        a2 = gaussian_matrix(m, k, derive_seed(cfg.seed, STREAM_A2))
        y2 = _apply_power_t(x, a2, q)
    else:
        a2 = y1
        y2 = _apply_power_t(x, a2, q)
        a1 = y2
        y1 = _apply_power(x, a1, q)
    return BilateralSketch(a1=a1, a2=a2, y1=y1, y2=y2, a1_draw=draw, scheme=cfg.scheme)


def bilateral_sketch(x, cfg):
    """Sketch ``X`` itself; ``cfg.power`` is ignored (see :func:`power_sketch`)."""
    return _sketch(x, cfg, 0)


def power_sketch(x, cfg):
    """Sketch ``(X X^T)^q X`` by ``2q+1`` alternating passes per projection."""
    return _sketch(x, cfg, cfg.power)


def _middle_inverse(sketch, cond_limit, pinv_fallback):
    m = sketch.a2.T @ sketch.y1
    try:
        return invert_small(m, cond_limit)
    except SingularMatrixError as exc:
        if pinv_fallback:
            return pinv(m, tol=1e-12 * m.shape[0])
        raise SingularMatrixError(
            f"A2^T Y1 is singular (condition {exc.condition:.3g}); "
            "increase oversampling, lower the rank, or enable the pinv fallback",
            exc.condition,
        ) from None


def _full_rank(r):
    s = _svd_any(r).sigma
    return s[-1] > s[0] * max(r.shape) * np.finfo(np.float64).eps


def _factored_closed_form(sketch, cond_limit):
    """``Q1 (Qa^T Q1)^{-1} Ra^{-T} Y2^T`` from ``Y1 = Q1 R1`` and ``A2 = Qa Ra``.

    Equal to the closed form whenever ``Y1`` has full column rank, but the
    inverted factors are conditioned like ``X`` rather than like
    ``A2^T Y1``, whose condition grows with the fourth power of ``X``'s under
    the correlated scheme.  ``A2^T Y1`` is singular when ``k`` exceeds the
    rank of ``X``; that shows up in ``A2 = X A1`` (correlated) or in
    ``Y2 = X^T A2`` (independent), and then ``None`` is returned so the
    caller handles the singular case.
    """
    m, n = sketch.y1.shape[0], sketch.y2.shape[0]
    if min(m, n) < sketch.width:
        return None
    q1, _ = thin_qr(sketch.y1)
    qa, ra = thin_qr(sketch.a2)
    witness = ra if sketch.scheme == "correlated" else thin_qr(sketch.y2)[1]
    if not (_full_rank(ra) and _full_rank(witness)):
        return None
    try:
        core = invert_small(qa.T @ q1, cond_limit) @ invert_small(ra, cond_limit).T
    except SingularMatrixError:
        return None
    right = _check_finite(core @ sketch.y2.T, "brp_approximate")
    return LowRankFactors(left=q1, right=np.ascontiguousarray(right))


def brp_approximate(sketch, cond_limit=DEFAULT_COND_LIMIT, pinv_fallback=False):
    """Factors of ``Y1 (A2^T Y1)^{-1} Y2^T``; no m x n intermediate is formed.

    The inverse is applied through QR factors of ``Y1`` and ``A2``.  When
    those are rank deficient the middle matrix is inverted directly, which
    raises :class:`SingularMatrixError` unless ``pinv_fallback`` is set.
    """
    factored = _factored_closed_form(sketch, cond_limit)
    if factored is not None:
        return factored
    inv = _middle_inverse(sketch, cond_limit, pinv_fallback)
    right = _check_finite(inv @ sketch.y2.T, "brp_approximate")
    return LowRankFactors(left=sketch.y1, right=np.ascontiguousarray(right))


def power_reconstruct(sketch, q, cond_limit=DEFAULT_COND_LIMIT, pinv_fallback=False):
    """Recover ``X``'s approximation from a sketch of ``(X X^T)^q X``.

    ``Q1 [R1 (A2^T Y1)^{-1} R2^T]^{1/(2q+1)} Q2^T``, split as
    ``left = Q1 @ root`` and ``right = Q2^T``.
    """
    q1, r1 = thin_qr(sketch.y1)
    q2, r2 = thin_qr(sketch.y2)
    inv = _middle_inverse(sketch, cond_limit, pinv_fallback)
    middle = r1 @ inv @ r2.T
    root = fractional_power_small(middle, 2 * q + 1)
    left = _check_finite(q1 @ root, "power_approximate")
    return LowRankFactors(left=left, right=np.ascontiguousarray(q2.T))


def _stabilized_power(x, cfg):
    """Correlated scheme computed with orthonormalized passes.

    The correlated sketch satisfies ``L~ = X~ P_S`` with
    ``S = (X^T X)^(2q+1) A1``.  An orthonormal basis ``Z`` of ``range(S)`` is
    built by subspace iteration, then ``X~ Z = Q1 R1`` and
    ``L = Q1 R1^{1/(2q+1)} Z^T``.  For ``q = 0`` this is ``X Z Z^T``.
    """
    x = as_dense(x, "x")
    cfg.check_shape(x.shape)
    q = cfg.power
    draw = gaussian_matrix(x.shape[1], cfg.width, derive_seed(cfg.seed, STREAM_A1))
    z = draw
    for _ in range(2 * q + 1):
        z, rx = thin_qr(_check_finite(x @ z, "power sketch"))
        z, _ = thin_qr(_check_finite(x.T @ z, "power sketch"))
    # X times a basis of range(X^T X ...) is rank deficient exactly when k > rank(X),
    # the case in which the closed form's A2^T Y1 is singular
    if not cfg.pinv_fallback and not _full_rank(rx):
        raise SingularMatrixError(
            f"sketch width {cfg.width} exceeds the numerical rank of X; "
            "increase oversampling, lower the rank, or enable the pinv fallback",
            condition_number(rx),
        )
    q1, r1 = thin_qr(_apply_power(x, z, q))
    root = fractional_power_small(r1, 2 * q + 1)
    factors = LowRankFactors(left=_check_finite(q1 @ root, "power_approximate"),
                             right=np.ascontiguousarray(z.T))
    return factors, draw


def _uses_stabilized(cfg):
    return cfg.scheme == "correlated" and cfg.stabilize


def power_approximate(x, cfg):
    if _uses_stabilized(cfg):
        return _stabilized_power(x, cfg)[0]
    sketch = power_sketch(x, cfg)
    return power_reconstruct(sketch, cfg.power, cfg.cond_limit, cfg.pinv_fallback)


def approximate_with_draw(x, cfg):
    """``(factors, A1 draw)`` for ``X`` under ``cfg``."""
    if _uses_stabilized(cfg):
        return _stabilized_power(x, cfg)
    if cfg.power == 0:
        sketch = bilateral_sketch(x, cfg)
        return brp_approximate(sketch, cfg.cond_limit, cfg.pinv_fallback), sketch.a1_draw
    sketch = power_sketch(x, cfg)
    return power_reconstruct(sketch, cfg.power, cfg.cond_limit, cfg.pinv_fallback), sketch.a1_draw


def approximate(x, cfg):
    return approximate_with_draw(x, cfg)[0]


def materialize(f):
    return f.left @ f.right


def approximation_error(x, f, norm="frobenius", relative=False):
    """``||x - left @ right||`` in the spectral or Frobenius norm."""
    x = as_dense(x, "x")
    if x.shape != f.shape:
        raise ShapeError(f"x is {x.shape[0]}x{x.shape[1]} but the factors are {f.shape[0]}x{f.shape[1]}")
    if norm == "spectral":
        measure = spectral_norm
    elif norm == "frobenius":
        measure = frobenius_norm
    else:
        raise ValueError(f"norm must be 'spectral' or 'frobenius', got {norm!r}")
    err = measure(x - materialize(f))
    if relative:
        scale = measure(x)
        return err / scale if scale > 0.0 else err
    return err


def truncated_svd(x, r):
    """Best rank-``r`` factors ``(U1 diag(s1), V1^T)`` and the full SVD of ``x``."""
    x = as_dense(x, "x")
    if isinstance(r, bool) or int(r) != r or not 1 <= r <= min(x.shape):
        raise ConfigError(f"rank must be in [1, {min(x.shape)}], got {r!r}")
    svd = _svd_any(x)
    left = np.ascontiguousarray(svd.u[:, :r] * svd.sigma[:r])
    right = np.ascontiguousarray(svd.v[:, :r].T)
    return LowRankFactors(left=left, right=right), svd


__all__ = [
    "SketchConfig", "BilateralSketch", "LowRankFactors", "SvdFactors",
    "bilateral_sketch", "power_sketch", "brp_approximate", "power_reconstruct",
    "power_approximate", "approximate", "approximate_with_draw", "materialize", "approximation_error", "truncated_svd",
]
