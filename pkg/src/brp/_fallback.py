"""Pure numpy implementations of the hot kernels.

Used when the compiled ``brp._kernels`` extension is unavailable (or when
``BRP_PURE_PYTHON`` is set).  The Gaussian generator here is the reference
definition; the compiled kernel performs the same IEEE operations in the same
order and must agree bit for bit.

Generator definition
--------------------
* SplitMix64 in counter mode: draw ``i`` (0-based) is
  ``mix(seed + (i + 1) * GAMMA mod 2**64)`` where ``mix`` is the SplitMix64
  finalizer with multipliers ``MIX1`` and ``MIX2`` and shifts 30, 27, 31.
* Normal pair ``j`` consumes draws ``2j`` and ``2j + 1``:
  ``u1 = ((d >> 11) + 1) * 2**-53`` in (0, 1], ``u2 = (d >> 11) * 2**-53`` in
  [0, 1); ``z0 = R cos(2 pi u2)``, ``z1 = R sin(2 pi u2)``,
  ``R = sqrt(-2 log u1)``.  Both outputs are used, in order.
* ``log``, ``cos`` and ``sin`` are evaluated with the fixed polynomials below
  (only +, -, *, /, sqrt and frexp), so results do not depend on the platform
  libm.
"""

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB

TWO_M53 = 2.0 ** -53
LN2 = 0.6931471805599453
SQRT_HALF = 0.7071067811865476
HALF_PI = 1.5707963267948966

# atanh series: log(m) = 2 s sum_k s^(2k) / (2k + 1)
LOG_COEFFS = tuple(1.0 / (2 * k + 1) for k in range(12))
# Taylor coefficients on [0, pi/2): sin x = x sum (-1)^k x^2k/(2k+1)!,
# cos x = sum (-1)^k x^2k/(2k)!
SIN_COEFFS = tuple((-1.0) ** k / float(np.prod(np.arange(1, 2 * k + 2, dtype=np.float64))) for k in range(13))
COS_COEFFS = tuple((-1.0) ** k / float(np.prod(np.arange(1, 2 * k + 1, dtype=np.float64))) for k in range(14))


def splitmix_draws(seed, count):
    """Return ``count`` raw 64-bit draws of the counter-mode SplitMix64 stream."""
    seed = np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)
    z = np.arange(1, count + 1, dtype=np.uint64)
    z *= np.uint64(GAMMA)
    z += seed
    z ^= z >> np.uint64(30)
    z *= np.uint64(MIX1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(MIX2)
    z ^= z >> np.uint64(31)
    return z


def _horner(coeffs, z):
    acc = np.full_like(z, coeffs[-1])
    for c in coeffs[-2::-1]:
        acc = acc * z + c
    return acc


def _log_unit(u):
    m, e = np.frexp(u)
    low = m < SQRT_HALF
    m = np.where(low, m * 2.0, m)
    e = np.where(low, e - 1, e).astype(np.float64)
    s = (m - 1.0) / (m + 1.0)
    z = s * s
    return e * LN2 + 2.0 * s * _horner(LOG_COEFFS, z)


def _sincos_turn(u):
    """cos and sin of ``2 pi u`` for ``u`` in [0, 1)."""
    t = u * 4.0
    quad = np.floor(t)
    a = (t - quad) * HALF_PI
    z = a * a
    s = a * _horner(SIN_COEFFS, z)
    c = _horner(COS_COEFFS, z)
    quad = quad.astype(np.int64)
    cos_t = np.choose(quad, [c, -s, -c, s])
    sin_t = np.choose(quad, [s, c, -s, -c])
    return cos_t, sin_t


def standard_normals(seed, count):
    """``count`` standard normal variates for ``seed`` (see module docstring)."""
    count = int(count)
    if count <= 0:
        return np.empty(0, dtype=np.float64)
    pairs = (count + 1) // 2
    d = splitmix_draws(seed, 2 * pairs) >> np.uint64(11)
    u1 = (d[0::2] + np.uint64(1)).astype(np.float64) * TWO_M53
    u2 = d[1::2].astype(np.float64) * TWO_M53
    radius = np.sqrt(-2.0 * _log_unit(u1))
    cos_t, sin_t = _sincos_turn(u2)
    out = np.empty(2 * pairs, dtype=np.float64)
    out[0::2] = radius * cos_t
    out[1::2] = radius * sin_t
    return out[:count]


def householder_qr(a):
    """Thin Householder QR of a C-contiguous float64 ``a`` with rows >= cols.

    The diagonal of ``r`` is made nonnegative by flipping the matching
    columns of ``q``.  Zero columns are skipped (identity reflector).
    """
    m, n = a.shape
    r = np.array(a, dtype=np.float64, copy=True)
    vs = []
    for j in range(n):
        x = r[j:, j]
        norm = np.sqrt(x @ x)
        if norm == 0.0:
            vs.append(None)
            continue
        v = x.copy()
        v[0] += norm if x[0] >= 0.0 else -norm
        beta = 2.0 / (v @ v)
        w = v @ r[j:, j:]
        r[j:, j:] -= np.outer(beta * v, w)
        vs.append((v, beta))
    q = np.eye(m, n)
    for j in range(n - 1, -1, -1):
        if vs[j] is None:
            continue
        v, beta = vs[j]
        w = v @ q[j:, j:]
        q[j:, j:] -= np.outer(beta * v, w)
    r = np.triu(r[:n, :])
    signs = np.where(np.diag(r) < 0.0, -1.0, 1.0)
    q *= signs
    r *= signs[:, None]
    return np.ascontiguousarray(q), np.ascontiguousarray(r)
