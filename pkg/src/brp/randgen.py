"""Seeded standard Gaussian matrices.

The generator is counter-mode SplitMix64 feeding a Box-Muller transform; see
``brp._fallback`` for the exact definition.  Identical ``(rows, cols, seed)``
gives a bit-identical matrix on every run and platform, with either backend.
"""

from brp import _backend
from brp.errors import ShapeError

MASK64 = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15

# swapped out by tests to exercise the selftest negative control
_kernel = _backend.kernels


def _mix64(z):
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def check_seed(seed):
    """Validate a seed as an unsigned 64-bit integer and return it as ``int``."""
    if isinstance(seed, bool) or not isinstance(seed, int):
        try:
            seed = int(seed)
        except (TypeError, ValueError):
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed!r}") from None
    if not 0 <= seed <= MASK64:
        raise ValueError(f"seed must be in [0, 2**64), got {seed}")
    return seed


def derive_seed(seed, *path):
    """Derive an independent child seed from ``seed`` and integer ``path`` keys.

    Used for disjoint streams (A1 vs A2) and per-trial seeds; the mapping is a
    fixed function so serial and parallel runs see the same seeds.
    """
    s = check_seed(seed)
    for key in path:
        s = _mix64((s ^ _mix64(int(key) & MASK64)) + _GAMMA)
    return s


def gaussian_matrix(rows, cols, seed):
    """``rows x cols`` matrix of i.i.d. N(0, 1) entries, filled row-major."""
    rows, cols = int(rows), int(cols)
    if rows < 1 or cols < 1:
        raise ShapeError(f"gaussian_matrix needs positive dimensions, got {rows}x{cols}")
    seed = check_seed(seed)
    return _kernel.standard_normals(seed, rows * cols).reshape(rows, cols)
