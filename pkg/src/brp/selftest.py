"""Fast invariant checks run by ``brp selftest``."""

import numpy as np

from brp import _backend, _fallback, randgen
from brp.lowrank import (SketchConfig, approximation_error, bilateral_sketch, brp_approximate,
                         materialize, power_approximate)
from brp.matrix import matmul, svd_full, thin_qr
from brp.synthetic import low_rank_product

# gaussian_matrix(2, 3, seed=20240601), row-major
GOLDEN_SEED = 20240601
GOLDEN = (
    "-0x1.cd91b438fe30dp+0", "-0x1.02c55122a7613p+1", "0x1.79e187deb1e06p+0",
    "-0x1.5c40ac06c71e0p+1", "0x1.00c7f956f5c81p+1", "0x1.dff119608145fp+0",
)


def check_rng_determinism():
    first = randgen.gaussian_matrix(2, 3, GOLDEN_SEED)
    again = randgen.gaussian_matrix(2, 3, GOLDEN_SEED)
    expected = np.array([float.fromhex(h) for h in GOLDEN]).reshape(2, 3)
    return first.tobytes() == again.tobytes() == expected.tobytes()


def check_backends_agree():
    if _backend.BACKEND != "compiled":
        return True
    return (_backend.kernels.standard_normals(7, 1001).tobytes()
            == _fallback.standard_normals(7, 1001).tobytes())


def check_identity_cases():
    m = np.arange(9.0).reshape(3, 3)
    q, r = thin_qr(np.eye(5))
    svd = svd_full(np.diag([3.0, 2.0, 1.0]))
    return (np.array_equal(matmul(np.eye(3), m), m)
            and np.allclose(q, np.eye(5), atol=1e-15) and np.allclose(r, np.eye(5), atol=1e-15)
            and np.allclose(svd.sigma, [3.0, 2.0, 1.0], rtol=1e-15))


def check_q0_equivalence():
    x = randgen.gaussian_matrix(60, 40, 3)
    cfg = SketchConfig(rank=8, oversample=2, power=0, seed=11)
    a = materialize(brp_approximate(bilateral_sketch(x, cfg)))
    b = materialize(power_approximate(x, cfg))
    return np.linalg.norm(a - b) <= 1e-10 * np.linalg.norm(a)


def check_exact_recovery():
    x = low_rank_product(300, 10, seed=5, m=200)
    f = brp_approximate(bilateral_sketch(x, SketchConfig(rank=10, seed=1)))
    return approximation_error(x, f, relative=True) <= 1e-10


CHECKS = {
    "rng_determinism": check_rng_determinism,
    "backends_agree": check_backends_agree,
    "identity_cases": check_identity_cases,
    "q0_equivalence": check_q0_equivalence,
    "exact_recovery": check_exact_recovery,
}


def run():
    """``{name: passed}`` for every check; a raised exception counts as a failure."""
    results = {}
    for name, check in CHECKS.items():
        try:
            results[name] = bool(check())
        except Exception:
            results[name] = False
    return results
