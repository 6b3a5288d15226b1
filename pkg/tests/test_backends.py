import numpy as np
import pytest

from brp import _backend, _fallback, randgen, selftest
from brp.randgen import gaussian_matrix

compiled = pytest.importorskip("brp._kernels")


@pytest.mark.parametrize("seed,count", [(0, 1), (1, 7), (2**64 - 1, 1000), (12345, 100_001)])
def test_normals_bit_identical(seed, count):
    assert compiled.standard_normals(seed, count).tobytes() == _fallback.standard_normals(seed, count).tobytes()


def test_draws_bit_identical():
    assert np.array_equal(compiled.splitmix_draws(99, 5000), _fallback.splitmix_draws(99, 5000))


@pytest.mark.parametrize("shape", [(1, 1), (5, 3), (100, 20), (40, 40), (200, 150)])
def test_qr_agrees(shape):
    a = gaussian_matrix(*shape, 3)
    q1, r1 = compiled.householder_qr(a)
    q2, r2 = _fallback.householder_qr(a)
    np.testing.assert_allclose(q1, q2, atol=1e-12)
    np.testing.assert_allclose(r1, r2, atol=1e-12 * np.abs(r2).max())


def test_qr_zero_column_both_backends():
    a = gaussian_matrix(10, 3, 4)
    a[:, 1] = 0.0
    for kernel in (compiled, _fallback):
        q, r = kernel.householder_qr(a)
        assert r[1, 1] == 0.0
        np.testing.assert_allclose(q @ r, a, atol=1e-13)


def test_backend_selected():
    assert _backend.BACKEND in ("compiled", "python")


def test_broken_generator_caught(monkeypatch):
    # negative control: a wrong mixing constant must trip the self-test
    monkeypatch.setattr(_fallback, "GAMMA", _fallback.GAMMA ^ 1)
    monkeypatch.setattr(randgen, "_kernel", _fallback)
    assert selftest.run()["rng_determinism"] is False


def test_selftest_passes():
    assert all(selftest.run().values())
