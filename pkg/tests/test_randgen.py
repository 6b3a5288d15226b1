import numpy as np
import pytest

from brp import _fallback, randgen
from brp.errors import ShapeError
from brp.randgen import derive_seed, gaussian_matrix
from oracles import ks_critical_1pct, ks_statistic


def test_bit_identical_replay():
    a = gaussian_matrix(31, 17, 99)
    assert a.tobytes() == gaussian_matrix(31, 17, 99).tobytes()


def test_row_major_fill_is_shape_independent():
    a = gaussian_matrix(6, 5, 3)
    b = gaussian_matrix(3, 10, 3)
    assert a.ravel().tobytes() == b.ravel().tobytes()


def test_odd_count_prefix():
    # an odd count drops only the unused second output of the last pair
    assert gaussian_matrix(1, 7, 4).tobytes() == gaussian_matrix(1, 8, 4)[:, :7].tobytes()


def test_moments():
    z = gaussian_matrix(10_000, 1, 2024)
    assert abs(z.mean()) < 0.05
    assert abs(z.var() - 1.0) < 0.05


def test_kolmogorov_smirnov():
    z = gaussian_matrix(1000, 1000, 7).ravel()
    assert ks_statistic(z) < ks_critical_1pct(z.size)


def test_distinct_seeds_uncorrelated():
    a = gaussian_matrix(1000, 1000, 1).ravel()
    b = gaussian_matrix(1000, 1000, 2).ravel()
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.01


def test_known_values():
    # frozen output of the documented generator (also checked by selftest)
    z = gaussian_matrix(1, 3, 20240601)
    assert z[0, 0] == float.fromhex("-0x1.cd91b438fe30dp+0")
    assert z[0, 2] == float.fromhex("0x1.79e187deb1e06p+0")


def test_splitmix_reference_stream():
    # SplitMix64 reference output for seed 0 (first two draws)
    d = _fallback.splitmix_draws(0, 2)
    assert int(d[0]) == 0xE220A8397B1DCDAF
    assert int(d[1]) == 0x6E789E6AA1B965F4


@pytest.mark.parametrize("rows,cols", [(0, 3), (3, 0)])
def test_zero_dimension(rows, cols):
    with pytest.raises(ShapeError):
        gaussian_matrix(rows, cols, 1)


@pytest.mark.parametrize("seed", [-1, 2**64, "abc"])
def test_bad_seed(seed):
    with pytest.raises(ValueError):
        gaussian_matrix(2, 2, seed)


def test_seed_bounds_accepted():
    gaussian_matrix(2, 2, 0)
    gaussian_matrix(2, 2, 2**64 - 1)


def test_derive_seed_streams_differ():
    base = 12345
    children = {derive_seed(base, k) for k in range(100)}
    assert len(children) == 100
    assert derive_seed(base, 1, 2) != derive_seed(base, 2, 1)
    assert derive_seed(base, 5) == derive_seed(base, 5)


def test_kernel_swap_point_exists():
    assert randgen._kernel.standard_normals is not None
