"""Seeded test matrices: prescribed spectra, exact low-rank products, faces."""

import numpy as np

from brp.errors import ConfigError
from brp.matrix import thin_qr
from brp.randgen import derive_seed, gaussian_matrix


def geometric_spectrum(ratio, n):
    """``ratio ** (i - 1)`` for ``i = 1..n``."""
    return float(ratio) ** np.arange(n, dtype=np.float64)


def power_spectrum(alpha, n):
    """``i ** -alpha`` for ``i = 1..n``."""
    return np.arange(1, n + 1, dtype=np.float64) ** -float(alpha)


def parse_spectrum(text):
    """Parse ``geometric:RATIO:N`` or ``power:ALPHA:N``."""
    parts = text.split(":")
    if len(parts) != 3 or parts[0] not in ("geometric", "power"):
        raise ConfigError(f"spectrum must be geometric:RATIO:N or power:ALPHA:N, got {text!r}")
    try:
        value, n = float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"bad spectrum parameters in {text!r}") from None
    if n < 1:
        raise ConfigError(f"spectrum length must be positive, got {n}")
    if parts[0] == "geometric":
        if not 0.0 < value <= 1.0:
            raise ConfigError(f"geometric ratio must be in (0, 1], got {value}")
        return geometric_spectrum(value, n)
    if value < 0.0:
        raise ConfigError(f"power exponent must be >= 0, got {value}")
    return power_spectrum(value, n)


def random_orthonormal(rows, cols, seed):
    q, _ = thin_qr(gaussian_matrix(rows, cols, seed))
    return q


def matrix_with_spectrum(spectrum, seed, rows=None):
    """``U diag(spectrum) V^T`` with seeded orthonormal ``U`` (rows x n) and ``V`` (n x n)."""
    spectrum = np.asarray(spectrum, dtype=np.float64)
    n = spectrum.size
    rows = n if rows is None else rows
    if rows < n:
        raise ConfigError(f"rows ({rows}) must be >= spectrum length ({n})")
    u = random_orthonormal(rows, n, derive_seed(seed, 1))
    v = random_orthonormal(n, n, derive_seed(seed, 2))
    return np.ascontiguousarray((u * spectrum) @ v.T)


def low_rank_product(n, rank, seed, m=None):
    """``A @ B^T`` with seeded Gaussian ``A`` (m x rank) and ``B`` (n x rank)."""
    m = n if m is None else m
    a = gaussian_matrix(m, rank, derive_seed(seed, 1))
    b = gaussian_matrix(n, rank, derive_seed(seed, 2))
    return a @ b.T


def face_images(count=700, height=40, width=40, individuals=100, components=40, noise=0.02, seed=0):
    """Synthetic grayscale "faces" as a ``count x height x width`` uint8 array.

    Each individual is a shared oval template plus a random mix of smooth
    basis images; each picture of that individual adds a small perturbation
    of the mix, a lighting gradient and pixel noise.  The result is close to
    low rank with a noise floor, like an aligned face dataset.
    """
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    yy = (yy + 0.5) / height * 2.0 - 1.0
    xx = (xx + 0.5) / width * 2.0 - 1.0

    def blob(cy, cx, sy, sx):
        return np.exp(-(((yy - cy) / sy) ** 2 + ((xx - cx) / sx) ** 2))

    template = 0.25 + 0.5 * blob(0.0, 0.0, 0.85, 0.65)
    template -= 0.25 * (blob(-0.25, -0.3, 0.1, 0.15) + blob(-0.25, 0.3, 0.1, 0.15))
    template -= 0.2 * blob(0.45, 0.0, 0.08, 0.3)
    template += 0.1 * blob(0.1, 0.0, 0.25, 0.08)

    centres = gaussian_matrix(components, 4, derive_seed(seed, 1))
    basis = np.empty((components, height * width))
    for k in range(components):
        cy, cx, sy, sx = centres[k]
        basis[k] = blob(0.6 * np.tanh(cy), 0.6 * np.tanh(cx), 0.15 + 0.2 * abs(np.tanh(sy)),
                        0.15 + 0.2 * abs(np.tanh(sx))).ravel()
    decay = 1.0 / np.arange(1, components + 1) ** 0.5

    person_mix = gaussian_matrix(individuals, components, derive_seed(seed, 2)) * decay
    per_image = gaussian_matrix(count, components, derive_seed(seed, 3)) * (0.3 * decay)
    light = gaussian_matrix(count, 2, derive_seed(seed, 4)) * 0.05
    pixel_noise = gaussian_matrix(count, height * width, derive_seed(seed, 5)) * noise

    who = np.arange(count) % individuals
    coeff = person_mix[who] + per_image
    images = template.ravel() + 0.08 * coeff @ basis
    images += light[:, :1] * yy.ravel() + light[:, 1:] * xx.ravel()
    images += pixel_noise
    pixels = np.floor(np.clip(images, 0.0, 1.0) * 255.0 + 0.5)
    return pixels.astype(np.uint8).reshape(count, height, width)
