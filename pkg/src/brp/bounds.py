"""Evaluators for the BRP error bounds and a Monte-Carlo harness.

Conventions: ``spectrum`` is the descending singular values
``lambda_1 >= ... >= lambda_n``; indices in the formulas are 1-based, so
``lambda_r`` is ``spectrum[r - 1]``.  The deterministic bounds take the
Gaussian draw ``A1`` (before any correlated update) together with the right
singular vectors ``V``.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from brp.errors import DegenerateSpectrumError, HypothesisError
from brp.lowrank import approximate_with_draw
from brp.matrix import _svd_any, as_dense, pinv, spectral_norm
from brp.randgen import derive_seed


def _spectrum(spectrum, r):
    lam = np.abs(np.asarray(spectrum, dtype=np.float64))
    if lam.ndim != 1 or lam.size == 0:
        raise HypothesisError("spectrum must be a non-empty vector")
    if np.any(np.diff(lam) > 0.0):
        raise HypothesisError("spectrum must be sorted in descending order")
    if not 1 <= r < lam.size:
        raise HypothesisError(f"target rank must satisfy 1 <= r <= n - 1, got r={r}, n={lam.size}")
    if lam[r - 1] == 0.0:
        raise DegenerateSpectrumError(f"lambda_r is zero (r={r}); the bound divides by it")
    return lam


def _det_terms(svd, a1, r, power):
    lam = _spectrum(svd.sigma, r)
    a1 = as_dense(a1, "a1")
    if a1.shape[0] != svd.v.shape[0]:
        raise HypothesisError(f"a1 has {a1.shape[0]} rows but V has {svd.v.shape[0]}")
    if a1.shape[1] < r:
        raise HypothesisError(f"a1 needs at least r={r} columns, has {a1.shape[1]}")
    w1 = svd.v[:, :r].T @ a1
    w2 = svd.v[:, r:].T @ a1
    lam1, lam2 = lam[:r], lam[r:]
    inner = (lam2 ** (2 * power))[:, None] * w2 @ pinv(w1) / lam1 ** power
    first = spectral_norm(inner) if np.any(inner) else 0.0
    return first, lam2[0] ** power


def deterministic_bound(svd, a1, r):
    """Bound on ``||X - L||_2`` for one drawn ``A1`` (correlated scheme).

    ``sqrt(||L2^2 (V2^T A1)(V1^T A1)^+ L1^{-1}||^2 + ||L2||^2)``.
    """
    first, second = _det_terms(svd, a1, r, 1)
    return math.sqrt(first ** 2 + second ** 2)


def power_deterministic_bound(svd, a1, r, q):
    """Power-scheme counterpart of :func:`deterministic_bound`.

    ``(||L2^{2(2q+1)} (V2^T A1)(V1^T A1)^+ L1^{-(2q+1)}||^2 + ||L2^{2q+1}||^2) ** (1/(2(2q+1)))``,
    i.e. a bound on the unsquared error.
    """
    s = 2 * q + 1
    first, second = _det_terms(svd, a1, r, s)
    return (first ** 2 + second ** 2) ** (1.0 / (2 * s))


def _check_average(r, p):
    if p < 2:
        raise HypothesisError(f"average bounds need oversampling p >= 2, got {p}")


def power_average_bound(spectrum, r, p, q):
    """Bound on ``E ||X - L||_2`` for the power scheme with exponent ``q``."""
    _check_average(r, p)
    lam = _spectrum(spectrum, r)
    s = 2 * q + 1
    lt = lam ** s
    head = math.sqrt(np.sum(lt[r] ** 2 / lt[:r] ** 2) / (p - 1))
    tail = math.sqrt(np.sum(lt[r:] ** 2 / lt[r - 1] ** 2))
    value = (head + 1.0) * abs(lt[r]) + math.e * math.sqrt(r + p) / p * tail
    return value ** (1.0 / s)


def average_bound(spectrum, r, p):
    """Bound on ``E ||X - L||_2`` for the base method."""
    return power_average_bound(spectrum, r, p, 0)


def deviation_fail_prob(p, u, t):
    return math.exp(-u * u / 2.0) + 4.0 * t ** (-p) + t ** (-(p + 1))


def deviation_bound(spectrum, r, p, u, t):
    """High-probability bound: ``(value, fail_prob)``.

    The sum over the leading values uses ``lambda_i ** -1`` (not ``** -2``)
    and the leading factor multiplies ``lambda_{r+1} ** 2``.
    """
    if p < 4:
        raise HypothesisError(f"deviation bound needs oversampling p >= 4, got {p}")
    if u < 1 or t < 1:
        raise HypothesisError(f"deviation bound needs u, t >= 1, got u={u}, t={t}")
    lam = _spectrum(spectrum, r)
    c = math.e * math.sqrt(r + p) / (p + 1)
    lead = 1.0 + t * math.sqrt(12.0 * r / p) * math.sqrt(np.sum(1.0 / lam[:r])) + c * t * u / lam[r - 1]
    value = lead * lam[r] ** 2 + c * t / lam[r - 1] * math.sqrt(np.sum(lam[r:] ** 2))
    return float(value), deviation_fail_prob(p, u, t)


@dataclass
class BoundReport:
    """Bound values next to observed spectral errors of repeated BRP runs.

    ``deterministic`` holds one value per trial.  ``skipped`` maps a bound
    name to the reason it was not evaluated.
    """

    observed_errors: np.ndarray
    deterministic: np.ndarray | None = None
    average: float | None = None
    deviation_value: float | None = None
    deviation_fail_prob: float | None = None
    skipped: dict = field(default_factory=dict)

    @property
    def trials(self):
        return self.observed_errors.size

    @property
    def mean(self):
        return float(np.mean(self.observed_errors))

    @property
    def max(self):
        return float(np.max(self.observed_errors))

    @property
    def stderr(self):
        n = self.observed_errors.size
        return float(np.std(self.observed_errors, ddof=1) / math.sqrt(n)) if n > 1 else 0.0

    @property
    def deterministic_exceedances(self):
        if self.deterministic is None:
            return None
        return int(np.sum(self.observed_errors > self.deterministic))

    @property
    def deviation_exceedances(self):
        if self.deviation_value is None:
            return None
        return int(np.sum(self.observed_errors > self.deviation_value))


def trial_seed(seed, trial):
    return derive_seed(seed, 0x7A1, trial)


def _threads():
    try:
        return max(0, int(os.environ.get("BRP_THREADS", "0")))
    except ValueError:
        return 0


def run_trials(x, cfg, trials, with_draws=False):
    """Spectral errors of ``trials`` independent BRP runs (seeds derived from ``cfg.seed``)."""
    x = as_dense(x, "x")

    def one(i):
        f, draw = approximate_with_draw(x, replace(cfg, seed=trial_seed(cfg.seed, i)))
        return spectral_norm(x - f.left @ f.right), draw

    workers = _threads()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, range(trials)))
    else:
        results = [one(i) for i in range(trials)]
    errors = np.array([e for e, _ in results])
    return (errors, [d for _, d in results]) if with_draws else errors


def monte_carlo_check(x, cfg, trials, u=2.0, t=2.0, svd=None):
    """Run the pipeline ``trials`` times and evaluate every applicable bound."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    x = as_dense(x, "x")
    if x.shape[0] < x.shape[1]:
        raise HypothesisError("bounds are stated for m >= n; pass the transpose")
    svd = _svd_any(x) if svd is None else svd
    r, p, q = cfg.rank, cfg.oversample, cfg.power
    errors, draws = run_trials(x, cfg, trials, with_draws=True)
    report = BoundReport(observed_errors=errors)

    if cfg.scheme != "correlated":
        report.skipped["bound_det"] = "deterministic bounds assume the correlated scheme"
    else:
        try:
            if q == 0:
                report.deterministic = np.array([deterministic_bound(svd, d, r) for d in draws])
            else:
                report.deterministic = np.array([power_deterministic_bound(svd, d, r, q) for d in draws])
        except (HypothesisError, DegenerateSpectrumError) as exc:
            report.skipped["bound_det"] = str(exc)
    try:
        report.average = power_average_bound(svd.sigma, r, p, q)
    except (HypothesisError, DegenerateSpectrumError) as exc:
        report.skipped["bound_avg"] = str(exc)
    if q != 0:
        report.skipped["bound_dev"] = "deviation bound is stated for q = 0 only"
    else:
        try:
            report.deviation_value, report.deviation_fail_prob = deviation_bound(svd.sigma, r, p, u, t)
        except (HypothesisError, DegenerateSpectrumError) as exc:
            report.skipped["bound_dev"] = str(exc)
    return report
