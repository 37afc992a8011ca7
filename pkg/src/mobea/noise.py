"""Impulsive complex noise: two-term Gaussian mixture and symmetric alpha-stable."""

from dataclasses import dataclass

import numpy as np

from ._validation import check_random_state
from .exceptions import DomainError

__all__ = [
    "GmmNoiseModel",
    "SasNoiseModel",
    "gmm_from_snr",
    "sas_from_gsnr",
    "sample_gmm",
    "sample_sas",
    "symmetric_stable",
]

#: Outlier-to-base variance ratio used when a mixture is built from an SNR.
OUTLIER_VARIANCE_RATIO = 100.0


@dataclass(frozen=True)
class GmmNoiseModel:
    """Two-term complex Gaussian mixture.

    With probability ``1 - outlier_prob`` an entry has variance
    ``base_variance``, otherwise ``outlier_variance``.
    """

    outlier_prob: float
    base_variance: float
    outlier_variance: float

    def __post_init__(self):
        # c2 = 0 is accepted for the degenerate pure-Gaussian case
        if not 0.0 <= self.outlier_prob < 0.5:
            raise DomainError(f"outlier_prob must lie in [0, 0.5), got {self.outlier_prob}")
        if not (self.base_variance > 0 and self.outlier_variance > 0):
            raise DomainError("mixture variances must be positive")

    @property
    def second_moment(self):
        c2 = self.outlier_prob
        return (1.0 - c2) * self.base_variance + c2 * self.outlier_variance


@dataclass(frozen=True)
class SasNoiseModel:
    """Symmetric alpha-stable noise with characteristic function ``exp(-(gamma |x|)^alpha)``.

    ``isotropic=False`` draws real and imaginary parts independently;
    ``isotropic=True`` uses the sub-Gaussian (rotation-invariant) construction.
    Both give the same marginal law per component.
    """

    alpha: float
    scale: float
    isotropic: bool = False

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise DomainError(f"alpha must lie in (0, 2], got {self.alpha}")
        if not self.scale > 0:
            raise DomainError(f"scale must be positive, got {self.scale}")


def gmm_from_snr(snr_db, source_power, outlier_prob):
    """Mixture whose base variance gives ``SNR = source_power / base_variance``."""
    if not 0.0 < outlier_prob < 0.5:
        raise DomainError(f"outlier_prob must lie in (0, 0.5), got {outlier_prob}")
    if not source_power > 0:
        raise DomainError("source_power must be positive")
    base = source_power / 10.0 ** (snr_db / 10.0)
    return GmmNoiseModel(outlier_prob, base, OUTLIER_VARIANCE_RATIO * base)


def sas_from_gsnr(gsnr_db, source_power, alpha, isotropic=False):
    """Stable model whose scale gives ``GSNR = source_power / scale**alpha``."""
    if not 0.0 < alpha <= 2.0:
        raise DomainError(f"alpha must lie in (0, 2], got {alpha}")
    if not source_power > 0:
        raise DomainError("source_power must be positive")
    scale = (source_power / 10.0 ** (gsnr_db / 10.0)) ** (1.0 / alpha)
    return SasNoiseModel(alpha, scale, isotropic)


def _complex_gaussian(rng, shape, variance):
    return np.sqrt(variance / 2.0) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def sample_gmm(model, n_rows, n_cols, seed=None):
    """Draw an ``n_rows x n_cols`` matrix of mixture noise."""
    rng = check_random_state(seed)
    shape = (n_rows, n_cols)
    outlier = rng.random(shape) < model.outlier_prob
    variance = np.where(outlier, model.outlier_variance, model.base_variance)
    return _complex_gaussian(rng, shape, variance)


def symmetric_stable(alpha, size, rng, scale=1.0):
    """Real symmetric alpha-stable variates by the Chambers-Mallows-Stuck transform."""
    V = rng.uniform(-np.pi / 2, np.pi / 2, size)
    W = rng.standard_exponential(size)
    if alpha == 1.0:
        X = np.tan(V)
    else:
        X = (np.sin(alpha * V) / np.cos(V) ** (1.0 / alpha)
             * (np.cos(V - alpha * V) / W) ** ((1.0 - alpha) / alpha))
    return scale * X


def _positive_stable(alpha, size, rng):
    """Totally skewed stable variates with Laplace transform ``exp(-s**alpha)``, 0 < alpha < 1."""
    V = rng.uniform(-np.pi / 2, np.pi / 2, size)
    W = rng.standard_exponential(size)
    shifted = alpha * (V + np.pi / 2)
    return (np.sin(shifted) / np.cos(V) ** (1.0 / alpha)
            * (np.cos(V - shifted) / W) ** ((1.0 - alpha) / alpha))


def sample_sas(model, n_rows, n_cols, seed=None):
    """Draw an ``n_rows x n_cols`` matrix of complex symmetric alpha-stable noise."""
    rng = check_random_state(seed)
    shape = (n_rows, n_cols)
    if not model.isotropic:
        re = symmetric_stable(model.alpha, shape, rng, model.scale)
        im = symmetric_stable(model.alpha, shape, rng, model.scale)
        return re + 1j * im
    # sub-Gaussian vector: sqrt(A) * G, G ~ N(0, 2 gamma^2) per component
    if model.alpha == 2.0:
        mix = np.ones(shape)
    else:
        mix = _positive_stable(model.alpha / 2.0, shape, rng)
    g = np.sqrt(2.0) * model.scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return np.sqrt(mix) * g
