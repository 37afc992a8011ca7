"""Gaussian kernel, correntropy loss and the kernel-size annealing schedule."""

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateDataError, DomainError

__all__ = [
    "SIGMA_MIN",
    "DECAY_RATE",
    "KernelSchedule",
    "gaussian_kernel",
    "clf",
    "sigma_bounds_from_data",
    "kernel_size",
]

SIGMA_MIN = 0.03
DECAY_RATE = 2e-4


def _check_sigma(sigma):
    if not sigma > 0:
        raise DomainError(f"kernel size must be positive, got {sigma}")


def gaussian_kernel(p, sigma):
    """``exp(-|p|^2 / (2 sigma^2))``, elementwise for array input."""
    _check_sigma(sigma)
    p = np.asarray(p)
    with np.errstate(over="ignore"):    # |p|^2 = inf gives a weight of exactly 0
        out = np.exp(-(p.real ** 2 + p.imag ** 2) / (2.0 * sigma * sigma))
    return out if out.ndim else float(out)


def clf(X, Z, sigma):
    """Correntropy-based loss ``1 - mean(g_sigma(X - Z))`` over all elements.

    Bounded in ``[0, 1)``: a single residual, however large, moves the loss
    by at most ``1 / X.size``.
    """
    X = np.asarray(X)
    Z = np.asarray(Z)
    if X.shape != Z.shape:
        raise DomainError(f"shape mismatch: {X.shape} vs {Z.shape}")
    if X.size == 0:
        raise DomainError("clf needs at least one element")
    return float(1.0 - np.mean(gaussian_kernel(X - Z, sigma)))


@dataclass(frozen=True)
class KernelSchedule:
    """Annealed kernel size ``sigma_max * exp(-decay * G) + sigma_min``."""

    sigma_max: float
    sigma_min: float = SIGMA_MIN
    decay: float = DECAY_RATE

    def __post_init__(self):
        if not (self.sigma_max > 0 and self.sigma_min > 0 and self.decay > 0):
            raise DomainError("sigma_max, sigma_min and decay must all be positive")

    @classmethod
    def from_data(cls, Y, decay=DECAY_RATE):
        sigma_max, sigma_min = sigma_bounds_from_data(Y)
        return cls(sigma_max, sigma_min, decay)

    def __call__(self, generation):
        return kernel_size(generation, self)


def sigma_bounds_from_data(Y):
    """Kernel-size bounds from the spread of ``|Y|``.

    ``sigma_max`` is half the range between the 0.125 and 0.875 quantiles of
    the moduli (linear interpolation), less ``sigma_min``.

    Raises
    ------
    DegenerateDataError
        If the resulting ``sigma_max`` is not positive.
    """
    mags = np.abs(np.asarray(Y)).ravel()
    if mags.size == 0:
        raise DomainError("cannot derive kernel bounds from empty data")
    lo, hi = np.quantile(mags, [0.125, 0.875], method="linear")
    sigma_max = 0.5 * (hi - lo) - SIGMA_MIN
    if not sigma_max > 0:
        raise DegenerateDataError(
            f"measurement moduli have too little spread (sigma_max = {sigma_max:.3g})"
        )
    return float(sigma_max), SIGMA_MIN


def kernel_size(generation, schedule):
    if generation < 0:
        raise DomainError("generation must be non-negative")
    return float(schedule.sigma_max * np.exp(-schedule.decay * generation) + schedule.sigma_min)
