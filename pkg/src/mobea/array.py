"""Uniform linear array model: steering vectors, manifolds, grids, snapshots.

All angles are in degrees; radians appear only inside the trigonometry.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_angles, check_positive, check_random_state
from .exceptions import ConfigurationError, DomainError

__all__ = [
    "ArrayConfig",
    "Grid",
    "Scenario",
    "steering_vector",
    "manifold",
    "manifold_derivative",
    "shifted_manifold",
    "synthesize",
]

_GRID_TOL = 1e-9


@dataclass(frozen=True)
class ArrayConfig:
    """Uniform linear array of omnidirectional sensors.

    Parameters
    ----------
    num_sensors : int
        Number of sensors ``M`` (at least 2).
    spacing : float
        Inter-sensor spacing in wavelengths, ``d / lambda``.
    """

    num_sensors: int
    spacing: float = 0.5

    def __post_init__(self):
        if int(self.num_sensors) != self.num_sensors or self.num_sensors < 2:
            raise ConfigurationError(f"num_sensors must be an integer >= 2, got {self.num_sensors}")
        if not self.spacing > 0:
            raise ConfigurationError(f"spacing must be positive, got {self.spacing}")


@dataclass(frozen=True)
class Grid:
    """Equi-spaced angular grid over [-90, 90] degrees."""

    points: np.ndarray = field(repr=False)
    interval: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise ConfigurationError("a grid needs at least two points")
        if np.any(np.abs(np.diff(pts) - self.interval) > _GRID_TOL):
            raise ConfigurationError("grid points must be equi-spaced by the interval")
        if pts[0] < -90.0 - _GRID_TOL or pts[-1] > 90.0 + _GRID_TOL:
            raise ConfigurationError("grid must lie within [-90, 90] degrees")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_interval(cls, interval):
        """Grid starting at -90 degrees with the given spacing.

        Both endpoints are included whenever ``interval`` divides 180.
        """
        interval = check_positive(interval, "interval")
        n = int(np.floor(180.0 / interval + _GRID_TOL)) + 1
        if n < 2:
            raise ConfigurationError(f"interval {interval} leaves fewer than two grid points")
        return cls(points=-90.0 + interval * np.arange(n), interval=interval)

    def __len__(self):
        return self.points.size


@dataclass(frozen=True)
class Scenario:
    """Sources impinging on an array, sampled on a grid."""

    array: ArrayConfig
    grid: Grid
    doas: tuple
    snapshots: int
    source_power: float = 1.0

    def __post_init__(self):
        doas = tuple(float(d) for d in np.atleast_1d(self.doas))
        object.__setattr__(self, "doas", doas)
        K = len(doas)
        if K < 1:
            raise ConfigurationError("at least one source is required")
        if K > self.array.num_sensors - 1:
            raise ConfigurationError(
                f"{K} sources exceed the identifiable limit M-1 = {self.array.num_sensors - 1}"
            )
        if any(not -90.0 < d <= 90.0 for d in doas):
            raise ConfigurationError("source directions must lie in (-90, 90] degrees")
        if len(set(doas)) != K:
            raise ConfigurationError("source directions must be pairwise distinct")
        if int(self.snapshots) != self.snapshots or self.snapshots < 1:
            raise ConfigurationError("snapshots must be a positive integer")
        if not self.source_power > 0:
            raise ConfigurationError("source_power must be positive")

    @property
    def num_sources(self):
        return len(self.doas)


def _phase_factor(spacing, num_sensors, angles_deg):
    m = np.arange(num_sensors)[:, None]
    return -2j * np.pi * spacing * m * np.sin(np.deg2rad(angles_deg))[None, :]


def steering_vector(theta, array):
    """Steering vector ``a(theta)`` of shape ``(M,)``.

    ``a_m = exp(-j 2 pi m (d/lambda) sin(theta))`` for ``m = 0 .. M-1``.
    """
    theta = float(theta)
    if not -90.0 <= theta <= 90.0:
        raise DomainError(f"angle {theta} outside [-90, 90] degrees")
    return np.exp(_phase_factor(array.spacing, array.num_sensors, np.array([theta])))[:, 0]


def manifold(angles, array):
    """Manifold matrix whose ``j``-th column is ``steering_vector(angles[j])``."""
    angles = check_angles(angles)
    return np.exp(_phase_factor(array.spacing, array.num_sensors, angles))


def shifted_manifold(grid_points, zeta, array):
    """Manifold at ``grid_points + zeta``.

    Refined endpoints may step up to half an interval past +/-90 degrees, so
    the range check of :func:`manifold` is skipped here.
    """
    angles = np.asarray(grid_points, dtype=float) + np.asarray(zeta, dtype=float)
    return np.exp(_phase_factor(array.spacing, array.num_sensors, angles))


def manifold_derivative(angles, array):
    """Elementwise derivative of :func:`manifold` with respect to angle (per degree)."""
    angles = check_angles(angles)
    m = np.arange(array.num_sensors)[:, None]
    dphase = -2j * np.pi * array.spacing * m * np.cos(np.deg2rad(angles))[None, :] * (np.pi / 180.0)
    return dphase * manifold(angles, array)


def synthesize(scenario, seed=None):
    """Draw source waveforms and the noise-free array output.

    Sources are white, uncorrelated, circularly symmetric complex Gaussian
    with variance ``scenario.source_power``.

    Returns
    -------
    Y : ndarray, shape (M, T)
        Noise-free snapshots ``A(doas) @ S``.
    S : ndarray, shape (K, T)
        Source waveforms.
    """
    rng = check_random_state(seed)
    K, T = scenario.num_sources, scenario.snapshots
    scale = np.sqrt(scenario.source_power / 2.0)
    S = scale * (rng.standard_normal((K, T)) + 1j * rng.standard_normal((K, T)))
    Y = manifold(scenario.doas, scenario.array) @ S
    return Y, S
