"""Input validation helpers.

scikit-learn's ``check_array`` refuses complex input, so the array-valued
checks used throughout the package live here.
"""

import numbers

import numpy as np

from .exceptions import DomainError


def check_random_state(seed):
    """Turn ``seed`` into a :class:`numpy.random.Generator`.

    Accepts ``None``, an integer, a :class:`numpy.random.SeedSequence` or an
    existing generator (returned unchanged).
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None or isinstance(seed, (numbers.Integral, np.random.SeedSequence)):
        return np.random.default_rng(seed)
    raise DomainError(f"cannot build a random generator from {seed!r}")


def check_positive(value, name, *, strict=True):
    value = float(value)
    if not np.isfinite(value) or value < 0 or (strict and value == 0):
        bound = "> 0" if strict else ">= 0"
        raise DomainError(f"{name} must be finite and {bound}, got {value}")
    return value


def check_probability(value, name):
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {value}")
    return value


def check_angles(angles, name="angles", *, allow_empty=False):
    """Return ``angles`` as a 1-D float array of degrees within [-90, 90]."""
    arr = np.atleast_1d(np.asarray(angles, dtype=float))
    if arr.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional")
    if arr.size == 0 and not allow_empty:
        raise DomainError(f"{name} must not be empty")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    if np.any(np.abs(arr) > 90.0 + 1e-9):
        raise DomainError(f"{name} must lie within [-90, 90] degrees")
    return arr


def check_snapshots(Y, n_sensors=None):
    """Validate an ``M x T`` complex measurement matrix."""
    Y = np.asarray(Y)
    if Y.ndim != 2 or Y.shape[0] < 1 or Y.shape[1] < 1:
        raise DomainError(f"expected a non-empty 2-D snapshot matrix, got shape {Y.shape}")
    Y = Y.astype(complex, copy=False)
    if not np.all(np.isfinite(Y)):
        raise DomainError("snapshot matrix contains non-finite entries")
    if n_sensors is not None and Y.shape[0] != n_sensors:
        raise DomainError(f"snapshot matrix has {Y.shape[0]} rows, expected {n_sensors}")
    return Y


def check_active_set(e, n_grid=None):
    """Return ``e`` as a boolean vector."""
    e = np.asarray(e)
    if e.ndim != 1:
        raise DomainError("active set must be one-dimensional")
    if e.dtype != bool:
        if not np.all((e == 0) | (e == 1)):
            raise DomainError("active set entries must be 0 or 1")
        e = e.astype(bool)
    if n_grid is not None and e.size != n_grid:
        raise DomainError(f"active set has length {e.size}, expected {n_grid}")
    return e
