"""scikit-learn style wrapper around the solver."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ._validation import check_snapshots
from .array import ArrayConfig, Grid, shifted_manifold
from .correntropy import SIGMA_MIN
from .decode import Decoder
from .solver import SolverConfig, run

__all__ = ["MoBEA"]


class MoBEA(BaseEstimator):
    """Direction-of-arrival estimator with automatic source counting.

    Samples are snapshots and features are sensors, so ``X`` has shape
    ``(n_snapshots, n_sensors)`` and is complex.

    Parameters
    ----------
    num_sensors : int or None
        Taken from ``X`` when None.
    spacing : float
        Sensor spacing in wavelengths.
    grid_interval : float
        Angular grid step in degrees.
    population_size, crossover_prob, mutation_prob, inner_max, inner_patience,
    forward_max, step, max_generations, tol, window, refinement
        Solver settings, see :class:`mobea.solver.SolverConfig`.
    random_state : int, SeedSequence, Generator or None

    Attributes
    ----------
    doas_ : ndarray
        Estimated directions in degrees, ascending.
    n_sources_ : int
    zeta_ : ndarray
        Final grid mismatch.
    trace_ : list of TraceRecord
    converged_ : bool
    n_generations_ : int
    front_ : ndarray, shape (n, 2)
    """

    def __init__(self, num_sensors=None, spacing=0.5, grid_interval=2.0, population_size=50,
                 crossover_prob=0.9, mutation_prob=None, inner_max=50, inner_patience=5,
                 forward_max=200, step=None, max_generations=200, tol=1e-6, window=5,
                 refinement="forward-search", random_state=None):
        self.num_sensors = num_sensors
        self.spacing = spacing
        self.grid_interval = grid_interval
        self.population_size = population_size
        self.crossover_prob = crossover_prob
        self.mutation_prob = mutation_prob
        self.inner_max = inner_max
        self.inner_patience = inner_patience
        self.forward_max = forward_max
        self.step = step
        self.max_generations = max_generations
        self.tol = tol
        self.window = window
        self.refinement = refinement
        self.random_state = random_state

    def _solver_config(self):
        return SolverConfig(
            population_size=self.population_size,
            crossover_prob=self.crossover_prob,
            mutation_prob=self.mutation_prob,
            inner_max=self.inner_max,
            inner_patience=self.inner_patience,
            forward_max=self.forward_max,
            step=self.step,
            max_generations=self.max_generations,
            tol=self.tol,
            window=self.window,
            refinement=self.refinement,
        )

    def fit(self, X, y=None):
        """Estimate the directions from snapshots ``X``.

        ``y`` is ignored.
        """
        X = np.asarray(X)
        if X.ndim != 2:
            raise ValueError(f"X must be 2-D (n_snapshots, n_sensors), got shape {X.shape}")
        M = X.shape[1] if self.num_sensors is None else self.num_sensors
        array = ArrayConfig(M, self.spacing)
        Y = check_snapshots(X.T, M)
        result = run(Y, Grid.from_interval(self.grid_interval), array, self._solver_config(),
                     self.random_state)
        self.array_ = array
        self.n_features_in_ = M
        self.doas_ = result.doas
        self.n_sources_ = result.n_sources
        self.zeta_ = result.zeta
        self.trace_ = result.trace
        self.converged_ = result.converged
        self.n_generations_ = result.generations
        self.front_ = result.front
        self.result_ = result
        return self

    def fit_predict(self, X, y=None):
        """Fit and return the estimated directions."""
        return self.fit(X).doas_

    def _check_fitted(self):
        if not hasattr(self, "doas_"):
            raise NotFittedError("this MoBEA instance is not fitted yet; call fit first")

    def transform(self, X):
        """Source waveforms at the estimated directions.

        One correntropy reweighting of the least-squares fit, with the final
        kernel size of the run.

        Returns
        -------
        ndarray, shape (n_snapshots, n_sources)
        """
        self._check_fitted()
        Y = check_snapshots(np.asarray(X).T, self.n_features_in_)
        k = self.doas_.size
        if k == 0:
            return np.zeros((Y.shape[1], 0), dtype=complex)
        A = shifted_manifold(self.doas_, np.zeros(k), self.array_)
        support = np.arange(k)
        plain = Decoder(Y, A, np.ones(Y.shape)).rows([support])[0]
        sigma = self.trace_[-1].sigma if self.trace_ else SIGMA_MIN
        rows = Decoder.from_knee(Y, A, support, plain, sigma).rows([support])[0]
        return rows.T

