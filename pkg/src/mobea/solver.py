"""Bilevel solver: on-grid evolution alternating with off-grid refinement."""

import time
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_random_state, check_snapshots
from .array import manifold_derivative, shifted_manifold
from .correntropy import KernelSchedule, clf, gaussian_kernel
from .decode import COND_LIMIT, Decoder
from .exceptions import ConfigurationError, EstimationFailedError, KneeUnavailableError
from .moea import Individual, Population, evaluate_rows, initialize, knee_of, on_grid

__all__ = [
    "REFINEMENTS",
    "SolverConfig",
    "TraceRecord",
    "EstimationResult",
    "clf_at",
    "forward_search",
    "taylor_refine",
    "run",
]

REFINEMENTS = ("forward-search", "on-grid-only", "taylor")

#: Two loss values closer than this count as equal in the forward search.
LOSS_TOL = 1e-14


@dataclass(frozen=True)
class SolverConfig:
    """Solver parameters.

    ``mutation_prob=None`` means ``1 / N`` and ``step=None`` means one
    hundredth of the grid interval.
    """

    population_size: int = 50
    crossover_prob: float = 0.9
    mutation_prob: float = None
    inner_max: int = 50
    inner_patience: int = 5
    forward_max: int = 200
    step: float = None
    max_generations: int = 200
    tol: float = 1e-6
    window: int = 5
    refinement: str = "forward-search"

    def __post_init__(self):
        if self.refinement not in REFINEMENTS:
            raise ConfigurationError(
                f"refinement must be one of {', '.join(REFINEMENTS)}, got {self.refinement!r}"
            )
        for name in ("crossover_prob", "mutation_prob"):
            p = getattr(self, name)
            if p is not None and not 0.0 <= p <= 1.0:
                raise ConfigurationError(f"{name} must lie in [0, 1], got {p}")
        for name in ("population_size", "inner_max", "inner_patience", "forward_max",
                     "max_generations", "window"):
            if int(getattr(self, name)) < 1:
                raise ConfigurationError(f"{name} must be at least 1")
        if self.population_size < 2:
            raise ConfigurationError("population_size must be at least 2")
        if self.step is not None and not self.step > 0:
            raise ConfigurationError("step must be positive")
        if not self.tol > 0:
            raise ConfigurationError("tol must be positive")


@dataclass(frozen=True)
class TraceRecord:
    generation: int
    knee_f1: int
    knee_f2: float
    sigma: float
    elapsed: float


@dataclass
class EstimationResult:
    """Outcome of one solver run.

    Attributes
    ----------
    doas : ndarray
        Refined directions of the knee's nonzero rows, ascending, in degrees.
    n_sources : int
    zeta : ndarray
        Final grid mismatch.
    trace : list of TraceRecord
    converged : bool
        Whether the signal-change stopping rule fired before the generation cap.
    front : ndarray, shape (n, 2)
        Objectives of the final first front.
    """

    doas: np.ndarray
    n_sources: int
    zeta: np.ndarray
    trace: list
    converged: bool
    generations: int
    knee_support: np.ndarray = field(repr=False)
    knee_signal: np.ndarray = field(repr=False)
    front: np.ndarray = field(repr=False)


def _in_box(value, half):
    return -half < value <= half


def clf_at(zeta, support, rows, Y, grid_points, array, sigma):
    """Correntropy loss of the fixed rows against the grid shifted by ``zeta``."""
    A = shifted_manifold(np.asarray(grid_points)[support], np.asarray(zeta)[support], array)
    return clf(Y, A @ rows, sigma)


def forward_search(zeta, support, rows, Y, grid_points, array, sigma, *, step, max_steps,
                   interval, seed=None, return_steps=False):
    """Derivative-free descent of the loss over the active grid offsets.

    Every active offset is first probed on its own from the input ``zeta`` in
    a random direction. A probe that lowers the loss keeps the direction, one
    that raises it reverses the direction (untested), and one that leaves it
    unchanged within ``LOSS_TOL`` zeroes it. All active offsets then move
    together by ``step`` along their directions for as long as the loss
    strictly decreases, at most ``max_steps`` times. Any proposal outside
    ``(-interval/2, interval/2]`` is rejected for that component, which keeps
    its value.

    Returns
    -------
    zeta : ndarray
    steps : int
        Accepted joint steps, only when ``return_steps`` is true.
    """
    rng = check_random_state(seed)
    zeta = np.array(zeta, dtype=float)
    support = np.asarray(support, dtype=np.intp)
    half = interval / 2.0

    def loss(z):
        return clf_at(z, support, rows, Y, grid_points, array, sigma)

    base = loss(zeta)
    beta = np.zeros(zeta.size)
    for i in support:
        b = 1.0 if rng.random() < 0.5 else -1.0
        probe = zeta[i] + step * b
        if not _in_box(probe, half):
            # an infeasible probe says nothing about the loss; keep the guess
            beta[i] = b
            continue
        trial = zeta.copy()
        trial[i] = probe
        f = loss(trial)
        if f > base + LOSS_TOL:
            beta[i] = -b
        elif f >= base - LOSS_TOL:
            beta[i] = 0.0
        else:
            beta[i] = b

    steps = 0
    current, f_cur = zeta, base
    if np.any(beta):
        for _ in range(max_steps):
            proposal = current + step * beta
            outside = ~((proposal > -half) & (proposal <= half))
            proposal[outside] = current[outside]
            f_new = loss(proposal)
            if not f_new < f_cur:
                break
            current, f_cur = proposal, f_new
            steps += 1
    return (current, steps) if return_steps else current


def taylor_refine(zeta, support, rows, Y, grid_points, array, sigma, *, interval,
                  damping=0.5, iterations=5):
    """Grid offsets from a first-order expansion of the manifold.

    ``A(grid + zeta) ~ A(grid) + A'(grid) diag(zeta)``; the offsets solve the
    stationarity condition of the kernel-weighted squared residual, with the
    weights refreshed ``iterations`` times under damping. The result is
    clipped to ``(-interval/2, interval/2]``; a singular linear system
    returns ``zeta`` unchanged.
    """
    zeta = np.array(zeta, dtype=float)
    support = np.asarray(support, dtype=np.intp)
    if support.size == 0:
        return zeta
    half = interval / 2.0
    theta = np.asarray(grid_points, dtype=float)[support]
    A0 = shifted_manifold(theta, 0.0, array)
    D = manifold_derivative(np.clip(theta, -90.0, 90.0), array)
    R0 = Y - A0 @ rows
    B = D.T[:, :, None] * rows[:, None, :]            # (k, M, T)
    z = zeta[support].copy()
    for _ in range(iterations):
        R = R0 - np.tensordot(z, B, axes=1)
        w = gaussian_kernel(R, sigma)
        wB = w[None] * B
        H = np.real(np.einsum("imt,jmt->ij", B.conj(), wB))
        g = np.real(np.einsum("imt,mt->i", wB.conj(), R0))
        lam = np.linalg.eigvalsh(H)
        if not lam[0] > lam[-1] / COND_LIMIT:
            return zeta
        z = z + damping * (np.linalg.solve(H, g) - z)
    z = np.clip(z, np.nextafter(-half, 0.0), half)
    zeta[support] = z
    return zeta


def _decode_population(population, Y, A, knee, sigma):
    N = A.shape[1]
    if knee is None:
        decoder = Decoder.from_reference(Y, A, np.zeros((N, Y.shape[1])), sigma)
    else:
        decoder = Decoder.from_knee(Y, A, knee.support, knee.rows, sigma)
    supports = [ind.support for ind in population.individuals]
    rows = decoder.rows(supports)
    f1, f2 = evaluate_rows(A, Y, supports, rows, sigma)
    inds = [Individual(s, r, int(a), float(b)) for s, r, a, b in zip(supports, rows, f1, f2)]
    out = Population(inds, population.zeta)
    out.refresh_ranking()
    return out


def _rescore(population, Y, A, sigma):
    inds = population.individuals
    f1, f2 = evaluate_rows(A, Y, [i.support for i in inds], [i.rows for i in inds], sigma)
    for ind, a, b in zip(inds, f1, f2):
        ind.f1, ind.f2 = int(a), float(b)
    population.refresh_ranking()


def _try_knee(population, M, fallback):
    try:
        return knee_of(population, M)
    except KneeUnavailableError:
        return fallback


def run(Y, grid, array, config=None, seed=None):
    """Estimate directions of arrival from an ``M x T`` snapshot matrix.

    Parameters
    ----------
    Y : ndarray, shape (M, T)
    grid : Grid
    array : ArrayConfig
    config : SolverConfig, optional
    seed : int, SeedSequence or Generator, optional

    Returns
    -------
    EstimationResult

    Raises
    ------
    EstimationFailedError
        If no knee solution was ever available.
    """
    config = config or SolverConfig()
    Y = check_snapshots(Y, array.num_sensors)
    rng = check_random_state(seed)
    theta0 = grid.points
    N, M, T = len(grid), array.num_sensors, Y.shape[1]
    pm = config.mutation_prob if config.mutation_prob is not None else 1.0 / N
    step = config.step if config.step is not None else grid.interval / 100.0
    schedule = KernelSchedule.from_data(Y)
    start = time.perf_counter()

    zeta = np.zeros(N)
    A = shifted_manifold(theta0, zeta, array)
    E = initialize(A, Y, config.population_size, rng)
    seed_pop = Population([Individual(np.flatnonzero(e), None) for e in E], zeta)
    population = _decode_population(seed_pop, Y, A, None, schedule(0))
    knee = _try_knee(population, M, None)

    trace = []
    previous = None
    quiet = 0
    converged = False
    G = 0
    for G in range(config.max_generations):
        sigma = schedule(G)
        if G > 0:
            _rescore(population, Y, A, sigma)
            knee = _try_knee(population, M, knee)
        population, knee, _ = on_grid(
            population, knee, Y, A, sigma, rng,
            pc=config.crossover_prob, pm=pm,
            max_generations=config.inner_max, patience=config.inner_patience,
        )
        if knee is None:
            trace.append(TraceRecord(G, 0, float("nan"), sigma, time.perf_counter() - start))
            continue
        trace.append(TraceRecord(G, knee.f1, knee.f2, sigma, time.perf_counter() - start))
        refined = knee
        if config.refinement == "forward-search":
            zeta = forward_search(zeta, knee.support, knee.rows, Y, theta0, array, sigma,
                                  step=step, max_steps=config.forward_max,
                                  interval=grid.interval, seed=rng)
        elif config.refinement == "taylor":
            zeta = taylor_refine(zeta, knee.support, knee.rows, Y, theta0, array, sigma,
                                 interval=grid.interval)
        population.zeta = zeta
        A = shifted_manifold(theta0, zeta, array)
        population = _decode_population(population, Y, A, refined, sigma)

        S_knee = knee.signal(N)
        if previous is not None:
            change = np.sum(np.abs(S_knee - previous) ** 2) / (N * T)
            quiet = quiet + 1 if change < config.tol else 0
        previous = S_knee
        if quiet >= config.window:
            converged = True
            break

    if knee is None:
        raise EstimationFailedError("no knee solution found in any generation", trace)
    active = knee.nonzero
    doas = np.sort(theta0[active] + zeta[active])
    front_mask = population.rank == 0
    return EstimationResult(
        doas=doas,
        n_sources=int(knee.f1),
        zeta=zeta,
        trace=trace,
        converged=converged,
        generations=G + 1,
        knee_support=knee.support.copy(),
        knee_signal=knee.rows.copy(),
        front=population.objectives[front_mask],
    )
