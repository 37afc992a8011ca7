"""On-grid multiobjective search over active sets.

Each individual is a binary active set; its objectives are the number of
nonzero rows of the decoded signal matrix and the correntropy loss of the fit.
Selection is NSGA-II (nondominated sorting plus crowding distance) and the
working solution is the knee of the first front.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_random_state
from .correntropy import gaussian_kernel
from .decode import Decoder
from .exceptions import ConfigurationError, KneeUnavailableError

__all__ = [
    "ROW_TOL",
    "Individual",
    "Population",
    "candidate_atoms",
    "initialize",
    "evaluate",
    "evaluate_rows",
    "nondominated_sort",
    "crowding_distance",
    "environmental_selection",
    "binary_tournament",
    "crossover_mutation",
    "knee_identification",
    "knee_of",
    "on_grid",
]

#: Rows with l2 norm at or below this count as zero when counting sources.
ROW_TOL = 1e-12


@dataclass
class Individual:
    """An active set with its decoded rows and objectives.

    ``support`` holds the sorted grid indices of the active set and ``rows``
    the matching ``(k, T)`` block of the signal matrix.
    """

    support: np.ndarray
    rows: np.ndarray
    f1: int = 0
    f2: float = 1.0

    @property
    def objectives(self):
        return (self.f1, self.f2)

    @property
    def key(self):
        return self.support.tobytes()

    @property
    def nonzero(self):
        """Grid indices of the rows that actually carry energy."""
        if self.support.size == 0:
            return self.support
        return self.support[np.linalg.norm(self.rows, axis=1) > ROW_TOL]

    def active_set(self, n_grid):
        e = np.zeros(n_grid, dtype=bool)
        e[self.support] = True
        return e

    def signal(self, n_grid):
        S = np.zeros((n_grid, self.rows.shape[1]), dtype=complex)
        S[self.support] = self.rows
        return S


@dataclass
class Population:
    """Individuals sharing one grid-mismatch vector."""

    individuals: list
    zeta: np.ndarray
    rank: np.ndarray = field(default=None, repr=False)
    crowding: np.ndarray = field(default=None, repr=False)

    def __len__(self):
        return len(self.individuals)

    @property
    def objectives(self):
        return np.array([ind.objectives for ind in self.individuals], dtype=float).reshape(-1, 2)

    def refresh_ranking(self):
        F = self.objectives
        self.rank = nondominated_sort(F)
        self.crowding = crowding_distance(F, self.rank)


def candidate_atoms(A, Y, n_candidates):
    """Indices of the ``n_candidates`` grid points most correlated with the data.

    Correlation of grid point ``j`` is ``sum_t |<y(t), a_j>|``; ties keep the
    lower index.
    """
    tau = np.abs(A.conj().T @ Y).sum(axis=1)
    order = np.argsort(-tau, kind="stable")
    return np.sort(order[:n_candidates])


def initialize(A, Y, pop_size, seed=None):
    """Random active sets drawn from the ``2M`` most correlated grid points.

    Each set has a cardinality drawn uniformly from ``1 .. M-1``.

    Returns
    -------
    ndarray of bool, shape (pop_size, N)
    """
    M, N = A.shape
    if N < 2 * M:
        raise ConfigurationError(f"grid of {N} points is smaller than 2M = {2 * M}")
    if pop_size < 2:
        raise ConfigurationError("population size must be at least 2")
    rng = check_random_state(seed)
    pool = candidate_atoms(A, Y, 2 * M)
    E = np.zeros((pop_size, N), dtype=bool)
    sizes = rng.integers(1, M, size=pop_size)
    for i, k in enumerate(sizes):
        E[i, rng.choice(pool, size=k, replace=False)] = True
    return E


def evaluate_rows(A, Y, supports, rows, sigma):
    """Objectives for decoded individuals, batched by support size.

    Returns
    -------
    f1 : ndarray of int
    f2 : ndarray of float
    """
    n = len(supports)
    f1 = np.zeros(n, dtype=int)
    f2 = np.empty(n)
    groups = {}
    for i, sup in enumerate(supports):
        groups.setdefault(len(sup), []).append(i)
    for k, members in groups.items():
        if k == 0:
            f2[members] = 1.0 - np.mean(gaussian_kernel(Y, sigma))
            continue
        idx = np.stack([supports[i] for i in members])
        R = np.stack([rows[i] for i in members])                  # (n, k, T)
        fit = A[:, idx].transpose(1, 0, 2) @ R                     # (n, M, T)
        resid = Y[None] - fit
        f2[members] = 1.0 - gaussian_kernel(resid, sigma).mean(axis=(1, 2))
        f1[members] = (np.linalg.norm(R, axis=2) > ROW_TOL).sum(axis=1)
    return f1, f2


def evaluate(e, S, A, Y, sigma):
    """Objectives ``(f1, f2)`` of one active set and its decoded ``N x T`` signal.

    ``A`` is the manifold at the current shifted grid.
    """
    sup = np.flatnonzero(e)
    f1, f2 = evaluate_rows(A, Y, [sup], [np.asarray(S)[sup]], sigma)
    return int(f1[0]), float(f2[0])


def _dominance(F):
    le = (F[:, None, :] <= F[None, :, :]).all(axis=2)
    lt = (F[:, None, :] < F[None, :, :]).any(axis=2)
    return le & lt      # [i, j]: i dominates j


def nondominated_sort(F):
    """Front index (0 = nondominated) of each row of the ``(n, 2)`` objective array."""
    F = np.asarray(F, dtype=float)
    n = F.shape[0]
    dom = _dominance(F)
    count = dom.sum(axis=0)
    rank = np.full(n, -1, dtype=int)
    current = np.flatnonzero(count == 0)
    level = 0
    while current.size:
        rank[current] = level
        count = count - dom[current].sum(axis=0)
        count[rank >= 0] = -1
        current = np.flatnonzero(count == 0)
        level += 1
    return rank


def crowding_distance(F, rank):
    """Crowding distance of every point within its own front.

    Boundary points of each objective get ``inf``; sorting is stable so
    duplicates resolve by input order.
    """
    F = np.asarray(F, dtype=float)
    dist = np.zeros(F.shape[0])
    for r in np.unique(rank):
        members = np.flatnonzero(rank == r)
        if members.size <= 2:
            dist[members] = np.inf
            continue
        for m in range(F.shape[1]):
            vals = F[members, m]
            order = members[np.argsort(vals, kind="stable")]
            lo, hi = F[order[0], m], F[order[-1], m]
            dist[order[0]] = dist[order[-1]] = np.inf
            if hi > lo:
                dist[order[1:-1]] += (F[order[2:], m] - F[order[:-2], m]) / (hi - lo)
    return dist


def environmental_selection(F, n_keep):
    """NSGA-II survivor selection.

    Whole fronts are admitted in order; the last admitted front is split by
    descending crowding distance, ties going to lower ``f1``, then lower
    ``f2``, then input order.

    Returns
    -------
    ndarray of int
        Indices of the survivors, in admission order.
    """
    F = np.asarray(F, dtype=float)
    if F.shape[0] < n_keep:
        raise ConfigurationError(f"cannot keep {n_keep} of {F.shape[0]} individuals")
    rank = nondominated_sort(F)
    crowd = crowding_distance(F, rank)
    order = np.arange(F.shape[0])
    # lexsort: last key is primary
    ranked = np.lexsort((order, F[:, 1], F[:, 0], -crowd, rank))
    return ranked[:n_keep]


def binary_tournament(rank, crowding, n, seed=None):
    """Pick ``n`` parent indices, each the winner of a random pair.

    Lower rank wins, then larger crowding distance, then the first drawn.
    """
    rng = check_random_state(seed)
    a = rng.integers(0, len(rank), size=n)
    b = rng.integers(0, len(rank), size=n)
    a_wins = (rank[a] < rank[b]) | ((rank[a] == rank[b]) & (crowding[a] >= crowding[b]))
    return np.where(a_wins, a, b)


def crossover_mutation(parents, pc, pm, seed=None):
    """One-point crossover on consecutive pairs, then bitwise mutation.

    Parameters
    ----------
    parents : ndarray of bool, shape (n, N)
        Mating pool; rows ``2i`` and ``2i + 1`` are paired. An odd last row
        is only mutated.
    pc, pm : float
        Crossover probability per pair and flip probability per bit.
    """
    rng = check_random_state(seed)
    parents = np.asarray(parents, dtype=bool)
    n, N = parents.shape
    children = parents.copy()
    for i in range(0, n - 1, 2):
        if rng.random() < pc:
            cut = rng.integers(1, N)
            children[i, cut:] = parents[i + 1, cut:]
            children[i + 1, cut:] = parents[i, cut:]
    flips = rng.random(children.shape) < pm
    return children ^ flips


def knee_identification(F, n_sensors):
    """Index of the knee among the points of a nondominated front.

    Points with ``f1 >= n_sensors`` are discarded and each ``f1`` keeps only
    its lowest ``f2``. The front is closed on the right by a flat segment out
    to ``f1 = n_sensors - 1`` (more atoms cannot push the loss below its
    floor). Source counts are normalised over ``[min f1, n_sensors - 1]`` and
    losses over their range; the knee is the point where the front bends the
    most, i.e. where the segment angle rises most from left to right. Fronts
    of one or two points return the lowest ``f2``. Ties go to lower ``f1``.

    Raises
    ------
    KneeUnavailableError
        If no point with ``0 < f1 < n_sensors`` remains.
    """
    F = np.asarray(F, dtype=float).reshape(-1, 2)
    eligible = np.flatnonzero(F[:, 0] < n_sensors)
    if eligible.size == 0:
        raise KneeUnavailableError("no front point has fewer than M sources")
    best = {}
    for i in eligible:
        f1 = F[i, 0]
        if f1 not in best or F[i, 1] < F[best[f1], 1]:
            best[f1] = i
    idx = np.array([best[f1] for f1 in sorted(best)])
    pts = F[idx]
    if idx.size <= 2:
        knee = idx[np.argmin(pts[:, 1])]
    else:
        x_lo, x_hi = pts[0, 0], max(pts[-1, 0], n_sensors - 1.0)
        y_lo, y_hi = pts[:, 1].min(), pts[:, 1].max()
        x = (pts[:, 0] - x_lo) / (x_hi - x_lo)
        y = (pts[:, 1] - y_lo) / (y_hi - y_lo if y_hi > y_lo else 1.0)
        if x[-1] < 1.0:
            x = np.append(x, 1.0)
            y = np.append(y, y[-1])
        angles = np.arctan2(np.diff(y), np.diff(x))
        bend = angles[1:] - angles[:-1]       # bend[j] belongs to point j + 1
        candidates = bend[: idx.size - 1]
        knee = idx[1 + np.argmax(candidates)]
    if F[knee, 0] < 1:
        raise KneeUnavailableError("the only eligible point is the empty solution")
    return int(knee)


def knee_of(population, n_sensors):
    """Knee individual of the population's first front."""
    if population.rank is None:
        population.refresh_ranking()
    front = np.flatnonzero(population.rank == 0)
    F = population.objectives[front]
    return population.individuals[front[knee_identification(F, n_sensors)]]


def on_grid(population, knee, Y, A, sigma, rng, *, pc, pm, max_generations=50, patience=5):
    """Evolve the active sets at a fixed grid mismatch.

    Offspring are decoded with weights taken from the current knee. Offspring
    with ``M`` or more atoms exceed the identifiable limit, and offspring
    repeating an active set already present, are dropped before selection.
    Stops after ``max_generations`` or once the knee's active set has stayed
    the same for ``patience`` generations.

    Returns
    -------
    population : Population
    knee : Individual or None
    generations : int
    """
    M = A.shape[0]
    N = A.shape[1]
    n_keep = len(population)
    if population.rank is None:
        population.refresh_ranking()
    unchanged = 0
    lt = 0
    for lt in range(1, max_generations + 1):
        parents = binary_tournament(population.rank, population.crowding, n_keep, rng)
        pool = np.stack([population.individuals[i].active_set(N) for i in parents])
        children = crossover_mutation(pool, pc, pm, rng)
        children = children[children.sum(axis=1) < M]
        seen = {ind.key for ind in population.individuals}
        supports = []
        for c in children:
            sup = np.flatnonzero(c)
            if sup.tobytes() not in seen:
                seen.add(sup.tobytes())
                supports.append(sup)
        if knee is None:
            decoder = Decoder.from_reference(Y, A, np.zeros((N, Y.shape[1])), sigma)
        else:
            decoder = Decoder.from_knee(Y, A, knee.support, knee.rows, sigma)
        rows = decoder.rows(supports)
        f1, f2 = evaluate_rows(A, Y, supports, rows, sigma)
        offspring = [Individual(s, r, int(a), float(b)) for s, r, a, b in zip(supports, rows, f1, f2)]
        combined = population.individuals + offspring
        F = np.array([ind.objectives for ind in combined], dtype=float)
        keep = environmental_selection(F, n_keep)
        population = Population([combined[i] for i in keep], population.zeta)
        population.refresh_ranking()
        try:
            new_knee = knee_of(population, M)
        except KneeUnavailableError:
            new_knee = knee
        if knee is not None and new_knee is not None and new_knee.key == knee.key:
            unchanged += 1
        else:
            unchanged = 0
        knee = new_knee
        if unchanged >= patience:
            break
    return population, knee, lt
