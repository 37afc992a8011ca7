import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mobea.array import ArrayConfig, Grid, Scenario, manifold, synthesize
from mobea.correntropy import clf
from mobea.exceptions import ConfigurationError, KneeUnavailableError
from mobea.moea import (
    Individual,
    Population,
    binary_tournament,
    candidate_atoms,
    crossover_mutation,
    crowding_distance,
    environmental_selection,
    evaluate,
    initialize,
    knee_identification,
    knee_of,
    nondominated_sort,
    on_grid,
)


def brute_force_fronts(F):
    """Peel fronts by checking every pair directly."""
    F = [tuple(p) for p in F]
    remaining = set(range(len(F)))
    rank = [None] * len(F)
    level = 0
    while remaining:
        front = [i for i in remaining
                 if not any(all(a <= b for a, b in zip(F[j], F[i])) and F[j] != F[i]
                            for j in remaining)]
        for i in front:
            rank[i] = level
        remaining -= set(front)
        level += 1
    return np.array(rank)


def random_objectives(rng, n):
    return np.column_stack([rng.integers(0, 8, n), rng.choice(rng.random(max(n // 2, 1)), n)])


def test_sort_matches_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(200):
        F = random_objectives(rng, int(rng.integers(1, 60)))
        np.testing.assert_array_equal(nondominated_sort(F), brute_force_fronts(F))


def test_sort_examples():
    F = np.array([[1, 0.5], [2, 0.2], [2, 0.6], [3, 0.2], [1, 0.5]])
    np.testing.assert_array_equal(nondominated_sort(F), [0, 0, 1, 1, 0])


def test_crowding_boundaries_infinite():
    F = np.array([[1, 0.9], [2, 0.5], [3, 0.3], [4, 0.2]])
    d = crowding_distance(F, np.zeros(4, dtype=int))
    assert np.isinf(d[0]) and np.isinf(d[3])
    np.testing.assert_allclose(d[1], (3 - 1) / 3 + (0.9 - 0.3) / 0.7)
    np.testing.assert_allclose(d[2], (4 - 2) / 3 + (0.5 - 0.2) / 0.7)


def test_environmental_selection_example():
    F = np.array([[1, 0.8], [2, 0.5], [3, 0.2], [4, 0.1], [2, 0.9], [3, 0.6], [5, 0.7]])
    keep = environmental_selection(F, 5)
    # front 0 is 0..3; from front 1 {4, 5} both are boundary points, the tie goes to lower f1
    np.testing.assert_array_equal(sorted(keep), [0, 1, 2, 3, 4])
    with pytest.raises(ConfigurationError):
        environmental_selection(F, 8)


def test_selection_is_elitist():
    rng = np.random.default_rng(1)
    for _ in range(100):
        F = random_objectives(rng, 40)
        keep = environmental_selection(F, 20)
        rank = nondominated_sort(F)
        front0 = np.flatnonzero(rank == 0)
        if front0.size <= 20:
            assert set(front0) <= set(keep)
        assert rank[keep].max() <= np.sort(rank)[19]


def test_knee_examples():
    F = np.array([[1, 0.8], [3, 0.1], [5, 0.09]])
    assert knee_identification(F, 8) == 1
    assert knee_identification(np.array([[1, 0.5], [2, 0.3]]), 8) == 1
    assert knee_identification(np.array([[2, 0.3]]), 8) == 0
    # the f1 = M point has the lowest loss but is never eligible
    F = np.array([[1, 0.8], [3, 0.1], [8, 0.0]])
    assert knee_identification(F, 8) == 1
    with pytest.raises(KneeUnavailableError):
        knee_identification(np.array([[8, 0.0], [9, 0.0]]), 8)
    with pytest.raises(KneeUnavailableError):
        knee_identification(np.array([[0, 1.0]]), 8)


def front_strategy():
    return st.lists(st.floats(0.01, 1.0), min_size=1, max_size=7, unique=True).map(
        lambda losses: np.column_stack([np.arange(1, len(losses) + 1), sorted(losses, reverse=True)])
    )


@given(front_strategy(), st.floats(0.1, 10), st.floats(-5, 5))
def test_knee_invariant_to_affine_loss(F, a, b):
    G = F.copy()
    G[:, 1] = a * F[:, 1] + b
    assert knee_identification(F, 8) == knee_identification(G, 8)


@given(front_strategy(), st.integers(1, 4))
def test_knee_invariant_to_scaled_counts(F, a):
    G = F.copy()
    G[:, 0] = a * F[:, 0]
    assert knee_identification(F, 8) == knee_identification(G, a * 7 + 1)


def steering_data(seed=0, doas=(-2.0, 6.0, 20.0)):
    arr = ArrayConfig(8)
    grid = Grid.from_interval(2.0)
    Y, _ = synthesize(Scenario(arr, grid, doas, 20), seed)
    return manifold(grid.points, arr), Y, grid


def test_initialize_contracts():
    A, Y, grid = steering_data()
    E = initialize(A, Y, 50, seed=3)
    assert E.shape == (50, len(grid)) and E.dtype == bool
    counts = E.sum(axis=1)
    assert counts.min() >= 1 and counts.max() <= 7
    pool = candidate_atoms(A, Y, 16)
    assert not E[:, np.setdiff1d(np.arange(len(grid)), pool)].any()
    np.testing.assert_array_equal(E, initialize(A, Y, 50, seed=3))
    with pytest.raises(ConfigurationError):
        initialize(A[:, :10], Y, 50)


def test_candidate_atoms_contain_sources():
    A, Y, grid = steering_data()
    pool = candidate_atoms(A, Y, 16)
    assert set(np.searchsorted(grid.points, [-2.0, 6.0, 20.0])) <= set(pool)


def test_crossover_mutation_examples():
    P = np.zeros((2, 10), dtype=bool)
    P[0, :] = True
    np.testing.assert_array_equal(crossover_mutation(P, 0.0, 0.0, seed=0), P)
    C = crossover_mutation(P, 1.0, 0.0, seed=0)
    cut = int(np.argmin(C[0]))
    assert 1 <= cut <= 9
    np.testing.assert_array_equal(C[0], np.arange(10) < cut)
    np.testing.assert_array_equal(C[1], np.arange(10) >= cut)
    np.testing.assert_array_equal(crossover_mutation(P, 0.0, 1.0, seed=0), ~P)


def test_crossover_preserves_column_counts():
    rng = np.random.default_rng(4)
    P = rng.random((20, 30)) < 0.3
    C = crossover_mutation(P, 0.9, 0.0, seed=5)
    np.testing.assert_array_equal(C.sum(axis=0), P.sum(axis=0))


def test_binary_tournament_prefers_better():
    rank = np.array([0, 1])
    crowd = np.array([0.0, np.inf])
    picks = binary_tournament(rank, crowd, 1000, seed=0)
    # index 1 only wins when drawn twice
    assert 0.15 < np.mean(picks == 1) < 0.35


def test_evaluate_examples():
    A, Y, grid = steering_data()
    N = len(grid)
    e = np.zeros(N, dtype=bool)
    assert evaluate(e, np.zeros((N, 20)), A, Y, 0.5) == (0, pytest.approx(clf(Y, np.zeros_like(Y), 0.5)))
    rng = np.random.default_rng(6)
    S = np.zeros((N, 20), dtype=complex)
    e[[3, 7, 9]] = True
    S[3] = rng.standard_normal(20)
    S[9] = 1e-13
    f1, f2 = evaluate(e, S, A, Y, 0.5)
    assert f1 == 1
    assert f2 == pytest.approx(clf(Y, A @ S, 0.5), abs=1e-15)


def _population(A, Y, seed, size=20):
    from mobea.decode import Decoder
    from mobea.moea import evaluate_rows

    E = initialize(A, Y, size, seed)
    supports = [np.flatnonzero(e) for e in E]
    rows = Decoder(Y, A, np.ones(Y.shape)).rows(supports)
    f1, f2 = evaluate_rows(A, Y, supports, rows, 1.0)
    return Population([Individual(s, r, int(a), float(b)) for s, r, a, b in zip(supports, rows, f1, f2)],
                      np.zeros(A.shape[1]))


def test_on_grid_keeps_size_and_limits():
    A, Y, _ = steering_data()
    pop = _population(A, Y, 7)
    rng = np.random.default_rng(7)
    before = min(ind.f2 for ind in pop.individuals if ind.f1 == 3) if any(
        ind.f1 == 3 for ind in pop.individuals) else None
    knee = knee_of(pop, 8)
    out, knee, gens = on_grid(pop, knee, Y, A, 1.0, rng, pc=0.9, pm=1 / A.shape[1], max_generations=20)
    assert len(out) == len(pop)
    assert 1 <= gens <= 20
    assert all(ind.support.size < 8 for ind in out.individuals)
    assert len({ind.key for ind in out.individuals}) == len(out)
    assert knee is not None and knee.f1 >= 1
    if before is not None:
        assert min(ind.f2 for ind in out.individuals if ind.f1 <= 3) <= before + 1e-15
