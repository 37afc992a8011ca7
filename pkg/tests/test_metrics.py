import itertools
import math

import numpy as np
import pytest

from mobea.exceptions import DomainError, NotAdmissibleError
from mobea.experiment import TrialRecord
from mobea.metrics import avg_source_number, compute_rmse, hungarian_assign


def exhaustive_cost(est, truth):
    return min(sum((t - est[j]) ** 2 for t, j in zip(truth, perm))
               for perm in itertools.permutations(range(len(est)), len(truth)))


def test_hungarian_examples():
    matched, cost = hungarian_assign([20.0, -2.0, 6.0], [-2.0, 6.0, 20.0])
    np.testing.assert_array_equal(matched, [-2.0, 6.0, 20.0])
    assert cost == 0.0
    matched, cost = hungarian_assign([0.0, 10.0, 5.1], [5.0])
    assert matched[0] == 5.1 and cost == pytest.approx(0.01)
    with pytest.raises(NotAdmissibleError):
        hungarian_assign([1.0], [1.0, 2.0])
    with pytest.raises(DomainError):
        hungarian_assign([1.0], [])


def test_hungarian_matches_enumeration():
    rng = np.random.default_rng(0)
    for _ in range(300):
        K = int(rng.integers(1, 7))
        Kh = int(rng.integers(K, 9))
        truth = rng.uniform(-90, 90, K)
        est = rng.uniform(-90, 90, Kh)
        matched, cost = hungarian_assign(est, truth)
        assert cost == pytest.approx(exhaustive_cost(est, truth), rel=1e-12, abs=1e-9)
        assert len(set(matched)) == K


def test_rmse_examples():
    rmse, n = compute_rmse([[1.0, 3.0], [0.0, 1.0]], [0.0, 1.0])
    # squared errors 1 + 4 and 0 over 2 trials x 2 sources
    assert n == 2 and rmse == pytest.approx(math.sqrt(5 / 4))
    rmse, n = compute_rmse([[2.0], [0.0, 1.0]], [0.0, 1.0])
    assert n == 1 and rmse == 0.0
    rmse, n = compute_rmse([[2.0]], [0.0, 1.0])
    assert n == 0 and math.isnan(rmse)


def test_rmse_permutation_invariant():
    rng = np.random.default_rng(1)
    truth = np.array([-2.0, 6.0, 20.0])
    trials = [truth + rng.normal(0, 0.5, 3) for _ in range(10)]
    shuffled = [rng.permutation(t) for t in trials]
    assert compute_rmse(trials, truth) == compute_rmse(shuffled, truth)


def test_rmse_with_records_skips_failures():
    ok = TrialRecord(0, 0, np.array([0.0, 2.0]), 2, 0.1, True, 3, False, None)
    failed = TrialRecord(1, 1, None, 0, 0.1, False, 0, True, "boom")
    assert compute_rmse([ok, failed], [0.0, 1.0]) == (pytest.approx(math.sqrt(0.5)), 1)
    assert avg_source_number([ok, failed]) == 1.0


def test_avg_source_number():
    assert avg_source_number([3, 3, 2, 4]) == 3.0
    assert avg_source_number([None, 2]) == 1.0
    with pytest.raises(DomainError):
        avg_source_number([])
