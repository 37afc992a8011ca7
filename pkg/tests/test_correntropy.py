import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from mobea.correntropy import (
    DECAY_RATE,
    SIGMA_MIN,
    KernelSchedule,
    clf,
    gaussian_kernel,
    kernel_size,
    sigma_bounds_from_data,
)
from mobea.exceptions import DegenerateDataError, DomainError

finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_kernel_examples():
    assert gaussian_kernel(0.0, 1.0) == 1.0
    assert gaussian_kernel(2.0, 2.0) == pytest.approx(math.exp(-0.5), rel=1e-15)
    assert gaussian_kernel(3 + 4j, 5.0) == pytest.approx(math.exp(-0.5), rel=1e-15)


@pytest.mark.parametrize("sigma", [0.0, -1.0])
def test_kernel_rejects_bad_sigma(sigma):
    with pytest.raises(DomainError):
        gaussian_kernel(1.0, sigma)


def test_clf_examples():
    X = np.array([[1 + 2j, 3j]])
    assert clf(X, X, 0.7) == 0.0
    assert clf(np.array([0.5]), np.array([0.0]), 0.5) == pytest.approx(1 - math.exp(-0.5), rel=1e-15)
    two = clf(np.array([0.0, 0.5j]), np.zeros(2), 0.5)
    assert two == pytest.approx(1 - (1 + math.exp(-0.5)) / 2, rel=1e-15)
    assert two == pytest.approx(0.1967, abs=1e-4)


def test_clf_shape_errors():
    with pytest.raises(DomainError):
        clf(np.zeros((2, 3)), np.zeros((3, 2)), 1.0)
    with pytest.raises(DomainError):
        clf(np.zeros(0), np.zeros(0), 1.0)


# |X - Z| / sigma <= 8 keeps every kernel value above ~1e-14; smaller values
# make 1 - mean round to exactly 1 in double precision
@given(arrays(complex, (3, 4), elements=st.complex_numbers(max_magnitude=10, allow_nan=False)),
       arrays(complex, (3, 4), elements=st.complex_numbers(max_magnitude=10, allow_nan=False)),
       st.floats(2.5, 100))
def test_clf_bounds_and_symmetry(X, Z, sigma):
    v = clf(X, Z, sigma)
    assert 0.0 <= v < 1.0
    assert v == clf(Z, X, sigma)


@given(arrays(float, 6, elements=finite), st.floats(1.0, 10.0), st.floats(0.05, 10))
def test_clf_monotone_in_residual_scale(r, t, sigma):
    assert clf(t * r, np.zeros(6), sigma) >= clf(r, np.zeros(6), sigma) - 1e-15


@given(arrays(float, 5, elements=finite), st.integers(0, 4), st.floats(1e3, 1e300))
def test_single_outlier_moves_clf_by_at_most_one_over_p(r, i, big):
    Z = np.zeros(5)
    out = r.copy()
    out[i] = big
    assert abs(clf(out, Z, 1.0) - clf(r, Z, 1.0)) <= 1 / 5 + 1e-15


def test_sigma_bounds_linear_quantiles():
    Y = np.arange(1, 9, dtype=float) * np.exp(1j * np.linspace(0, 3, 8))
    # type-7 quantiles of 1..8: 1 + 0.125*7 and 1 + 0.875*7
    lo, hi = 1 + 0.875, 1 + 6.125
    sigma_max, sigma_min = sigma_bounds_from_data(Y)
    assert sigma_min == 0.03
    assert sigma_max == pytest.approx(0.5 * (hi - lo) - 0.03, rel=1e-15)


def test_sigma_bounds_degenerate():
    with pytest.raises(DegenerateDataError):
        sigma_bounds_from_data(np.full((4, 5), 2 + 0j))


def test_sigma_bounds_homogeneous():
    rng = np.random.default_rng(1)
    Y = rng.standard_normal((8, 20)) + 1j * rng.standard_normal((8, 20))
    a, _ = sigma_bounds_from_data(Y)
    b, _ = sigma_bounds_from_data(10 * Y)
    assert b + 0.03 == pytest.approx(10 * (a + 0.03), rel=1e-13)


def test_schedule_examples():
    sched = KernelSchedule(1.0)
    assert sched.sigma_min == SIGMA_MIN and sched.decay == DECAY_RATE
    assert kernel_size(0, sched) == 1.03
    assert kernel_size(200, sched) == pytest.approx(math.exp(-0.04) + 0.03, rel=1e-15)
    assert kernel_size(10 ** 7, sched) == pytest.approx(0.03, abs=1e-15)


def test_schedule_strictly_decreasing():
    sched = KernelSchedule(0.8)
    values = [sched(g) for g in range(300)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert min(values) > SIGMA_MIN


def test_schedule_validation():
    with pytest.raises(DomainError):
        KernelSchedule(0.0)
    with pytest.raises(DomainError):
        kernel_size(-1, KernelSchedule(1.0))
