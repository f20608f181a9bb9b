import math

import numpy as np
import pytest

from qmcd.errors import BudgetExceededError, InvalidArgumentError
from qmcd.models.discrepancy import CostMetric, CostSpec, DiscrepancyKind, DiscrepancySpec
from qmcd.services import discrepancy
from qmcd.services.transport import (
    cost_matrix,
    sinkhorn_divergence,
    sinkhorn_entropic,
    sliced_wasserstein,
    wasserstein_1d,
    wasserstein_lp,
)


# Test 1-D Wasserstein
def test_wasserstein_1d_examples():
    assert wasserstein_1d([0.0], [1.0]) == 1.0
    assert wasserstein_1d([0.0, 1.0], [0.0, 1.0]) == 0.0
    assert wasserstein_1d([0.0, 0.0], [0.0, 1.0]) == 0.5


def test_wasserstein_1d_unequal_sizes():
    assert wasserstein_1d([0.0], [0.0, 1.0]) == pytest.approx(0.5, abs=1e-15)
    X, Y = [0.0, 1.0, 2.0], [0.5, 1.5]
    assert wasserstein_1d(X, Y) == pytest.approx(wasserstein_lp(X, Y), abs=1e-12)


def test_wasserstein_1d_is_translation_invariant(rng):
    X, Y = rng.standard_normal(40), rng.standard_normal(25)
    assert wasserstein_1d(X + 3.7, Y + 3.7, CostSpec(p=2)) == pytest.approx(wasserstein_1d(X, Y, CostSpec(p=2)), abs=1e-12)


def test_wasserstein_1d_rejects_higher_dimension():
    with pytest.raises(InvalidArgumentError):
        wasserstein_1d(np.zeros((3, 2)), np.zeros((3, 2)))


# Test exact LP
def test_wasserstein_lp_matches_sorting(rng):
    for _ in range(100):
        n, m = rng.integers(1, 65, size=2)
        X, Y = rng.standard_normal((n, 1)), rng.standard_normal((m, 1))
        p = float(rng.choice([1.0, 2.0]))
        assert abs(wasserstein_lp(X, Y, CostSpec(p=p)) - wasserstein_1d(X, Y, CostSpec(p=p))) < 1e-9


def test_wasserstein_lp_two_dimensional_example():
    X = [[0.0, 0.0], [1.0, 0.0]]
    Y = [[0.0, 1.0], [1.0, 1.0]]
    assert wasserstein_lp(X, Y) == pytest.approx(1.0, abs=1e-12)


def test_wasserstein_lp_identical_measures(rng):
    X = rng.random((20, 3))
    assert wasserstein_lp(X, X) == pytest.approx(0.0, abs=1e-12)


def test_wasserstein_lp_triangle_inequality(rng):
    for _ in range(100):
        X, Y, Z = (rng.random((rng.integers(1, 33), 2)) for _ in range(3))
        assert wasserstein_lp(X, Z) <= wasserstein_lp(X, Y) + wasserstein_lp(Y, Z) + 1e-9


def test_wasserstein_lp_budget():
    with pytest.raises(BudgetExceededError) as excinfo:
        wasserstein_lp(np.zeros((4, 2)), np.zeros((4, 2)), budget=10)
    assert excinfo.value.budget == 10
    assert not excinfo.value.is_partial


def test_cost_metrics():
    X, Y = [[0.0, 0.0]], [[3.0, 4.0]]
    assert cost_matrix(X, Y, CostSpec(metric=CostMetric.EUCLIDEAN))[0, 0] == pytest.approx(5.0)
    assert cost_matrix(X, Y, CostSpec(metric=CostMetric.L1))[0, 0] == pytest.approx(7.0)
    assert cost_matrix(X, Y, CostSpec(metric=CostMetric.LINF, p=2))[0, 0] == pytest.approx(16.0)


# Test entropic OT
def test_sinkhorn_single_point():
    result = sinkhorn_entropic([[0.4]], [[0.4]], lambda_s=1.0)
    assert result.converged
    assert result.value == 0.0


def test_sinkhorn_small_regularization_approaches_lp():
    X = np.array([[0.0], [0.3], [0.7], [1.1]])
    Y = np.array([[0.2], [0.25], [0.9], [1.5]])
    result = sinkhorn_entropic(X, Y, lambda_s=1e-3, tol=1e-6, max_iter=100000)
    assert abs(result.value - wasserstein_lp(X, Y)) < 1e-2


def test_sinkhorn_symmetric(rng):
    X, Y = rng.random((12, 2)), rng.random((9, 2))
    assert abs(sinkhorn_entropic(X, Y, 1.0).value - sinkhorn_entropic(Y, X, 1.0).value) < 1e-12


def test_sinkhorn_marginals_within_tolerance(rng):
    result = sinkhorn_entropic(rng.random((10, 2)), rng.random((14, 2)), 0.5, tol=1e-8)
    assert result.converged
    assert 0.0 <= result.marginal_error <= 1e-8


def test_sinkhorn_monotone_in_regularization(rng):
    X, Y = rng.random((8, 2)), rng.random((8, 2))
    values = [sinkhorn_entropic(X, Y, lam, tol=1e-9, max_iter=100000).value for lam in (0.01, 0.1, 1.0, 10.0)]
    assert all(b >= a - 1e-7 for a, b in zip(values, values[1:]))


def test_sinkhorn_reports_non_convergence(rng):
    result = sinkhorn_entropic(rng.random((10, 1)), rng.random((10, 1)), 0.01, tol=1e-12, max_iter=1)
    assert not result.converged
    assert result.iterations == 1


def test_sinkhorn_divergence_of_identical_measures(rng):
    X = rng.random((15, 2))
    assert abs(sinkhorn_divergence(X, X, 1.0, tol=1e-9)) <= 2e-9


def test_sinkhorn_divergence_is_nonnegative(rng):
    for lam in (0.1, 1.0, 10.0):
        for _ in range(10):
            d = int(rng.integers(1, 4))
            X, Y = rng.random((rng.integers(2, 33), d)), rng.random((rng.integers(2, 33), d))
            assert sinkhorn_divergence(X, Y, lam, tol=1e-8, max_iter=100000) >= -2e-8


def test_sinkhorn_divergence_large_regularization_is_half_energy_distance(rng):
    X = rng.standard_normal((16, 1))
    Y = rng.standard_normal((16, 1)) + 1.0

    def mean_distance(A, B):
        return np.mean([abs(a - b) for a in A[:, 0] for b in B[:, 0]])

    energy = 2.0 * mean_distance(X, Y) - mean_distance(X, X) - mean_distance(Y, Y)
    value = sinkhorn_divergence(X, Y, 1e3)
    assert abs(value - 0.5 * energy) <= 0.05 * 0.5 * energy


# Test sliced Wasserstein
def test_sliced_identical_measures(rng):
    X = rng.random((20, 3))
    assert sliced_wasserstein(X, X, L=7) == 0.0


def test_sliced_one_dimension_equals_exact(rng):
    X, Y = rng.standard_normal((30, 1)), rng.standard_normal((30, 1))
    for seed in (0, 1, 2):
        assert sliced_wasserstein(X, Y, L=8, direction_seed=seed) == pytest.approx(wasserstein_1d(X, Y), rel=1e-12)


def test_sliced_two_points_on_the_circle():
    value = sliced_wasserstein([[0.0, 0.0]], [[1.0, 0.0]], L=100000, direction_seed=3)
    assert abs(value - 2.0 / math.pi) < 0.01


def test_sliced_is_seeded(rng):
    X, Y = rng.random((25, 4)), rng.random((18, 4))
    assert sliced_wasserstein(X, Y, 50, direction_seed=9) == sliced_wasserstein(X, Y, 50, direction_seed=9)
    assert sliced_wasserstein(X, Y, 16, direction_seed=9, qmc_directions=True) > 0.0


def test_sliced_needs_a_slice():
    with pytest.raises(InvalidArgumentError):
        sliced_wasserstein([[0.0]], [[1.0]], L=0)


# Test discrepancy dispatch
def test_evaluate_dispatches_by_kind(rng, se_kernel):
    X, Y = rng.random((10, 1)), rng.random((12, 1))
    spec = DiscrepancySpec(kind=DiscrepancyKind.WASSERSTEIN)
    assert discrepancy.evaluate(spec, X, Y) == wasserstein_1d(X, Y)

    X2, Y2 = rng.random((10, 2)), rng.random((12, 2))
    assert discrepancy.evaluate(spec, X2, Y2) == wasserstein_lp(X2, Y2)

    sliced = DiscrepancySpec(kind=DiscrepancyKind.SLICED, slices=5, direction_seed=4)
    assert discrepancy.evaluate(sliced, X2, Y2) == sliced_wasserstein(X2, Y2, 5, direction_seed=4)


def test_note_explains_negative_plugin_values():
    assert "n^2" in discrepancy.note(DiscrepancySpec(kind=DiscrepancyKind.MMD), [[0.0]], [[0.0]])
    assert discrepancy.note(DiscrepancySpec(kind=DiscrepancyKind.MMD, include_diagonal=True), [[0.0]], [[0.0]]) == ""
