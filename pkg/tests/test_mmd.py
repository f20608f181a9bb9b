import math

import numpy as np
import pytest

from qmcd.errors import InvalidArgumentError, InvalidParameterError
from qmcd.models.discrepancy import KernelKind, KernelSpec
from qmcd.models.generator import GeneratorKind, GeneratorSpec
from qmcd.services.generators import gandk_generate, generate
from qmcd.services.mmd import (
    finite_difference_gradient,
    kernel_eval,
    kernel_matrix,
    mmd2_grad_theta,
    mmd2_plugin,
    mmd2_theta_terms,
    mmd2_u,
)
from qmcd.services.qmc_points import sobol


def _naive_plugin(X, Y, k):
    n, m = len(X), len(Y)
    sxx = sum(kernel_eval(k, X[i], X[j]) for i in range(n) for j in range(n) if i != j)
    syy = sum(kernel_eval(k, Y[i], Y[j]) for i in range(m) for j in range(m) if i != j)
    sxy = sum(kernel_eval(k, X[i], Y[j]) for i in range(n) for j in range(m))
    return sxx / n ** 2 + syy / m ** 2 - 2.0 * sxy / (n * m)


# Test kernels
def test_se_kernel_at_unit_distance():
    k = KernelSpec(lengthscale=1.0)
    assert kernel_eval(k, [0.0], [1.0]) == pytest.approx(math.exp(-1.0), rel=1e-15)


@pytest.mark.parametrize("kind", [KernelKind.MATERN32, KernelKind.MATERN52, KernelKind.MATERN72, KernelKind.SE])
def test_kernel_at_zero_distance_is_amplitude_squared(kind):
    k = KernelSpec(kind=kind, amplitude=2.0, lengthscale=0.7)
    assert kernel_eval(k, [0.3, -1.0], [0.3, -1.0]) == pytest.approx(4.0, rel=1e-15)


def test_matern_kernels_decrease_with_distance():
    r = np.linspace(0.0, 5.0, 50)[:, None]
    for kind in (KernelKind.MATERN32, KernelKind.MATERN52, KernelKind.MATERN72):
        values = kernel_matrix(KernelSpec(kind=kind, lengthscale=1.0), np.zeros((1, 1)), r)[0]
        assert np.all(np.diff(values) < 0)


def test_default_lengthscale_scales_with_dimension():
    k = KernelSpec()
    x = np.zeros(4)
    y = np.full(4, 1.5)
    # squared distance 9 over sigma^2 = 2.25 * 4
    assert kernel_eval(k, x, y) == pytest.approx(math.exp(-1.0), rel=1e-14)


def test_kernel_dimension_mismatch(se_kernel):
    with pytest.raises(InvalidArgumentError):
        kernel_eval(se_kernel, [0.0, 1.0], [0.0])


# Test plug-in estimator
def test_plugin_single_points(se_kernel):
    assert mmd2_plugin([[0.0]], [[0.0]], se_kernel) == -2.0
    expected = -2.0 * kernel_eval(se_kernel, [0.0], [1.0])
    assert mmd2_plugin([[0.0]], [[1.0]], se_kernel) == pytest.approx(expected, rel=1e-15)


def test_plugin_matches_double_loop(rng, se_kernel):
    for n, m in [(2, 3), (7, 7), (16, 11)]:
        X, Y = rng.standard_normal((n, 2)), rng.standard_normal((m, 2)) + 0.5
        assert abs(mmd2_plugin(X, Y, se_kernel) - _naive_plugin(X, Y, se_kernel)) < 1e-12


def test_plugin_symmetric_and_order_free(rng, se_kernel):
    X, Y = rng.standard_normal((40, 3)), rng.standard_normal((25, 3))
    value = mmd2_plugin(X, Y, se_kernel)
    assert mmd2_plugin(Y, X, se_kernel) == value
    assert mmd2_plugin(X[rng.permutation(40)], Y[rng.permutation(25)], se_kernel) == value


def test_vstatistic_of_identical_samples_is_zero(rng, se_kernel):
    X = rng.standard_normal((30, 2))
    assert abs(mmd2_plugin(X, X, se_kernel, include_diagonal=True)) < 1e-14


def test_plugin_self_comparison_is_negative(rng, se_kernel):
    X = rng.standard_normal((50, 1))
    assert mmd2_plugin(X, X, se_kernel) == pytest.approx(-2.0 / 50, rel=1e-12)


def test_plugin_separates_distributions(rng, se_kernel):
    X = rng.standard_normal((512, 1))
    Y = rng.standard_normal((512, 1)) + 1.0
    Z = rng.standard_normal((512, 1))
    assert mmd2_plugin(X, Y, se_kernel) > 0.05
    assert abs(mmd2_plugin(X, Z, se_kernel)) < 0.01


def test_dimension_mismatch(se_kernel):
    with pytest.raises(InvalidArgumentError):
        mmd2_plugin(np.zeros((3, 2)), np.zeros((3, 1)), se_kernel)


# Test U-statistic
def test_u_statistic_two_points():
    k = KernelSpec(amplitude=1.3, lengthscale=1.0)
    X = np.array([[0.0], [0.8]])
    expected = kernel_eval(k, [0.0], [0.8]) - 1.3 ** 2
    assert mmd2_u(X, X, k) == pytest.approx(expected, rel=1e-14)


def test_u_statistic_needs_two_points(se_kernel):
    with pytest.raises(InvalidArgumentError):
        mmd2_u([[0.0]], [[0.0], [1.0]], se_kernel)


def test_u_statistic_and_plugin_differ_by_same_sample_terms(rng, se_kernel):
    X, Y = rng.standard_normal((20, 2)), rng.standard_normal((13, 2))
    n, m = 20, 13
    sxx = sum(kernel_eval(se_kernel, X[i], X[j]) for i in range(n) for j in range(n) if i != j)
    syy = sum(kernel_eval(se_kernel, Y[i], Y[j]) for i in range(m) for j in range(m) if i != j)
    difference = mmd2_u(X, Y, se_kernel) - mmd2_plugin(X, Y, se_kernel)
    assert difference == pytest.approx(sxx / (n ** 2 * (n - 1)) + syy / (m ** 2 * (m - 1)), abs=1e-12)


def test_u_statistic_unbiased_for_identical_distributions(rng, se_kernel):
    values = [mmd2_u(rng.standard_normal((64, 1)), rng.standard_normal((64, 1)), se_kernel) for _ in range(40)]
    assert abs(np.mean(values)) < 3.0 * np.std(values) / np.sqrt(len(values)) + 1e-3


# Test gradients
def test_theta_free_generator_has_empty_gradient(se_kernel):
    spec = GeneratorSpec(kind=GeneratorKind.UNIFORM, d=1)
    ps = sobol(16, 1, scramble_seed=1)
    grad = mmd2_grad_theta(spec, spec.params([]), ps, ps.points, se_kernel)
    assert grad.values == []
    assert not grad.any_one_sided


def test_location_gradient_points_toward_data(location_spec, se_kernel):
    ps = sobol(256, 1, scramble_seed=3)
    Y = generate(location_spec, location_spec.params([0.0]), sobol(1024, 1, scramble_seed=4)).samples
    above = mmd2_grad_theta(location_spec, location_spec.params([0.5]), ps, Y, se_kernel)
    below = mmd2_grad_theta(location_spec, location_spec.params([-0.5]), ps, Y, se_kernel)
    assert above.values[0] > 0
    assert below.values[0] < 0


def test_gandk_gradient_matches_fourth_order_differences(se_kernel):
    spec = GeneratorSpec(kind=GeneratorKind.GANDK, d=2)
    theta = np.array([3.0, 1.0, 1.0, 0.5, 0.1])
    ps = sobol(2 ** 9, 2, scramble_seed=11)
    Y = gandk_generate([2.5, 1.2, 0.5, 0.3, 0.0], sobol(2 ** 9, 2, scramble_seed=12)).samples

    def objective(values):
        return mmd2_theta_terms(gandk_generate(values, ps).samples, Y, se_kernel)

    reference = []
    for j in range(5):
        h = 1e-3 * (1.0 + abs(theta[j]))
        e = np.zeros(5)
        e[j] = h
        reference.append(
            (-objective(theta + 2 * e) + 8 * objective(theta + e) - 8 * objective(theta - e) + objective(theta - 2 * e))
            / (12 * h)
        )
    reference = np.array(reference)

    grad = mmd2_grad_theta(spec, spec.params(theta), ps, Y, se_kernel)
    assert not grad.any_one_sided
    assert np.linalg.norm(np.array(grad.values) - reference) / np.linalg.norm(reference) < 1e-3


def test_gradient_falls_back_to_one_sided_near_boundary(gandk_spec, se_kernel):
    ps = sobol(64, 1, scramble_seed=2)
    Y = gandk_generate([3.0, 1.0, 1.0, 0.5, 0.0], sobol(64, 1, scramble_seed=5)).samples
    grad = mmd2_grad_theta(gandk_spec, gandk_spec.params([3.0, 5e-5, 1.0, 0.5, 0.0]), ps, Y, se_kernel)
    assert grad.one_sided == [False, True, False, False, False]
    assert all(math.isfinite(v) for v in grad.values)


def test_finite_difference_one_sided_and_failure():
    def objective(x):
        if x[0] < 0:
            raise InvalidParameterError("negative")
        return float(x[0] ** 2)

    grad = finite_difference_gradient(objective, np.array([0.0]), [0.1])
    assert grad.one_sided == [True]
    assert grad.values[0] == pytest.approx(0.1, rel=1e-12)

    def never(x):
        raise InvalidParameterError("nowhere admissible")

    with pytest.raises(InvalidParameterError):
        finite_difference_gradient(never, np.array([0.0]), [0.1])


def test_bivbeta_gradient_at_integer_theta_is_one_sided(bivbeta_spec, se_kernel):
    theta = bivbeta_spec.params([1, 1, 1, 1, 1])
    Y = generate(bivbeta_spec, bivbeta_spec.params([2, 1, 1, 1, 1]), sobol(64, 6, scramble_seed=3)).samples
    ps = sobol(64, bivbeta_spec.gradient_input_dim(theta), scramble_seed=4)
    assert ps.s == 20
    grad = mmd2_grad_theta(bivbeta_spec, theta, ps, Y, se_kernel)
    assert grad.one_sided == [True] * 5
    assert all(math.isfinite(v) for v in grad.values)


def test_bivbeta_gradient_inside_unit_cell_is_central(bivbeta_spec, se_kernel):
    theta = bivbeta_spec.params([1.5, 1.5, 1.5, 1.5, 1.5])
    Y = generate(bivbeta_spec, bivbeta_spec.params([2, 1, 1, 1, 1]), sobol(64, 6, scramble_seed=3)).samples
    grad = mmd2_grad_theta(bivbeta_spec, theta, sobol(64, 20, scramble_seed=4), Y, se_kernel, fallback_seed=9)
    assert not grad.any_one_sided
    assert all(math.isfinite(v) for v in grad.values)


def test_bivbeta_gradient_without_room_for_perturbations(bivbeta_spec, se_kernel):
    theta = bivbeta_spec.params([1, 1, 1, 1, 1])
    Y = generate(bivbeta_spec, theta, sobol(16, 5, scramble_seed=3)).samples
    with pytest.raises(InvalidParameterError):
        mmd2_grad_theta(bivbeta_spec, theta, sobol(16, 5, scramble_seed=4), Y, se_kernel)
