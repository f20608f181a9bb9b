"""
Kernels and MMD estimators.

Kernel sums run over fixed row blocks of lexicographically sorted samples and are reduced with
math.fsum over row sums, so values do not depend on row order, argument order or thread count.
"""

import logging
import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from qmcd.errors import InputDimensionError, InvalidArgumentError, InvalidParameterError
from qmcd.models.discrepancy import GradientEstimate, KernelKind, KernelSpec
from qmcd.models.generator import EmpiricalMeasure, GeneratorSpec, ParamVector
from qmcd.models.point_set import PointSet

logger = logging.getLogger(__name__)

BLOCK_ROWS = 1024

_MATERN_NU = {KernelKind.MATERN32: 1.5, KernelKind.MATERN52: 2.5, KernelKind.MATERN72: 3.5}


def _as_matrix(samples) -> np.ndarray:
    if isinstance(samples, EmpiricalMeasure):
        return samples.samples
    arr = np.asarray(samples, dtype=np.float64)
    return arr[:, None] if arr.ndim == 1 else arr


def kernel_matrix(k: KernelSpec, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Gram block k(X_i, Y_j)."""
    d = X.shape[1]
    if Y.shape[1] != d:
        raise InvalidArgumentError(f"dimension mismatch: {d} vs {Y.shape[1]}")
    sigma = k.resolved_lengthscale(d)
    amp2 = k.amplitude ** 2
    if k.kind == KernelKind.SE:
        return amp2 * np.exp(-cdist(X, Y, "sqeuclidean") / sigma ** 2)
    a = math.sqrt(2.0 * _MATERN_NU[k.kind]) * cdist(X, Y, "euclidean") / sigma ** 2
    if k.kind == KernelKind.MATERN32:
        poly = 1.0 + a
    elif k.kind == KernelKind.MATERN52:
        poly = 1.0 + a + a ** 2 / 3.0
    else:
        poly = 1.0 + a + 2.0 * a ** 2 / 5.0 + a ** 3 / 15.0
    return amp2 * poly * np.exp(-a)


def kernel_eval(k: KernelSpec, x, y) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if x.shape != y.shape or x.ndim != 1:
        raise InvalidArgumentError(f"points must share one dimension, got {x.shape} and {y.shape}")
    return float(kernel_matrix(k, x[None, :], y[None, :])[0, 0])


def _canonical(X: np.ndarray) -> np.ndarray:
    return X[np.lexsort(X.T[::-1])]


def _sum_off_diagonal(k: KernelSpec, X: np.ndarray) -> float:
    """Sum of k(x_i, x_j) over i != j, as twice the strict upper triangle."""
    n = X.shape[0]
    row_sums = []
    for start in range(0, n, BLOCK_ROWS):
        stop = min(start + BLOCK_ROWS, n)
        block = kernel_matrix(k, X[start:stop], X)
        upper = np.arange(n)[None, :] > np.arange(start, stop)[:, None]
        row_sums.append(np.where(upper, block, 0.0).sum(axis=1))
    if not row_sums:
        return 0.0
    return 2.0 * math.fsum(np.concatenate(row_sums))


def _sum_cross(k: KernelSpec, X: np.ndarray, Y: np.ndarray) -> float:
    if (X.shape[0], X.tobytes()) > (Y.shape[0], Y.tobytes()):
        X, Y = Y, X
    row_sums = [kernel_matrix(k, X[start:start + BLOCK_ROWS], Y).sum(axis=1) for start in range(0, X.shape[0], BLOCK_ROWS)]
    return math.fsum(np.concatenate(row_sums))


def _prepare(X, Y) -> Tuple[np.ndarray, np.ndarray]:
    X, Y = _as_matrix(X), _as_matrix(Y)
    if X.shape[1] != Y.shape[1]:
        raise InvalidArgumentError(f"measures live in different dimensions: {X.shape[1]} vs {Y.shape[1]}")
    return _canonical(X), _canonical(Y)


def mmd2_plugin(X, Y, k: KernelSpec, include_diagonal: bool = False) -> float:
    """Off-diagonal plug-in estimate with n^2, m^2 normalization; `include_diagonal` gives the V-statistic."""
    X, Y = _prepare(X, Y)
    n, m = X.shape[0], Y.shape[0]
    sxx = _sum_off_diagonal(k, X)
    syy = _sum_off_diagonal(k, Y)
    if include_diagonal:
        diag = k.amplitude ** 2
        sxx += n * diag
        syy += m * diag
    return sxx / n ** 2 + syy / m ** 2 - 2.0 * _sum_cross(k, X, Y) / (n * m)


def mmd2_u(X, Y, k: KernelSpec) -> float:
    X, Y = _prepare(X, Y)
    n, m = X.shape[0], Y.shape[0]
    if n < 2 or m < 2:
        raise InvalidArgumentError(f"the U-statistic needs n, m >= 2, got n={n}, m={m}")
    return (
        _sum_off_diagonal(k, X) / (n * (n - 1))
        + _sum_off_diagonal(k, Y) / (m * (m - 1))
        - 2.0 * _sum_cross(k, X, Y) / (n * m)
    )


def mmd2_theta_terms(X, Y, k: KernelSpec) -> float:
    """mmd2_plugin without the Y-only term, which cancels in every parameter difference."""
    X, Y = _prepare(X, Y)
    n, m = X.shape[0], Y.shape[0]
    return _sum_off_diagonal(k, X) / n ** 2 - 2.0 * _sum_cross(k, X, Y) / (n * m)


def finite_difference_gradient(
    objective: Callable[[np.ndarray], float],
    x: np.ndarray,
    steps: Sequence[float],
) -> GradientEstimate:
    """Central differences; a coordinate whose perturbation is inadmissible falls back to a one-sided difference."""
    x = np.asarray(x, dtype=np.float64)
    values, one_sided = [], []
    center: Optional[float] = None

    def evaluate(point: np.ndarray) -> Optional[float]:
        try:
            value = objective(point)
        except InvalidParameterError:
            return None
        return value if math.isfinite(value) else None

    for j, h in enumerate(steps):
        e = np.zeros_like(x)
        e[j] = h
        plus, minus = evaluate(x + e), evaluate(x - e)
        if plus is not None and minus is not None:
            values.append((plus - minus) / (2.0 * h))
            one_sided.append(False)
            continue
        if center is None:
            center = objective(x)
        if plus is not None:
            values.append((plus - center) / h)
        elif minus is not None:
            values.append((center - minus) / h)
        else:
            raise InvalidParameterError(f"both perturbations of coordinate {j} are inadmissible")
        logger.warning(f"one-sided difference used for coordinate {j}")
        one_sided.append(True)
    return GradientEstimate(values=values, one_sided=one_sided)


def default_fd_steps(theta: np.ndarray) -> np.ndarray:
    return 1e-4 * (1.0 + np.abs(theta))


def mmd2_grad_theta(
    spec: GeneratorSpec,
    theta: ParamVector,
    ps: PointSet,
    Y,
    k: KernelSpec,
    fd_step: Optional[float] = None,
    fallback_seed: int = 0,
) -> GradientEstimate:
    """Finite-difference gradient of mmd2_plugin(generate(theta), Y), reusing `ps` at every perturbation.

    Draw `ps` at `spec.gradient_input_dim(theta)`; a perturbation that changes the column layout
    counts as inadmissible and its coordinate gets a one-sided difference.
    """
    from qmcd.services.generators import generate

    Y = _canonical(_as_matrix(Y))

    def objective(values: np.ndarray) -> float:
        if not spec.same_input_layout(theta.array, values):
            raise InputDimensionError(f"theta={values.tolist()} reads the point set with another column layout")
        X = generate(spec, ParamVector.from_array(values, theta.names), ps, fallback_seed).samples
        return mmd2_theta_terms(X, Y, k)

    steps = np.full(theta.p, fd_step) if fd_step is not None else default_fd_steps(theta.array)
    return finite_difference_gradient(objective, theta.array, steps)
