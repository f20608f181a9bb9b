"""
Optimal transport discrepancies between uniform-weight empirical measures.
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np
import ot
from scipy.spatial.distance import cdist
from scipy.special import ndtri

from qmcd.config import settings
from qmcd.errors import BudgetExceededError, InvalidArgumentError, QmcdError, SinkhornNotConvergedError
from qmcd.models.discrepancy import CostMetric, CostSpec, SinkhornResult
from qmcd.models.generator import EmpiricalMeasure
from qmcd.utils.seeding import philox

logger = logging.getLogger(__name__)

_CDIST_METRIC = {CostMetric.EUCLIDEAN: "euclidean", CostMetric.L1: "cityblock", CostMetric.LINF: "chebyshev"}


def _as_matrix(samples) -> np.ndarray:
    if isinstance(samples, EmpiricalMeasure):
        return samples.samples
    arr = np.asarray(samples, dtype=np.float64)
    return arr[:, None] if arr.ndim == 1 else arr


def check_pair(X, Y) -> Tuple[np.ndarray, np.ndarray]:
    X, Y = _as_matrix(X), _as_matrix(Y)
    if X.shape[1] != Y.shape[1]:
        raise InvalidArgumentError(f"measures live in different dimensions: {X.shape[1]} vs {Y.shape[1]}")
    return X, Y


def cost_matrix(X, Y, cost: CostSpec) -> np.ndarray:
    """C_ij = c(x_i, y_j)^p."""
    X, Y = check_pair(X, Y)
    return cdist(X, Y, _CDIST_METRIC[cost.metric]) ** cost.p


def wasserstein_1d(X, Y, cost: CostSpec = None) -> float:
    """Exact 1-D Wasserstein distance through the quantile coupling."""
    cost = cost or CostSpec()
    X, Y = _as_matrix(X), _as_matrix(Y)
    if X.shape[1] != 1 or Y.shape[1] != 1:
        raise InvalidArgumentError(f"wasserstein_1d needs d = 1, got {X.shape[1]} and {Y.shape[1]}")
    xs, ys = np.sort(X[:, 0]), np.sort(Y[:, 0])
    n, m = len(xs), len(ys)
    p = cost.p
    if n == m:
        return (math.fsum(np.abs(xs - ys) ** p) / n) ** (1.0 / p)

    # quantile functions are step functions on multiples of 1/n and 1/m; integrate on the merged grid
    total = n * m // math.gcd(n, m)
    step_x, step_y = total // n, total // m
    breaks = np.union1d(np.arange(1, n + 1) * step_x, np.arange(1, m + 1) * step_y)
    starts = np.concatenate([[0], breaks[:-1]])
    widths = breaks - starts
    gaps = np.abs(xs[starts // step_x] - ys[starts // step_y]) ** p
    return (math.fsum(widths * gaps) / total) ** (1.0 / p)


def wasserstein_lp(X, Y, cost: CostSpec = None, budget: Optional[int] = None) -> float:
    """Exact discrete OT by network simplex (POT), returned as (min <C^p, P>)^(1/p)."""
    cost = cost or CostSpec()
    budget = budget if budget is not None else settings.lp_budget
    X, Y = check_pair(X, Y)
    n, m = X.shape[0], Y.shape[0]
    if n * m > budget:
        raise BudgetExceededError(f"transport LP with {n} x {m} variables exceeds budget {budget}", budget=budget)
    M = np.ascontiguousarray(cost_matrix(X, Y, cost))
    a, b = np.full(n, 1.0 / n), np.full(m, 1.0 / m)
    try:
        value, log = ot.emd2(a, b, M, numItermax=max(100000, 50 * n * m), log=True)
    except Exception as e:
        logger.error(f"Network simplex failed: {str(e)}")
        raise
    if log.get("warning"):
        raise QmcdError(f"network simplex did not reach optimality: {log['warning']}")
    return max(float(value), 0.0) ** (1.0 / cost.p)


def _solve_sinkhorn(C: np.ndarray, lambda_s: float, tol: float, max_iter: int) -> SinkhornResult:
    """POT's log-domain Sinkhorn; the value is the primal <C, P> + lambda_s KL(P || a x b) of the returned plan."""
    n, m = C.shape
    a, b = np.full(n, 1.0 / n), np.full(m, 1.0 / m)
    try:
        plan, log = ot.bregman.sinkhorn_log(a, b, C, lambda_s, numItermax=max_iter, stopThr=tol, log=True, warn=False)
    except Exception as e:
        logger.error(f"Sinkhorn solver failed: {str(e)}")
        raise
    iterations = int(log["niter"]) + 1
    error = float(max(np.max(np.abs(plan.sum(axis=1) - a)), np.max(np.abs(plan.sum(axis=0) - b))))

    # plan entries can underflow to zero; take logs from the scalings
    log_p = log["log_u"][:, None] + log["log_v"][None, :] - C / lambda_s
    kl = np.sum(plan * (log_p + math.log(n) + math.log(m)))
    value = float(np.sum(plan * C) + lambda_s * kl)
    return SinkhornResult(
        value=value, iterations=iterations, marginal_error=error, converged=error <= tol, tol=tol
    )


def sinkhorn_entropic(
    X,
    Y,
    lambda_s: float,
    cost: CostSpec = None,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> SinkhornResult:
    """min <C, P> + lambda_s KL(P || a x b) over couplings of the uniform marginals."""
    cost = cost or CostSpec()
    tol = tol if tol is not None else settings.sinkhorn_tol
    max_iter = max_iter if max_iter is not None else settings.sinkhorn_max_iter
    if lambda_s <= 0 or tol <= 0:
        raise InvalidArgumentError(f"lambda_s and tol must be positive, got {lambda_s}, {tol}")
    X, Y = check_pair(X, Y)
    # solve one fixed orientation of the pair so swapping arguments gives the same bits
    if (X.shape[0], X.tobytes()) > (Y.shape[0], Y.tobytes()):
        X, Y = Y, X
    result = _solve_sinkhorn(cost_matrix(X, Y, cost), lambda_s, tol, max_iter)
    if not result.converged:
        logger.warning(
            f"Sinkhorn stopped after {result.iterations} iterations with marginal error {result.marginal_error:.3e} > {tol:.1e}"
        )
    return result


def sinkhorn_divergence(
    X,
    Y,
    lambda_s: float,
    cost: CostSpec = None,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> float:
    """W(X, Y) - (W(X, X) + W(Y, Y)) / 2 with every term solved to the same tolerance."""
    results = [
        sinkhorn_entropic(X, Y, lambda_s, cost, tol, max_iter),
        sinkhorn_entropic(X, X, lambda_s, cost, tol, max_iter),
        sinkhorn_entropic(Y, Y, lambda_s, cost, tol, max_iter),
    ]
    if not all(r.converged for r in results):
        raise SinkhornNotConvergedError("a Sinkhorn sub-problem of the divergence did not converge", results=results)
    cross, self_x, self_y = (r.value for r in results)
    return cross - 0.5 * (self_x + self_y)


def slice_directions(L: int, d: int, direction_seed: int, qmc_directions: bool = False) -> np.ndarray:
    """L directions uniform on the unit sphere from normalized Gaussian vectors."""
    if qmc_directions:
        from qmcd.services.qmc_points import sobol

        u = np.clip(sobol(L, d, scramble_seed=direction_seed).points, 2.0 ** -53, 1.0 - 2.0 ** -53)
        gaussians = ndtri(u)
    else:
        gaussians = philox(direction_seed).standard_normal((L, d))
    return gaussians / np.sqrt(np.sum(gaussians * gaussians, axis=1, keepdims=True))


def sliced_wasserstein(
    X,
    Y,
    L: int,
    cost: CostSpec = None,
    direction_seed: int = 0,
    qmc_directions: bool = False,
) -> float:
    """Average of 1-D Wasserstein distances of the projections onto L seeded directions."""
    cost = cost or CostSpec()
    if L < 1:
        raise InvalidArgumentError(f"need at least one slice, got L={L}")
    X, Y = check_pair(X, Y)
    directions = slice_directions(L, X.shape[1], direction_seed, qmc_directions)
    proj_x, proj_y = X @ directions.T, Y @ directions.T
    values = [wasserstein_1d(proj_x[:, l], proj_y[:, l], cost) for l in range(L)]
    return math.fsum(values) / L
