"""Evaluate a DiscrepancySpec between two empirical measures."""

import logging

from qmcd.models.discrepancy import DiscrepancyKind, DiscrepancySpec
from qmcd.services import mmd, transport

logger = logging.getLogger(__name__)


def evaluate(spec: DiscrepancySpec, X, Y) -> float:
    if spec.kind == DiscrepancyKind.MMD:
        return mmd.mmd2_plugin(X, Y, spec.kernel, include_diagonal=spec.include_diagonal)
    if spec.kind == DiscrepancyKind.MMD_U:
        return mmd.mmd2_u(X, Y, spec.kernel)
    if spec.kind == DiscrepancyKind.SINKHORN:
        return transport.sinkhorn_divergence(X, Y, spec.lambda_s, spec.cost, spec.tol, spec.max_iter)
    if spec.kind == DiscrepancyKind.SLICED:
        return transport.sliced_wasserstein(
            X, Y, spec.slices, spec.cost, direction_seed=spec.direction_seed, qmc_directions=spec.qmc_directions
        )
    X, Y = transport.check_pair(X, Y)
    if X.shape[1] == 1:
        return transport.wasserstein_1d(X, Y, spec.cost)
    return transport.wasserstein_lp(X, Y, spec.cost)


def note(spec: DiscrepancySpec, X, Y) -> str:
    """Human-readable caveat attached to CLI summaries."""
    if spec.kind == DiscrepancyKind.MMD and not spec.include_diagonal:
        return (
            "off-diagonal plug-in estimate: same-sample sums exclude i=j but divide by n^2 and m^2, "
            "so identical inputs give -2 * (mean diagonal) / n rather than 0"
        )
    if spec.kind == DiscrepancyKind.SINKHORN:
        return "primal entropic values without additive constants; the divergence cancels them"
    return ""
