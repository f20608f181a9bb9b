"""
Generators G_theta: [0,1)^s -> R^d.
Every transform is a pure function of (spec, theta, point set, fallback seed).
"""

import logging
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np
from scipy.special import expit, ndtri

from qmcd.errors import DomainError, InputDimensionError, InvalidArgumentError, InvalidParameterError
from qmcd.models.generator import EmpiricalMeasure, GeneratorKind, GeneratorSpec, MLPWeights, ParamVector
from qmcd.models.point_set import PointSet
from qmcd.utils.seeding import philox

logger = logging.getLogger(__name__)

EPS = 2.0 ** -53


def clamp_unit(u: np.ndarray) -> np.ndarray:
    """Clamp to [eps, 1 - eps] so boundary points of unscrambled sequences stay finite."""
    return np.clip(u, EPS, 1.0 - EPS)


def normal_icdf(u):
    """Standard normal quantile (scipy's ndtri, well inside 1e-9 absolute error)."""
    arr = np.asarray(u, dtype=np.float64)
    if np.any(~((arr > 0.0) & (arr < 1.0))):
        raise DomainError("normal_icdf needs 0 < u < 1")
    out = ndtri(arr)
    return float(out) if out.ndim == 0 else out


def toeplitz_sqrt(d: int, theta5: float) -> np.ndarray:
    """Symmetric square root of the tri-diagonal Toeplitz matrix with unit diagonal and theta5 off the diagonal."""
    if d < 1:
        raise InvalidArgumentError(f"d must be >= 1, got {d}")
    k = np.arange(1, d + 1)
    eigenvalues = 1.0 + 2.0 * theta5 * np.cos(k * np.pi / (d + 1))
    if np.any(eigenvalues < 0.0):
        raise InvalidParameterError(f"theta5 = {theta5} makes the {d}x{d} Toeplitz covariance indefinite")
    sines = np.sin(np.outer(k, k) * np.pi / (d + 1))
    return (2.0 / (d + 1)) * (sines * np.sqrt(eigenvalues)) @ sines.T


def gandk_generate(theta, ps: PointSet) -> EmpiricalMeasure:
    a, b, g, k, rho = np.asarray(theta, dtype=np.float64)
    if b <= 0:
        raise InvalidParameterError(f"g-and-k scale must be positive, got {b}")
    root = toeplitz_sqrt(ps.s, rho)
    z = ndtri(clamp_unit(ps.points)) @ root.T
    # (1 - e^{-gz}) / (1 + e^{-gz}) == tanh(gz / 2)
    x = a + b * (1.0 + 0.8 * np.tanh(g * z / 2.0)) * (1.0 + z ** 2) ** k * z
    return EmpiricalMeasure(samples=x)


def _ahrens_dieter(alpha: float, u1: np.ndarray, u2: np.ndarray, u3: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    b = (alpha + np.e) / np.e
    p = b * u1
    small = p <= 1.0
    x = np.empty_like(p)
    x[small] = p[small] ** (1.0 / alpha)
    x[~small] = -np.log((b - p[~small]) / alpha)
    with np.errstate(divide="ignore"):
        accept = np.where(small, u2 <= np.exp(-x), u3 <= x ** (alpha - 1.0))
    return x, accept


def gamma_ahrens_dieter(alpha: float, u) -> Tuple[bool, float]:
    """One rejection attempt for Gamma(alpha, 1), 0 < alpha < 1; returns (accepted, x)."""
    if not 0.0 < alpha < 1.0:
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha}")
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (3,):
        raise InvalidArgumentError("gamma_ahrens_dieter consumes exactly three uniforms")
    x, accept = _ahrens_dieter(alpha, u[:1], u[1:2], u[2:3])
    return bool(accept[0]), float(x[0])


def bivbeta_combine(gammas: np.ndarray) -> np.ndarray:
    """Map five gamma columns to the bivariate Beta pair."""
    g1, g2, g3, g4, g5 = gammas.T
    x1 = (g1 + g3) / (g1 + g3 + g4 + g5)
    x2 = (g2 + g4) / (g2 + g3 + g4 + g5)
    return np.column_stack([x1, x2])


def bivbeta_generate(theta, ps: PointSet, fallback_seed: int = 0) -> EmpiricalMeasure:
    """Columns: floor(theta_i) exponential coordinates per component, then a 3-column
    rejection block per component (all five blocks present whenever any theta_i is fractional).
    Columns past s(theta) are ignored."""
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (5,) or np.any(theta <= 0.0):
        raise InvalidParameterError(f"bivariate Beta needs five positive parameters, got {theta.tolist()}")
    whole = np.floor(theta).astype(int)
    fractional = theta - whole
    expected_s = int(whole.sum()) + (15 if np.any(fractional > 0) else 0)
    if ps.s < expected_s:
        raise InputDimensionError(f"bivariate Beta at theta={theta.tolist()} needs s={expected_s}, got {ps.s}")

    u = ps.points
    gammas = np.zeros((ps.n, 5))
    column = 0
    for i in range(5):
        if whole[i]:
            gammas[:, i] = -np.log(clamp_unit(u[:, column:column + whole[i]])).sum(axis=1)
            column += whole[i]

    rng = None
    for i in range(5):
        if fractional[i] == 0.0:
            continue
        block = clamp_unit(u[:, column + 3 * i:column + 3 * i + 3])
        x, accept = _ahrens_dieter(fractional[i], block[:, 0], block[:, 1], block[:, 2])
        retries = 0
        while not np.all(accept):
            if rng is None:
                rng = philox(fallback_seed)
            rejected = np.flatnonzero(~accept)
            fresh = clamp_unit(rng.random((len(rejected), 3)))
            x_new, accept_new = _ahrens_dieter(fractional[i], fresh[:, 0], fresh[:, 1], fresh[:, 2])
            x[rejected] = x_new
            accept[rejected] = accept_new
            retries += len(rejected)
        if retries:
            logger.debug(f"gamma component {i + 1}: {retries} fallback attempts")
        gammas[:, i] += x

    out = np.clip(bivbeta_combine(gammas), EPS, 1.0 - EPS)
    return EmpiricalMeasure(samples=out)


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def mlp_forward(weights: MLPWeights, u: np.ndarray) -> np.ndarray:
    h = u
    last = len(weights.weights) - 1
    for l, (w, b) in enumerate(zip(weights.weights, weights.biases)):
        h = h @ w + b
        h = expit(h) if l == last else _softplus(h)
    return h


def mlp_generate(weights: MLPWeights, ps: PointSet) -> EmpiricalMeasure:
    if ps.s != weights.input_dim:
        raise InvalidArgumentError(f"MLP expects s={weights.input_dim} inputs, got {ps.s}")
    return EmpiricalMeasure(samples=mlp_forward(weights, ps.points))


def save_mlp_weights(weights: MLPWeights, path: str) -> None:
    """Write CSV sections W1, b1, W2, ... with matrices row-major."""
    with open(path, "w", encoding="utf-8") as f:
        for l, (w, b) in enumerate(zip(weights.weights, weights.biases), start=1):
            f.write(f"W{l}\n")
            for row in w:
                f.write(",".join(f"{v:.17g}" for v in row) + "\n")
            f.write(f"b{l}\n")
            f.write(",".join(f"{v:.17g}" for v in b) + "\n")


@lru_cache(maxsize=4)
def load_mlp_weights(path: str) -> MLPWeights:
    sections = {}
    current: Optional[str] = None
    try:
        with open(path, "r", encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                if line[0] in "Wb" and "," not in line:
                    current = line
                    sections[current] = []
                    continue
                if current is None:
                    raise InvalidArgumentError(f"{path}: data before the first section header")
                sections[current].append([float(v) for v in line.split(",")])
    except OSError as e:
        logger.error(f"Failed to read MLP weights from {path}: {str(e)}")
        raise

    n_layers = sum(1 for name in sections if name.startswith("W"))
    try:
        weights = [np.array(sections[f"W{l}"]) for l in range(1, n_layers + 1)]
        biases = [np.array(sections[f"b{l}"][0]) for l in range(1, n_layers + 1)]
    except KeyError as e:
        raise InvalidArgumentError(f"{path}: missing section {e}")
    try:
        return MLPWeights(weights=weights, biases=biases)
    except ValueError as e:
        raise InvalidArgumentError(f"{path}: {str(e)}")


def _check_theta(spec: GeneratorSpec, theta: ParamVector) -> None:
    if theta.p != spec.param_count:
        raise InvalidParameterError(f"{spec.kind.value} takes {spec.param_count} parameters, got {theta.p}")


def generate(spec: GeneratorSpec, theta: ParamVector, ps: PointSet, fallback_seed: int = 0) -> EmpiricalMeasure:
    """Push each row of the point set through G_theta."""
    _check_theta(spec, theta)
    if spec.kind == GeneratorKind.BIVARIATE_BETA:
        return bivbeta_generate(theta.array, ps, fallback_seed)
    if spec.kind == GeneratorKind.MLP:
        return mlp_generate(load_mlp_weights(spec.weights_ref), ps)

    if ps.s != spec.d:
        raise InvalidArgumentError(f"{spec.kind.value} with d={spec.d} needs s={spec.d}, got {ps.s}")
    if spec.kind == GeneratorKind.UNIFORM:
        return EmpiricalMeasure(samples=ps.points)
    if spec.kind == GeneratorKind.GAUSSIAN:
        return EmpiricalMeasure(samples=ndtri(clamp_unit(ps.points)))
    if spec.kind == GeneratorKind.GAUSSIAN_LOCATION:
        return EmpiricalMeasure(samples=theta.array + ndtri(clamp_unit(ps.points)))
    return gandk_generate(theta.array, ps)


def simulate(spec: GeneratorSpec, theta: ParamVector, sampler, n: int, seed: int) -> EmpiricalMeasure:
    """Draw the point set for `sampler` at dimension s(theta) and push it through the generator."""
    from qmcd.services.qmc_points import draw_points

    ps = draw_points(sampler, n, spec.input_dim(theta), seed)
    return generate(spec, theta, ps, fallback_seed=seed)


def inadmissible(spec: GeneratorSpec, theta: ParamVector) -> List[str]:
    """Reasons theta is outside the admissible set (empty when admissible)."""
    values = theta.array
    reasons = []
    if spec.kind == GeneratorKind.GANDK:
        if values[1] <= 0:
            reasons.append("scale b must be positive")
        k = np.arange(1, spec.d + 1)
        if np.any(1.0 + 2.0 * values[4] * np.cos(k * np.pi / (spec.d + 1)) < 0):
            reasons.append("correlation makes the covariance indefinite")
    elif spec.kind == GeneratorKind.BIVARIATE_BETA and np.any(values <= 0):
        reasons.append("all parameters must be positive")
    return reasons
