"""
Parameter inference by minimum distance estimation (differential evolution or SGD) and ABC rejection.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from qmcd.config import settings
from qmcd.errors import InputDimensionError, InvalidArgumentError, InvalidParameterError, QmcdError
from qmcd.models.discrepancy import KernelSpec
from qmcd.models.generator import EmpiricalMeasure, GeneratorSpec, ParamVector
from qmcd.models.inference import (
    ABCResult,
    DEOptions,
    MDEConfig,
    MDEResult,
    SamplerKind,
    SamplerSpec,
    TrajectoryRecord,
)
from qmcd.services import discrepancy
from qmcd.services.generators import generate, simulate
from qmcd.services.mmd import default_fd_steps, finite_difference_gradient, mmd2_plugin, mmd2_theta_terms
from qmcd.services.qmc_points import draw_points
from qmcd.utils.seeding import derive_seed, philox

logger = logging.getLogger(__name__)

Objective = Callable[[np.ndarray, int], float]

_PARENT, _TRIAL = 0, 1


class UniformBoxPrior:
    """Uniform prior on a box; called with a numpy Generator."""

    def __init__(self, bounds: Sequence[Tuple[float, float]]):
        self.lower = np.array([lo for lo, _ in bounds], dtype=np.float64)
        self.upper = np.array([hi for _, hi in bounds], dtype=np.float64)
        if np.any(self.upper <= self.lower) or not np.all(np.isfinite(self.lower) & np.isfinite(self.upper)):
            raise InvalidArgumentError("prior bounds must be finite intervals")

    def __call__(self, rng: np.random.Generator) -> np.ndarray:
        return self.lower + (self.upper - self.lower) * rng.random(len(self.lower))


def _safe(objective: Objective, theta: np.ndarray, eval_seed: int) -> float:
    try:
        value = float(objective(theta, eval_seed))
    except (InvalidParameterError, FloatingPointError) as e:
        logger.debug(f"objective inadmissible at {theta.tolist()}: {str(e)}")
        return math.inf
    return value if math.isfinite(value) else math.inf


def _evaluate_all(objective: Objective, thetas: np.ndarray, seeds: List[int], jobs: int) -> np.ndarray:
    if jobs <= 1:
        return np.array([_safe(objective, t, s) for t, s in zip(thetas, seeds)])
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return np.array(list(pool.map(lambda args: _safe(objective, *args), zip(thetas, seeds))))


def differential_evolution(
    objective: Objective,
    bounds: Sequence[Tuple[float, float]],
    options: Optional[DEOptions] = None,
    iterations: int = 100,
    seed: int = 0,
    jobs: int = 1,
    names: Optional[List[str]] = None,
) -> MDEResult:
    """DE rand/1/bin with clipping; parents and trials are re-evaluated every generation.

    `objective(theta, eval_seed)` may be stochastic; `eval_seed` is derived from
    (seed, generation, member, role) so results do not depend on `jobs`.
    """
    options = options or DEOptions()
    bounds = np.asarray(bounds, dtype=np.float64)
    if bounds.ndim != 2 or bounds.shape[1] != 2 or not np.all(np.isfinite(bounds)) or np.any(bounds[:, 1] < bounds[:, 0]):
        raise InvalidArgumentError("DE needs finite (low, high) bounds per parameter")
    lower, upper = bounds[:, 0], bounds[:, 1]
    p = len(bounds)
    pop = options.pop or 15 * p
    if pop < 4:
        raise InvalidArgumentError(f"DE population must be >= 4, got {pop}")
    names = names or [f"theta{j}" for j in range(p)]

    rng = philox(derive_seed(seed, 0xDE))
    population = lower + (upper - lower) * rng.random((pop, p))
    best_theta, best_value = population[0].copy(), math.inf
    trajectory: List[TrajectoryRecord] = []
    start = time.perf_counter()

    for generation in range(1, iterations + 1):
        trials = np.empty_like(population)
        for i in range(pop):
            others = np.delete(np.arange(pop), i)
            r1, r2, r3 = rng.choice(others, size=3, replace=False)
            mutant = population[r1] + options.F * (population[r2] - population[r3])
            cross = rng.random(p) < options.CR
            cross[rng.integers(p)] = True
            trials[i] = np.clip(np.where(cross, mutant, population[i]), lower, upper)

        parent_seeds = [derive_seed(seed, generation, i, _PARENT) for i in range(pop)]
        trial_seeds = [derive_seed(seed, generation, i, _TRIAL) for i in range(pop)]
        parent_values = _evaluate_all(objective, population, parent_seeds, jobs)
        trial_values = _evaluate_all(objective, trials, trial_seeds, jobs)

        for candidates, values in ((population, parent_values), (trials, trial_values)):
            i = int(np.argmin(values))
            if values[i] < best_value:
                best_value, best_theta = float(values[i]), candidates[i].copy()

        replace = trial_values <= parent_values
        population = np.where(replace[:, None], trials, population)

        trajectory.append(
            TrajectoryRecord(
                iteration=generation,
                objective=best_value,
                theta=best_theta.tolist(),
                wall_clock=time.perf_counter() - start,
            )
        )
        if generation % 50 == 0 or generation == iterations:
            logger.info(f"DE generation {generation}/{iterations}: best objective {best_value:.6g}")

    return MDEResult(theta_hat=ParamVector.from_array(best_theta, names), trajectory=trajectory)


def _minibatch(data: np.ndarray, size: int, rng: np.random.Generator) -> np.ndarray:
    if size > len(data):
        raise InvalidArgumentError(f"minibatch {size} larger than the data set ({len(data)})")
    if size == len(data):
        return data
    return data[np.sort(rng.choice(len(data), size=size, replace=False))]


def _point_seed(cfg: MDEConfig, eval_seed: int) -> int:
    # fixed-set mode keeps one randomization for RQMC; MC always redraws
    if cfg.sampler.kind == SamplerKind.RQMC and not cfg.rescramble:
        return derive_seed(cfg.seed, 0x5EED)
    return eval_seed


def full_data_discrepancy(spec: GeneratorSpec, theta: ParamVector, data: np.ndarray, cfg: MDEConfig) -> float:
    """Discrepancy between a fresh simulation at theta and the data (fixed subsample above the configured cap)."""
    rng = philox(derive_seed(cfg.seed, 0xF11))
    reference = _minibatch(data, min(len(data), settings.full_data_cap), rng)
    X = simulate(spec, theta, cfg.sampler, cfg.resolved_n_sim(), derive_seed(cfg.seed, 0xF12))
    return discrepancy.evaluate(cfg.discrepancy, X, reference)


def minimum_distance(spec: GeneratorSpec, data, cfg: MDEConfig, bounds: Optional[Sequence[Tuple[float, float]]] = None) -> MDEResult:
    """MDE with differential evolution; each evaluation resamples the minibatch and the simulator inputs."""
    data = data.samples if isinstance(data, EmpiricalMeasure) else np.asarray(data, dtype=np.float64)
    data = data[:, None] if data.ndim == 1 else data
    n_sim = cfg.resolved_n_sim()
    bounds = bounds or cfg.de.bounds or spec.default_bounds()
    names = spec.param_names
    if len(bounds) != spec.param_count:
        raise InvalidArgumentError(f"{spec.kind.value} has {spec.param_count} parameters, got {len(bounds)} bounds")
    logger.info(
        f"MDE/DE on {spec.kind.value}: m={len(data)}, minibatch={cfg.minibatch}, n_sim={n_sim}, "
        f"sampler={cfg.sampler.label}, discrepancy={cfg.discrepancy.label}"
    )

    def objective(theta: np.ndarray, eval_seed: int) -> float:
        params = ParamVector.from_array(theta, names)
        batch = _minibatch(data, cfg.minibatch, philox(eval_seed))
        X = simulate(spec, params, cfg.sampler, n_sim, _point_seed(cfg, eval_seed))
        return discrepancy.evaluate(cfg.discrepancy, X, batch)

    result = differential_evolution(
        objective, bounds, options=cfg.de, iterations=cfg.iterations, seed=cfg.seed, jobs=cfg.jobs, names=names
    )
    try:
        result.final_discrepancy_full_data = full_data_discrepancy(spec, result.theta_hat, data, cfg)
    except QmcdError as e:
        logger.error(f"Final discrepancy at theta_hat failed: {str(e)}")
    return result


def _to_optimizer(theta: np.ndarray, exp_coordinates: Sequence[int]) -> np.ndarray:
    phi = theta.copy()
    for j in exp_coordinates:
        if theta[j] <= 0:
            raise InvalidParameterError(f"coordinate {j} is optimized on the log scale but equals {theta[j]}")
        phi[j] = math.log(theta[j])
    return phi


def _from_optimizer(phi: np.ndarray, exp_coordinates: Sequence[int]) -> np.ndarray:
    theta = phi.copy()
    for j in exp_coordinates:
        theta[j] = math.exp(phi[j])
    return theta


def mde_sgd(spec: GeneratorSpec, theta0, data, k: KernelSpec, cfg: MDEConfig) -> MDEResult:
    """SGD on the plug-in MMD^2 with finite-difference gradients.

    Every step resamples the data minibatch and draws n_sim fresh simulator inputs; coordinates listed in
    `cfg.sgd.exp_coordinates` are updated on the log scale and the iterate is clipped to `cfg.sgd.bounds`.
    """
    data = data.samples if isinstance(data, EmpiricalMeasure) else np.asarray(data, dtype=np.float64)
    data = data[:, None] if data.ndim == 1 else data
    names = spec.param_names
    theta = theta0.array.copy() if isinstance(theta0, ParamVector) else np.asarray(theta0, dtype=np.float64).copy()
    exp_coords = list(cfg.sgd.exp_coordinates)
    n_sim = cfg.resolved_n_sim()
    step = cfg.sgd.step

    if cfg.sgd.bounds:
        box = np.asarray(cfg.sgd.bounds, dtype=np.float64)
    else:
        box = np.asarray(spec.default_bounds(), dtype=np.float64)
        box[exp_coords] = (-20.0, 20.0)

    trajectory: List[TrajectoryRecord] = []
    skipped = 0
    start = time.perf_counter()
    logger.info(f"MDE/SGD on {spec.kind.value}: step={step}, n_sim={n_sim}, minibatch={cfg.minibatch}, iterations={cfg.iterations}")

    for t in range(1, cfg.iterations + 1):
        eval_seed = derive_seed(cfg.seed, t)
        batch = _minibatch(data, cfg.minibatch, philox(eval_seed))
        phi = _to_optimizer(theta, exp_coords)
        current = _from_optimizer(phi, exp_coords)
        ps = draw_points(cfg.sampler, n_sim, spec.gradient_input_dim(ParamVector.from_array(current, names)), _point_seed(cfg, eval_seed))

        def objective(values: np.ndarray) -> float:
            candidate = _from_optimizer(values, exp_coords)
            if not spec.same_input_layout(current, candidate):
                raise InputDimensionError(f"theta={candidate.tolist()} reads the point set with another column layout")
            params = ParamVector.from_array(candidate, names)
            return mmd2_theta_terms(generate(spec, params, ps, eval_seed).samples, batch, k)

        steps = np.full(len(phi), cfg.sgd.fd_step) if cfg.sgd.fd_step else default_fd_steps(phi)
        try:
            gradient = np.asarray(finite_difference_gradient(objective, phi, steps).values)
        except InvalidParameterError as e:
            gradient = np.full(len(phi), np.nan)
            logger.warning(f"step {t}: gradient unavailable: {str(e)}")

        if not np.all(np.isfinite(gradient)):
            skipped += 1
            logger.warning(f"step {t}: non-finite gradient, step skipped")
        else:
            new_phi = np.clip(phi - step * gradient, box[:, 0], box[:, 1])
            moved = new_phi != phi
            theta = np.where(moved, _from_optimizer(new_phi, exp_coords), theta)

        params = ParamVector.from_array(theta, names)
        if spec.input_dim(params) > ps.s:
            ps = draw_points(cfg.sampler, n_sim, spec.gradient_input_dim(params), _point_seed(cfg, eval_seed))
        value = mmd2_plugin(generate(spec, params, ps, eval_seed).samples, batch, k)
        trajectory.append(
            TrajectoryRecord(iteration=t, objective=value, theta=theta.tolist(), wall_clock=time.perf_counter() - start)
        )
        if t % 500 == 0:
            logger.info(f"SGD step {t}/{cfg.iterations}: objective {value:.6g}, theta {np.round(theta, 4).tolist()}")

    return MDEResult(theta_hat=ParamVector.from_array(theta, names), trajectory=trajectory, skipped_steps=skipped)


def abc_reject(
    prior_sampler: Callable[[np.random.Generator], np.ndarray],
    spec: GeneratorSpec,
    data,
    D,
    epsilon: float,
    K: int,
    n_sim: int,
    sampler: SamplerSpec,
    seed: int = 0,
    jobs: int = 1,
) -> ABCResult:
    """Rejection ABC: keep prior draws whose simulated sample lies within epsilon of the data.

    Attempt k draws its prior value and its point-set randomization from seeds derived from (seed, k),
    so runs that differ only in epsilon share every simulation.

    Distances are compared as computed. The off-diagonal plug-in MMD can be negative near the truth,
    so with that discrepancy epsilon = 0 still accepts draws; set include_diagonal for a nonnegative D.
    """
    if epsilon < 0 or K < 1:
        raise InvalidArgumentError(f"need epsilon >= 0 and K >= 1, got {epsilon}, {K}")
    data = data.samples if isinstance(data, EmpiricalMeasure) else np.asarray(data, dtype=np.float64)
    names = spec.param_names

    def attempt(k: int) -> Tuple[np.ndarray, float]:
        theta = np.asarray(prior_sampler(philox(derive_seed(seed, k, 0))), dtype=np.float64)
        try:
            X = simulate(spec, ParamVector.from_array(theta, names), sampler, n_sim, derive_seed(seed, k, 1))
            distance = float(discrepancy.evaluate(D, X, data))
        except InvalidParameterError:
            distance = math.inf
        return theta, distance if not math.isnan(distance) else math.inf

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            attempts = list(pool.map(attempt, range(K)))
    else:
        attempts = [attempt(k) for k in range(K)]

    accepted, accepted_index = [], []
    for k, (theta, distance) in enumerate(attempts):
        if distance <= epsilon:
            accepted.append(ParamVector.from_array(theta, names))
            accepted_index.append(k)
    logger.info(f"ABC: accepted {len(accepted)}/{K} at epsilon={epsilon}")
    return ABCResult(
        accepted=accepted,
        attempted=K,
        epsilon=epsilon,
        acceptance_rate=len(accepted) / K,
        distances=[d for _, d in attempts],
        accepted_index=accepted_index,
    )
