"""
Sample-complexity sweeps: estimate discrepancy errors over an n grid, aggregate repetitions,
fit log-log slopes and write CSV/SVG artifacts.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Type, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel
from scipy import stats

from qmcd.config import settings
from qmcd.errors import InsufficientDataError, InvalidArgumentError, QmcdError
from qmcd.models.discrepancy import DiscrepancyKind, DiscrepancySpec
from qmcd.models.experiment import (
    AggregatedCell,
    ErrorMode,
    ErrorTransform,
    SlopeFit,
    SweepConfig,
    SweepFailure,
    SweepRecord,
)
from qmcd.models.generator import EmpiricalMeasure, GeneratorSpec
from qmcd.models.inference import SamplerKind, SamplerSpec
from qmcd.services import discrepancy
from qmcd.services.generators import simulate
from qmcd.utils.seeding import array_sha256, derive_seed
from qmcd.utils.series_analyzer import SeriesAnalyzer
from qmcd.utils.svg_plot import render_loglog

logger = logging.getLogger(__name__)

_DATA_SIDE, _SIM_SIDE, _REFERENCE = 1, 2, 3
_MC = SamplerSpec(kind=SamplerKind.MC)

CELL_KEYS = ["generator", "discrepancy", "sampler", "d", "n"]


def transform_error(value: float, spec: DiscrepancySpec, transform: ErrorTransform) -> float:
    magnitude = abs(value)
    if transform == ErrorTransform.ROOT:
        return magnitude ** (1.0 / spec.squared_scale)
    return magnitude


def _lp_excluded(spec: DiscrepancySpec, d: int, n: int, m: int) -> bool:
    return spec.kind == DiscrepancyKind.WASSERSTEIN and d > 1 and n * m > settings.lp_budget


class _SweepPlan:
    """Cells of a sweep in config order; seeds depend on (d, n, repetition) only."""

    def __init__(self, cfg: SweepConfig):
        self.cfg = cfg
        self.theta_values = cfg.theta
        self._references: Dict[Tuple[int, int], EmpiricalMeasure] = {}

    def generator(self, d: int) -> GeneratorSpec:
        if self.cfg.generator.d == d:
            return self.cfg.generator
        return self.cfg.generator.model_copy(update={"d": d})

    def data_seed(self, d_idx: int, n_idx: int, r: int) -> int:
        if self.cfg.error_mode == ErrorMode.VS_REFERENCE:
            return derive_seed(self.cfg.seed, d_idx, r, _REFERENCE)
        return derive_seed(self.cfg.seed, d_idx, n_idx, r, _DATA_SIDE)

    def sim_seed(self, d_idx: int, n_idx: int, r: int) -> int:
        if self.cfg.identical_sides:
            return self.data_seed(d_idx, n_idx, r)
        return derive_seed(self.cfg.seed, d_idx, n_idx, r, _SIM_SIDE)

    def reference(self, d_idx: int, r: int) -> EmpiricalMeasure:
        key = (d_idx, r)
        if key not in self._references:
            d = self.cfg.d_list[d_idx]
            spec = self.generator(d)
            self._references[key] = simulate(
                spec, spec.params(self.theta_values), _MC, self.cfg.m_ref, self.data_seed(d_idx, 0, r)
            )
        return self._references[key]

    def tasks(self) -> List[Tuple[int, int, int, int, int]]:
        cfg = self.cfg
        return [
            (d_idx, k_idx, s_idx, n_idx, r)
            for d_idx in range(len(cfg.d_list))
            for k_idx in range(len(cfg.discrepancies))
            for s_idx in range(len(cfg.samplers))
            for n_idx in range(len(cfg.n_grid))
            for r in range(cfg.repetitions)
        ]


def _run_cell(plan: _SweepPlan, task: Tuple[int, int, int, int, int]) -> Union[SweepRecord, SweepFailure]:
    cfg = plan.cfg
    d_idx, k_idx, s_idx, n_idx, r = task
    d, n = cfg.d_list[d_idx], cfg.n_grid[n_idx]
    spec_d, sampler = cfg.discrepancies[k_idx], cfg.samplers[s_idx]
    gen = plan.generator(d)
    labels = dict(generator=gen.kind.value, discrepancy=spec_d.label, sampler=sampler.label, d=d, n=n)

    m = cfg.m_ref if cfg.error_mode == ErrorMode.VS_REFERENCE else n
    if _lp_excluded(spec_d, d, n, m):
        return SweepFailure(**labels, repetition=r, reason=f"excluded: transport LP with {n} x {m} variables exceeds budget")

    start = time.perf_counter()
    try:
        theta = gen.params(plan.theta_values)
        if cfg.error_mode == ErrorMode.VS_REFERENCE:
            data = plan.reference(d_idx, r)
        else:
            data = simulate(gen, theta, sampler, n, plan.data_seed(d_idx, n_idx, r))
        X = simulate(gen, theta, sampler, n, plan.sim_seed(d_idx, n_idx, r))
        value = discrepancy.evaluate(spec_d, X, data)
        if not math.isfinite(value):
            raise QmcdError(f"non-finite discrepancy {value}")
    except (QmcdError, ValueError) as e:
        logger.warning(f"Sweep cell {labels} repetition {r} failed: {str(e)}")
        return SweepFailure(**labels, repetition=r, reason=str(e))

    return SweepRecord(
        **labels,
        repetition=r,
        value=value,
        error=transform_error(value, spec_d, cfg.error_transform),
        wall_clock=time.perf_counter() - start,
        reference_hash=array_sha256(data.samples),
    )


def complexity_sweep(
    cfg: SweepConfig, jobs: int = 1, failures: Optional[List[SweepFailure]] = None
) -> List[SweepRecord]:
    """Evaluate every (d, discrepancy, sampler, n, repetition) cell of the sweep.

    Rows come back in config order then repetition, whatever `jobs` is. Failed or excluded cells
    are appended to `failures` when a list is given; the sweep itself never aborts on them.
    """
    plan = _SweepPlan(cfg)
    tasks = plan.tasks()
    logger.info(f"Sweep {cfg.name}: {len(tasks)} evaluations, jobs={jobs}")

    if cfg.error_mode == ErrorMode.VS_REFERENCE:
        for d_idx in range(len(cfg.d_list)):
            for r in range(cfg.repetitions):
                plan.reference(d_idx, r)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(lambda task: _run_cell(plan, task), tasks))
    else:
        outcomes = [_run_cell(plan, task) for task in tasks]

    records = [o for o in outcomes if isinstance(o, SweepRecord)]
    missing = [o for o in outcomes if isinstance(o, SweepFailure)]
    if failures is not None:
        failures.extend(missing)
    logger.info(f"Sweep {cfg.name}: {len(records)} records, {len(missing)} missing cells")
    return records


def aggregate(records: Sequence[SweepRecord]) -> List[AggregatedCell]:
    """Mean/min/max of the error per cell, in first-appearance order."""
    if not records:
        return []
    frame = pd.DataFrame([r.model_dump() for r in records])
    grouped = frame.groupby(CELL_KEYS, sort=False)["error"].agg(["mean", "min", "max", "count"]).reset_index()
    return [AggregatedCell(**row) for row in grouped.to_dict(orient="records")]


def fit_slope(cells: Iterable[Union[AggregatedCell, Tuple[int, float]]], fraction: str = "upper_half") -> SlopeFit:
    """OLS of log2(mean error) on log2(n).

    Non-positive means are dropped; "upper_half" keeps the larger half of the remaining grid
    (at least four points).
    """
    cells = list(cells)
    meta = {}
    pairs = []
    for cell in cells:
        if isinstance(cell, AggregatedCell):
            pairs.append((cell.n, cell.mean))
            meta = dict(generator=cell.generator, discrepancy=cell.discrepancy, sampler=cell.sampler, d=cell.d)
        else:
            pairs.append((int(cell[0]), float(cell[1])))

    by_n: Dict[int, float] = {}
    for n, mean in sorted(pairs):
        if n in by_n:
            raise InvalidArgumentError(f"duplicate grid point n={n}")
        by_n[n] = mean
    kept = [(n, mean) for n, mean in by_n.items() if mean > 0 and math.isfinite(mean)]
    if len(kept) < len(by_n):
        logger.debug(f"dropped {len(by_n) - len(kept)} non-positive cells before fitting")

    if fraction == "upper_half":
        kept = kept[-max(4, len(kept) - len(kept) // 2):]
    elif fraction != "all":
        raise InvalidArgumentError(f"unknown fit fraction {fraction}")
    if len(kept) < 4:
        raise InsufficientDataError(f"slope fit needs at least 4 positive grid points, got {len(kept)}")

    log_n = np.log2([n for n, _ in kept])
    log_e = np.log2([mean for _, mean in kept])
    fit = stats.linregress(log_n, log_e)
    residuals = log_e - (fit.intercept + fit.slope * log_n)
    return SlopeFit(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        residual_rms=float(np.sqrt(np.mean(residuals ** 2))),
        n_min=kept[0][0],
        n_max=kept[-1][0],
        points_used=len(kept),
        **meta,
    )


def fit_all(cells: Sequence[AggregatedCell], fraction: str = "upper_half") -> List[SlopeFit]:
    """One fit per (generator, discrepancy, sampler, d) series; series too short are skipped."""
    fits = []
    for label, series in SeriesAnalyzer.group_series(cells, full=True).items():
        try:
            fits.append(fit_slope(series, fraction))
        except InsufficientDataError as e:
            logger.warning(f"No slope for {label}: {str(e)}")
    return fits


def emit_csv(
    rows: Sequence[BaseModel], path, model: Type[BaseModel] = SweepRecord, exclude: Sequence[str] = ()
) -> Path:
    """Header plus one row per model, RFC-4180 quoting, floats written round-trip exact."""
    path = Path(path)
    columns = [c for c in (type(rows[0]) if rows else model).model_fields if c not in exclude]
    frame = pd.DataFrame([r.model_dump() for r in rows], columns=columns)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    except OSError as e:
        logger.error(f"Error writing {path}: {str(e)}")
        raise
    logger.info(f"Wrote {len(rows)} rows to {path}")
    return path


def read_csv(path, model: Type[BaseModel] = SweepRecord) -> List[BaseModel]:
    """Parse a file written by emit_csv back into models."""
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    optional = {key for key, field in model.model_fields.items() if field.default is None and not field.is_required()}
    rows = []
    for raw in frame.to_dict(orient="records"):
        rows.append(model.model_validate({key: (None if value == "" and key in optional else value) for key, value in raw.items()}))
    return rows


def render_svg(cells: Sequence[AggregatedCell], path, title: str = "") -> Path:
    """Log-log mean lines with min/max whiskers, one polyline per (sampler, discrepancy)."""
    if not cells:
        raise InvalidArgumentError("render_svg needs at least one aggregated series")
    series = SeriesAnalyzer.group_series(cells)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(render_loglog(series, title=title), encoding="utf-8")
    except OSError as e:
        logger.error(f"Error writing {path}: {str(e)}")
        raise
    return path
