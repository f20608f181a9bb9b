"""
CSV/JSON import and export for point sets, empirical measures, inference results and run manifests.
"""

import logging
import platform
import sys
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import orjson
import pandas as pd

from qmcd.errors import InvalidArgumentError
from qmcd.models.generator import EmpiricalMeasure
from qmcd.models.inference import ABCResult, MDEResult
from qmcd.models.point_set import PointSet, SequenceFamily

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
MANIFEST_PACKAGES = ["numpy", "scipy", "pandas", "pydantic", "POT", "structlog", "orjson", "jinja2"]


def _write_frame(frame: pd.DataFrame, path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as e:
        logger.error(f"Error writing {path}: {str(e)}")
        raise
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def write_json(payload: Dict[str, Any], path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(
            orjson.dumps(payload, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY)
        )
    except OSError as e:
        logger.error(f"Error writing {path}: {str(e)}")
        raise
    return path


def _matrix_frame(matrix: np.ndarray) -> pd.DataFrame:
    return pd.DataFrame(matrix, columns=[f"dim_{j}" for j in range(matrix.shape[1])])


def read_matrix(path) -> np.ndarray:
    """Float matrix from a CSV with a header row (any column names)."""
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        logger.error(f"Error reading {path}: {str(e)}")
        raise
    values = frame.to_numpy(dtype=np.float64)
    if values.ndim != 2 or values.shape[0] == 0:
        raise InvalidArgumentError(f"{path} holds no sample rows")
    return values


def write_point_set(ps: PointSet, path) -> Path:
    return _write_frame(_matrix_frame(ps.points), path)


def read_point_set(path, family: SequenceFamily = SequenceFamily.PSEUDO_RANDOM, seed: Optional[int] = None) -> PointSet:
    return PointSet(points=read_matrix(path), family=family, seed=seed)


def write_measure(measure: EmpiricalMeasure, path) -> Path:
    return _write_frame(_matrix_frame(measure.samples), path)


def read_measure(path) -> EmpiricalMeasure:
    return EmpiricalMeasure(samples=read_matrix(path))


def write_mde_result(result: MDEResult, path, metadata: Dict[str, Any]) -> List[Path]:
    """Trajectory CSV, a wall-clock sidecar and a JSON metadata file next to `path`."""
    path = Path(path)
    names = result.theta_hat.names
    rows = [
        {"iteration": rec.iteration, "objective": rec.objective, **dict(zip(names, rec.theta))}
        for rec in result.trajectory
    ]
    trajectory = pd.DataFrame(rows, columns=["iteration", "objective", *names])
    timings = pd.DataFrame(
        [{"iteration": rec.iteration, "wall_clock": rec.wall_clock} for rec in result.trajectory],
        columns=["iteration", "wall_clock"],
    )
    payload = {
        **metadata,
        "theta_hat": dict(zip(names, result.theta_hat.values)),
        "final_discrepancy_full_data": result.final_discrepancy_full_data,
        "skipped_steps": result.skipped_steps,
        "iterations": len(result.trajectory),
    }
    return [
        _write_frame(trajectory, path),
        _write_frame(timings, path.with_name(f"{path.stem}_timings.csv")),
        write_json(payload, path.with_suffix(".json")),
    ]


def write_abc_result(result: ABCResult, path, names: Sequence[str], metadata: Dict[str, Any]) -> List[Path]:
    """One row per accepted draw (attempt index, distance, theta) plus JSON metadata."""
    path = Path(path)
    rows = [
        {"attempt": k, "distance": result.distances[k], **dict(zip(names, theta.values))}
        for k, theta in zip(result.accepted_index, result.accepted)
    ]
    accepted = pd.DataFrame(rows, columns=["attempt", "distance", *names])
    payload = {
        **metadata,
        "attempted": result.attempted,
        "accepted": len(result.accepted),
        "acceptance_rate": result.acceptance_rate,
        "epsilon": result.epsilon,
    }
    return [_write_frame(accepted, path), write_json(payload, path.with_suffix(".json"))]


def package_versions() -> Dict[str, str]:
    versions = {"python": sys.version.split()[0], "platform": platform.platform()}
    for name in MANIFEST_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "not installed"
    return versions


def write_manifest(
    path,
    command: str,
    argv: Sequence[str],
    config: Dict[str, Any],
    seeds: Dict[str, Any],
    timings: Dict[str, float],
    outputs: Sequence[Path],
) -> Path:
    """Everything needed to replay a run: argv, resolved config, seeds, versions, timings, outputs."""
    payload = {
        "command": command,
        "argv": list(argv),
        "config": config,
        "seeds": seeds,
        "versions": package_versions(),
        "timings": timings,
        "outputs": [str(p) for p in outputs],
    }
    return write_json(payload, path)
