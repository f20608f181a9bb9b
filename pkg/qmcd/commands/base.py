"""
Shared command-line plumbing: the argument parser, config loading with flag precedence,
observation data loading and the stdout summary line.
"""

import argparse
import difflib
import logging
import re
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Type, TypeVar

import orjson
from pydantic import BaseModel, ValidationError

from qmcd.config import settings
from qmcd.errors import UsageError
from qmcd.models.generator import EmpiricalMeasure, GeneratorSpec
from qmcd.models.inference import SamplerKind, SamplerSpec
from qmcd.services.export_service import read_measure
from qmcd.services.generators import simulate
from qmcd.utils.seeding import derive_seed

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)

# seed stream for observations simulated from a config's data_theta
DATA_STREAM = 0xDA7A


class QmcdArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting, with a suggestion for mistyped flags."""

    def known_flags(self):
        flags = []
        for action in self._actions:
            flags.extend(action.option_strings)
            if isinstance(action, argparse._SubParsersAction):
                for sub in action.choices.values():
                    flags.extend(opt for a in sub._actions for opt in a.option_strings if opt not in flags)
        return flags

    def error(self, message: str):
        unknown = re.findall(r"(--?[\w-]+)", message) if "unrecognized arguments" in message else []
        known = self.known_flags()
        for flag in unknown:
            close = difflib.get_close_matches(flag, known, n=1)
            if close:
                message = f"{message} (did you mean {close[0]}?)"
                break
        raise UsageError(f"{self.prog}: {message}")


def common_options() -> argparse.ArgumentParser:
    """Flags every subcommand accepts."""
    common = QmcdArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (flags override config fields, config overrides defaults)")
    common.add_argument("--out", help="Output file or directory")
    common.add_argument("--seed", type=int, help="Master seed; all randomness derives from it")
    common.add_argument("--jobs", type=int, default=None, help=f"Worker threads (default QMCD_JOBS={settings.jobs}; 1 is bit-reproducible)")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Debug logging on stderr")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Warnings and errors only")
    return common


def read_json(path: Optional[str]) -> Dict[str, Any]:
    if not path:
        return {}
    config_path = Path(path)
    if not config_path.is_file():
        raise UsageError(f"config file {path} does not exist")
    try:
        payload = orjson.loads(config_path.read_bytes())
    except orjson.JSONDecodeError as e:
        raise UsageError(f"config file {path} is not valid JSON: {str(e)}")
    if not isinstance(payload, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    return payload


def merge_overrides(config: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Apply flag values over config values; None means the flag was not given. Keys may be dotted paths."""
    merged = dict(config)
    for key, value in overrides.items():
        if value is None:
            continue
        target = merged
        *parents, leaf = key.split(".")
        for part in parents:
            target[part] = dict(target.get(part) or {})
            target = target[part]
        target[leaf] = value
    return merged


def build_model(model: Type[ModelT], payload: Dict[str, Any], source: str = "config") -> ModelT:
    try:
        return model.model_validate(payload)
    except ValidationError as e:
        raise UsageError(f"invalid {source}: {str(e)}")


def resolve_jobs(args: argparse.Namespace, config_jobs: Optional[int] = None) -> int:
    jobs = args.jobs if args.jobs is not None else (config_jobs or settings.jobs)
    if jobs < 1:
        raise UsageError(f"--jobs must be >= 1, got {jobs}")
    return jobs


def require_out(args: argparse.Namespace) -> Path:
    if not args.out:
        raise UsageError(f"{args.command} needs --out")
    return Path(args.out)


def load_observations(
    generator: GeneratorSpec, data_path: Optional[str], data_theta, data_size: int, seed: int
) -> EmpiricalMeasure:
    """Observed data from a CSV, or an MC simulation at `data_theta`."""
    if data_path:
        return read_measure(data_path)
    if data_theta is None:
        raise UsageError("config needs data_path or data_theta")
    theta = generator.params(data_theta)
    logger.info(f"Simulating {data_size} observations at theta={list(data_theta)}")
    return simulate(generator, theta, SamplerSpec(kind=SamplerKind.MC), data_size, derive_seed(seed, DATA_STREAM))


def emit_summary(summary: Dict[str, Any]) -> None:
    """The single stdout line of a run."""
    sys.stdout.write(orjson.dumps(summary, option=orjson.OPT_SERIALIZE_NUMPY).decode("utf-8") + "\n")
    sys.stdout.flush()
