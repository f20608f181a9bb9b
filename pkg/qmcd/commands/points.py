"""`points`: write a QMC, RQMC or pseudo-random point set to CSV."""

import argparse
import logging
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from qmcd.commands.base import build_model, merge_overrides, read_json, require_out
from qmcd.errors import UsageError
from qmcd.models.point_set import SequenceFamily
from qmcd.services import qmc_points
from qmcd.services.export_service import write_point_set

logger = logging.getLogger(__name__)


class PointsConfig(BaseModel):
    family: SequenceFamily = SequenceFamily.SOBOL
    n: int = Field(..., ge=1)
    s: int = Field(1, ge=1)
    scramble_seed: Optional[int] = Field(None, description="Randomization seed; unscrambled when absent")
    baker: bool = False
    base: int = Field(2, ge=2, description="van der Corput base")


def register(subparsers, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("points", parents=[common], help="Generate a point set in [0,1)^s")
    parser.add_argument("--family", choices=[f.value for f in SequenceFamily])
    parser.add_argument("--n", type=int, help="Number of points")
    parser.add_argument("--s", type=int, help="Dimension")
    parser.add_argument("--scramble-seed", type=int, help="Scramble / shift seed (omit for the deterministic set)")
    parser.add_argument("--baker", action="store_true", default=None, help="Baker's transform (lattice only)")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, argv: List[str]) -> Dict[str, Any]:
    out = require_out(args)
    payload = merge_overrides(
        read_json(args.config),
        {"family": args.family, "n": args.n, "s": args.s, "scramble_seed": args.scramble_seed, "baker": args.baker},
    )
    cfg = build_model(PointsConfig, payload)
    seed = cfg.scramble_seed

    if cfg.family == SequenceFamily.SOBOL:
        ps = qmc_points.sobol(cfg.n, cfg.s, scramble_seed=seed)
    elif cfg.family == SequenceFamily.HALTON:
        ps = qmc_points.halton(cfg.n, cfg.s, scramble_seed=seed)
    elif cfg.family == SequenceFamily.LATTICE:
        ps = qmc_points.rank1_lattice(cfg.n, cfg.s, shift_seed=seed, baker=cfg.baker)
    elif cfg.family == SequenceFamily.VAN_DER_CORPUT:
        if cfg.s != 1:
            raise UsageError("van_der_corput points are one-dimensional (--s 1)")
        ps = qmc_points.van_der_corput(cfg.n, cfg.base)
    else:
        seed = seed if seed is not None else (args.seed if args.seed is not None else 0)
        ps = qmc_points.pseudo_random(cfg.n, cfg.s, seed)

    write_point_set(ps, out)
    return {"command": "points", "family": cfg.family.value, "n": ps.n, "s": ps.s, "seed": ps.seed, "out": str(out)}
