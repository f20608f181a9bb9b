"""`simulate`: push MC or RQMC inputs through a generator and write the samples."""

import argparse
from typing import Any, Dict, List

from pydantic import BaseModel, Field

from qmcd.commands.base import build_model, merge_overrides, read_json, require_out
from qmcd.models.generator import GeneratorKind, GeneratorSpec
from qmcd.models.inference import SamplerKind, SamplerSpec
from qmcd.models.point_set import SequenceFamily
from qmcd.services.export_service import write_measure
from qmcd.services.generators import simulate


class SimulateConfig(BaseModel):
    generator: GeneratorSpec
    theta: List[float] = Field(default_factory=list)
    sampler: SamplerSpec = Field(default_factory=SamplerSpec)
    n: int = Field(..., ge=1)
    seed: int = 0


def register(subparsers, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("simulate", parents=[common], help="Simulate samples from a generator")
    parser.add_argument("--generator", choices=[k.value for k in GeneratorKind], help="Generator kind")
    parser.add_argument("--d", type=int, help="Output dimension")
    parser.add_argument("--theta", type=float, nargs="+", help="Parameter values")
    parser.add_argument("--weights", help="MLP weight file")
    parser.add_argument("--sampler", choices=[k.value for k in SamplerKind], help="mc or rqmc")
    parser.add_argument("--family", choices=[f.value for f in SequenceFamily], help="RQMC family")
    parser.add_argument("--n", type=int, help="Number of samples")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, argv: List[str]) -> Dict[str, Any]:
    out = require_out(args)
    payload = merge_overrides(
        read_json(args.config),
        {
            "generator.kind": args.generator,
            "generator.d": args.d,
            "generator.weights_ref": args.weights,
            "theta": args.theta,
            "sampler.kind": args.sampler,
            "sampler.family": args.family,
            "n": args.n,
            "seed": args.seed,
        },
    )
    cfg = build_model(SimulateConfig, payload)
    theta = cfg.generator.params(cfg.theta)
    measure = simulate(cfg.generator, theta, cfg.sampler, cfg.n, cfg.seed)
    write_measure(measure, out)
    return {
        "command": "simulate",
        "generator": cfg.generator.kind.value,
        "sampler": cfg.sampler.label,
        "n": measure.n,
        "d": measure.d,
        "seed": cfg.seed,
        "out": str(out),
    }
