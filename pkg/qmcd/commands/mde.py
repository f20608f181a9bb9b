"""`mde`: minimum distance estimation (differential evolution or SGD) from a JSON config."""

import argparse
import logging
import time
from typing import Any, Dict, List

from qmcd.commands.base import build_model, load_observations, merge_overrides, read_json, require_out
from qmcd.errors import UsageError
from qmcd.models.discrepancy import DiscrepancyKind
from qmcd.models.inference import MDERunConfig, OptimizerKind
from qmcd.services import inference
from qmcd.services.export_service import write_mde_result, write_manifest

logger = logging.getLogger(__name__)


def register(subparsers, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("mde", parents=[common], help="Minimum distance estimation")
    parser.add_argument("--iterations", type=int, help="Override DE generations / SGD steps")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, argv: List[str]) -> Dict[str, Any]:
    if not args.config:
        raise UsageError("mde needs --config")
    out_dir = require_out(args)
    payload = merge_overrides(
        read_json(args.config),
        {"mde.seed": args.seed, "mde.iterations": args.iterations, "mde.jobs": args.jobs},
    )
    run = build_model(MDERunConfig, payload)
    cfg = run.mde
    data = load_observations(run.generator, run.data_path, run.generator_scale(run.data_theta), run.data_size, cfg.seed)
    if cfg.minibatch > data.n:
        raise UsageError(f"minibatch {cfg.minibatch} exceeds the {data.n} observations")

    start = time.perf_counter()
    if cfg.optimizer == OptimizerKind.DE:
        result = inference.minimum_distance(run.generator, data, cfg)
    else:
        if cfg.discrepancy.kind != DiscrepancyKind.MMD:
            raise UsageError("the SGD optimizer minimizes the MMD; set discrepancy.kind to mmd")
        if run.theta0 is None:
            raise UsageError("the SGD optimizer needs theta0")
        theta0 = run.generator.params(run.generator_scale(run.theta0))
        result = inference.mde_sgd(run.generator, theta0, data, cfg.discrepancy.kernel, cfg)
    elapsed = time.perf_counter() - start

    metadata = {
        "config": run.model_dump(mode="json"),
        "sampler": cfg.sampler.label,
        "discrepancy": cfg.discrepancy.label,
        "n_sim": cfg.resolved_n_sim(),
        "seed": cfg.seed,
    }
    outputs = write_mde_result(result, out_dir / "mde.csv", metadata)
    manifest = write_manifest(
        out_dir / "manifest.json",
        command="mde",
        argv=argv,
        config=run.model_dump(mode="json"),
        seeds={"master": cfg.seed, "data": "SeedSequence([seed, 0xDA7A])"},
        timings={"total_seconds": elapsed},
        outputs=outputs,
    )
    return {
        "command": "mde",
        "optimizer": cfg.optimizer.value,
        "theta_hat": dict(zip(result.theta_hat.names, result.theta_hat.values)),
        "final_discrepancy_full_data": result.final_discrepancy_full_data,
        "skipped_steps": result.skipped_steps,
        "out": str(out_dir),
        "manifest": str(manifest),
    }
