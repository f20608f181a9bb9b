"""`abc`: rejection ABC with a uniform box prior."""

import argparse
import time
from typing import Any, Dict, List

from qmcd.commands.base import build_model, load_observations, merge_overrides, read_json, require_out, resolve_jobs
from qmcd.errors import UsageError
from qmcd.models.inference import ABCConfig
from qmcd.services import inference
from qmcd.services.export_service import write_abc_result, write_manifest


def register(subparsers, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("abc", parents=[common], help="Rejection ABC")
    parser.add_argument("--epsilon", type=float, help="Acceptance threshold")
    parser.add_argument("--attempts", type=int, help="Number of prior draws K")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, argv: List[str]) -> Dict[str, Any]:
    if not args.config:
        raise UsageError("abc needs --config")
    out_dir = require_out(args)
    cfg = build_model(
        ABCConfig,
        merge_overrides(read_json(args.config), {"epsilon": args.epsilon, "attempts": args.attempts, "seed": args.seed}),
    )
    jobs = resolve_jobs(args)
    if len(cfg.prior_bounds) != cfg.generator.param_count:
        raise UsageError(f"prior_bounds needs {cfg.generator.param_count} intervals, got {len(cfg.prior_bounds)}")
    data = load_observations(cfg.generator, cfg.data_path, cfg.data_theta, cfg.data_size, cfg.seed)

    start = time.perf_counter()
    result = inference.abc_reject(
        inference.UniformBoxPrior(cfg.prior_bounds),
        cfg.generator,
        data,
        cfg.discrepancy,
        cfg.epsilon,
        cfg.attempts,
        cfg.n_sim,
        cfg.sampler,
        seed=cfg.seed,
        jobs=jobs,
    )
    elapsed = time.perf_counter() - start

    metadata = {"config": cfg.model_dump(mode="json"), "discrepancy": cfg.discrepancy.label, "sampler": cfg.sampler.label}
    outputs = write_abc_result(result, out_dir / "abc.csv", cfg.generator.param_names, metadata)
    manifest = write_manifest(
        out_dir / "manifest.json",
        command="abc",
        argv=argv,
        config=cfg.model_dump(mode="json"),
        seeds={"master": cfg.seed, "attempt": "SeedSequence([seed, k, 0]) prior, [seed, k, 1] simulation"},
        timings={"total_seconds": elapsed},
        outputs=outputs,
    )
    return {
        "command": "abc",
        "attempted": result.attempted,
        "accepted": len(result.accepted),
        "acceptance_rate": result.acceptance_rate,
        "epsilon": result.epsilon,
        "out": str(out_dir),
        "manifest": str(manifest),
    }
