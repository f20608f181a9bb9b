"""`sweep`: run a sample-complexity sweep and write results, aggregates, slopes, SVG panels and a manifest."""

import argparse
import logging
import time
from pathlib import Path
from typing import Any, Dict, List

from qmcd.commands.base import build_model, merge_overrides, read_json, require_out, resolve_jobs
from qmcd.errors import UsageError
from qmcd.models.experiment import AggregatedCell, SlopeFit, SweepConfig, SweepFailure
from qmcd.services import experiments
from qmcd.services.export_service import write_manifest
from qmcd.utils.series_analyzer import SeriesAnalyzer

logger = logging.getLogger(__name__)


def register(subparsers, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("sweep", parents=[common], help="Sample-complexity sweep from a JSON config")
    parser.add_argument("--repetitions", type=int, help="Override the number of repetitions")
    parser.set_defaults(handler=handle)


def write_panels(cells: List[AggregatedCell], out_dir: Path, name: str) -> List[Path]:
    paths = []
    for (generator, d), panel in SeriesAnalyzer.group_panels(cells).items():
        slug = SeriesAnalyzer.panel_slug(generator, d)
        paths.append(experiments.render_svg(panel, out_dir / f"{name}_{slug}.svg", title=f"{name}: {generator}, d={d}"))
    return paths


def handle(args: argparse.Namespace, argv: List[str]) -> Dict[str, Any]:
    if not args.config:
        raise UsageError("sweep needs --config")
    out_dir = require_out(args)
    cfg = build_model(
        SweepConfig, merge_overrides(read_json(args.config), {"seed": args.seed, "repetitions": args.repetitions})
    )
    jobs = resolve_jobs(args)

    start = time.perf_counter()
    failures: List[SweepFailure] = []
    records = experiments.complexity_sweep(cfg, jobs=jobs, failures=failures)
    elapsed = time.perf_counter() - start
    cells = experiments.aggregate(records)
    fits = experiments.fit_all(cells, cfg.fit_fraction)

    outputs = [
        experiments.emit_csv(records, out_dir / "results.csv", exclude=["wall_clock"]),
        experiments.emit_csv(failures, out_dir / "failures.csv", model=SweepFailure),
        experiments.emit_csv(cells, out_dir / "aggregated.csv", model=AggregatedCell),
        experiments.emit_csv(fits, out_dir / "slopes.csv", model=SlopeFit),
        experiments.emit_csv(
            records, out_dir / "timings.csv", exclude=["value", "error", "reference_hash"]
        ),
    ]
    if cells:
        outputs.extend(write_panels(cells, out_dir, cfg.name))
    else:
        logger.warning(f"Sweep {cfg.name} produced no records, no plots written")

    manifest = write_manifest(
        out_dir / "manifest.json",
        command="sweep",
        argv=argv,
        config=cfg.model_dump(mode="json"),
        seeds={
            "master": cfg.seed,
            "derivation": "SeedSequence([seed, d_index, n_index, repetition, side]); references use [seed, d_index, repetition, 3]",
        },
        timings={"total_seconds": elapsed, "evaluation_seconds": sum(r.wall_clock for r in records)},
        outputs=outputs,
    )
    return {
        "command": "sweep",
        "name": cfg.name,
        "records": len(records),
        "missing": len(failures),
        "slopes": {f"{f.generator} d={f.d} {f.sampler} {f.discrepancy}": round(f.slope, 4) for f in fits},
        "out": str(out_dir),
        "manifest": str(manifest),
    }
