"""`discrepancy`: evaluate one discrepancy between two sample files."""

import argparse
from typing import Any, Dict, List

from qmcd.commands.base import build_model, merge_overrides, read_json
from qmcd.errors import UsageError
from qmcd.models.discrepancy import CostMetric, DiscrepancyKind, DiscrepancySpec, KernelKind
from qmcd.services import discrepancy
from qmcd.services.export_service import read_measure, write_json


def register(subparsers, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("discrepancy", parents=[common], help="Discrepancy between two CSV sample files")
    parser.add_argument("--kind", choices=[k.value for k in DiscrepancyKind])
    parser.add_argument("--kernel", choices=[k.value for k in KernelKind])
    parser.add_argument("--lengthscale", type=float, help="Kernel lengthscale (default 1.5 * sqrt(d))")
    parser.add_argument("--include-diagonal", action="store_true", default=None, help="V-statistic MMD")
    parser.add_argument("--cost", choices=[c.value for c in CostMetric])
    parser.add_argument("--p", type=float, help="Transport exponent")
    parser.add_argument("--lambda", dest="lambda_s", type=float, help="Sinkhorn regularization")
    parser.add_argument("--slices", type=int, help="Sliced Wasserstein directions")
    parser.add_argument("--x", help="First sample CSV")
    parser.add_argument("--y", help="Second sample CSV")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, argv: List[str]) -> Dict[str, Any]:
    if not args.x or not args.y:
        raise UsageError("discrepancy needs --x and --y")
    payload = merge_overrides(
        read_json(args.config),
        {
            "kind": args.kind,
            "kernel.kind": args.kernel,
            "kernel.lengthscale": args.lengthscale,
            "include_diagonal": args.include_diagonal,
            "cost.metric": args.cost,
            "cost.p": args.p,
            "lambda_s": args.lambda_s,
            "slices": args.slices,
            "direction_seed": args.seed,
        },
    )
    spec = build_model(DiscrepancySpec, payload, source="discrepancy options")
    X, Y = read_measure(args.x), read_measure(args.y)
    value = discrepancy.evaluate(spec, X.samples, Y.samples)
    summary = {
        "command": "discrepancy",
        "discrepancy": spec.label,
        "value": value,
        "n": X.n,
        "m": Y.n,
        "d": X.d,
        "note": discrepancy.note(spec, X.samples, Y.samples),
    }
    if args.out:
        write_json({**summary, "spec": spec.model_dump(mode="json"), "x": args.x, "y": args.y}, args.out)
    return summary
