"""`plot`: re-render SVG panels from a sweep results CSV."""

import argparse
from typing import Any, Dict, List

from qmcd.commands.base import require_out
from qmcd.commands.sweep import write_panels
from qmcd.errors import UsageError
from qmcd.models.experiment import SweepRecord
from qmcd.services import experiments


def register(subparsers, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("plot", parents=[common], help="SVG panels from a results.csv")
    parser.add_argument("--results", help="results.csv written by sweep")
    parser.add_argument("--name", default="plot", help="File name prefix")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, argv: List[str]) -> Dict[str, Any]:
    if not args.results:
        raise UsageError("plot needs --results")
    out_dir = require_out(args)
    records = experiments.read_csv(args.results, SweepRecord)
    if not records:
        raise UsageError(f"{args.results} holds no records")
    cells = experiments.aggregate(records)
    paths = write_panels(cells, out_dir, args.name)
    return {"command": "plot", "cells": len(cells), "outputs": [str(p) for p in paths]}
