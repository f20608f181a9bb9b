#!/usr/bin/env python3
"""
Write the Sobol direction-number table bundled with scipy as a Joe-Kuo text file
(`d s a m_i` rows), the format DirectionNumberTable reads from QMCD_DATA_DIR.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from qmcd.config import settings
from qmcd.errors import QmcdError
from qmcd.services.direction_numbers import DirectionNumberTable


def export_table(output_path: Path, max_dimension: int = None) -> int:
    """
    Export the table.

    Args:
        output_path: Destination file
        max_dimension: Highest dimension to write (default: all)

    Returns:
        Number of rows written
    """
    entries = DirectionNumberTable.read_scipy_bundle()
    if max_dimension is not None:
        entries = entries[: max(0, max_dimension - 1)]

    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, "w", encoding="utf-8") as f:
        f.write("d       s       a       m_i\n")
        for dim, (degree, a, m) in enumerate(entries, start=2):
            f.write(f"{dim}       {degree}       {a}       {' '.join(str(v) for v in m)} \n")
    return len(entries)


def main():
    parser = argparse.ArgumentParser(description="Export Sobol direction numbers in Joe-Kuo format")
    parser.add_argument("--out", default=str(settings.direction_numbers_path), help="Output file")
    parser.add_argument("--max-dimension", type=int, default=None, help="Highest dimension to export")
    args = parser.parse_args()

    try:
        rows = export_table(Path(args.out), args.max_dimension)
    except (OSError, ImportError, QmcdError) as e:
        print(f"Error: {e}")
        sys.exit(1)

    print(f"Wrote {rows} rows (dimensions 2..{rows + 1}) to {args.out}")


if __name__ == "__main__":
    main()
