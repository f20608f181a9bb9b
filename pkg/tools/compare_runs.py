#!/usr/bin/env python3
"""
Compare two result directories file by file - used to check that reruns with the same
seed and --jobs 1 are byte-identical.
"""

import argparse
import sys
from pathlib import Path

import pandas as pd

# Wall-clock files and manifests legitimately differ between runs
SKIP_PATTERNS = ["*timings.csv", "manifest.json"]


def _skipped(path: Path) -> bool:
    return any(path.match(pattern) for pattern in SKIP_PATTERNS)


def compare_csv(file1: Path, file2: Path, max_rows: int = 5) -> bool:
    """
    Compare two CSV files row by row.

    Args:
        file1: First CSV file
        file2: Second CSV file
        max_rows: Number of differing rows to print

    Returns:
        True when the files are byte-identical
    """
    if file1.read_bytes() == file2.read_bytes():
        return True

    df1 = pd.read_csv(file1, dtype=str, keep_default_na=False)
    df2 = pd.read_csv(file2, dtype=str, keep_default_na=False)
    print(f"❌ {file1.name}: contents differ")
    if list(df1.columns) != list(df2.columns):
        print(f"   Columns: {list(df1.columns)} vs {list(df2.columns)}")
        return False
    if len(df1) != len(df2):
        print(f"   Rows: {len(df1)} vs {len(df2)}")
        return False

    differing = df1.ne(df2).any(axis=1)
    print(f"   {int(differing.sum())} of {len(df1)} rows differ")
    for index in list(df1.index[differing])[:max_rows]:
        columns = [c for c in df1.columns if df1.at[index, c] != df2.at[index, c]]
        for column in columns:
            print(f"   row {index} {column}: {df1.at[index, column]} vs {df2.at[index, column]}")
    return False


def compare_runs(dir1: Path, dir2: Path) -> bool:
    files1 = {p.relative_to(dir1) for p in dir1.rglob("*") if p.is_file() and not _skipped(p)}
    files2 = {p.relative_to(dir2) for p in dir2.rglob("*") if p.is_file() and not _skipped(p)}

    print(f"Comparing {dir1} vs {dir2}")
    print("-" * 60)
    identical = True
    for name in sorted(files1 ^ files2):
        print(f"❌ {name} only in {dir1 if name in files1 else dir2}")
        identical = False

    for name in sorted(files1 & files2):
        if name.suffix == ".csv":
            same = compare_csv(dir1 / name, dir2 / name)
        else:
            same = (dir1 / name).read_bytes() == (dir2 / name).read_bytes()
            if not same:
                print(f"❌ {name}: bytes differ")
        identical = identical and same

    print("\n✅ Runs are identical!" if identical else "\n❌ Runs differ!")
    return identical


def main():
    parser = argparse.ArgumentParser(description="Compare two qmcd output directories")
    parser.add_argument("dir1")
    parser.add_argument("dir2")
    args = parser.parse_args()

    for directory in (args.dir1, args.dir2):
        if not Path(directory).is_dir():
            print(f"Error: {directory} not found!")
            sys.exit(1)

    sys.exit(0 if compare_runs(Path(args.dir1), Path(args.dir2)) else 1)


if __name__ == "__main__":
    main()
