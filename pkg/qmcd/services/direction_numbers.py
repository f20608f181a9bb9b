"""
Sobol direction numbers.
Reads a Joe-Kuo style table from QMCD_DATA_DIR when present, otherwise the table bundled with scipy.
"""

import logging
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from qmcd.config import settings
from qmcd.errors import InvalidArgumentError, QmcdError, UnsupportedDimensionError

logger = logging.getLogger(__name__)

OUTPUT_BITS = 52

# Joe-Kuo table (21201 dimensions) shipped as scipy package data, outside its public API
SCIPY_BUNDLE = "_sobol_direction_numbers.npz"


class DirectionNumberTable:
    """Primitive polynomials and initial direction numbers, one entry per dimension after the first."""

    def __init__(self, path: Optional[Path] = None):
        path = Path(path) if path is not None else settings.direction_numbers_path
        try:
            if path.is_file():
                self.entries = self._read_joe_kuo(path)
                self.source = str(path)
            else:
                self.entries = self.read_scipy_bundle()
                self.source = f"scipy.stats/{SCIPY_BUNDLE}"
            logger.info(f"Loaded {self.max_dimension} Sobol dimensions from {self.source}")
        except Exception as e:
            logger.error(f"Failed to load Sobol direction numbers: {str(e)}")
            raise
        self._cache = lru_cache(maxsize=8)(self._build)

    @property
    def max_dimension(self) -> int:
        # dimension 1 is van der Corput and needs no table entry
        return len(self.entries) + 1

    @staticmethod
    def _read_joe_kuo(path: Path) -> List[Tuple[int, int, List[int]]]:
        entries = []
        with open(path, "r", encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                fields = line.split()
                if not fields or not fields[0].isdigit():
                    continue
                degree, a = int(fields[1]), int(fields[2])
                m = [int(v) for v in fields[3:]]
                if len(m) != degree:
                    raise InvalidArgumentError(f"{path}:{line_no}: expected {degree} initial numbers, got {len(m)}")
                entries.append((degree, a, m))
        return entries

    @staticmethod
    def read_scipy_bundle() -> List[Tuple[int, int, List[int]]]:
        bundle = resources.files("scipy.stats") / SCIPY_BUNDLE
        try:
            with resources.as_file(bundle) as npz_path:
                data = np.load(npz_path)
                poly, vinit = data["poly"], data["vinit"]
        except (FileNotFoundError, KeyError) as e:
            raise QmcdError(
                f"scipy.stats has no usable {SCIPY_BUNDLE} ({str(e)}); put a Joe-Kuo table at {settings.direction_numbers_path}"
            )
        entries = []
        for j in range(1, len(poly)):
            p = int(poly[j])
            degree = p.bit_length() - 1
            a = (p >> 1) & ((1 << (degree - 1)) - 1)
            entries.append((degree, a, [int(v) for v in vinit[j, :degree]]))
        return entries

    def _build(self, s: int) -> np.ndarray:
        v = np.zeros((s, OUTPUT_BITS), dtype=np.uint64)
        for k in range(OUTPUT_BITS):
            v[0, k] = 1 << (OUTPUT_BITS - 1 - k)
        for j in range(1, s):
            degree, a, m_init = self.entries[j - 1]
            m = list(m_init)
            for k in range(degree, OUTPUT_BITS):
                new = m[k - degree] ^ (m[k - degree] << degree)
                for i in range(1, degree):
                    if (a >> (degree - 1 - i)) & 1:
                        new ^= m[k - i] << i
                m.append(new)
            for k in range(OUTPUT_BITS):
                v[j, k] = m[k] << (OUTPUT_BITS - 1 - k)
        v.setflags(write=False)
        return v

    def direction_numbers(self, s: int) -> np.ndarray:
        """s x 52 matrix; row j, column k is the (k+1)-th direction number of dimension j scaled to 52 bits."""
        if s < 1:
            raise InvalidArgumentError(f"dimension must be >= 1, got {s}")
        if s > self.max_dimension:
            raise UnsupportedDimensionError(
                f"Sobol dimension {s} exceeds the {self.max_dimension} dimensions of {self.source}"
            )
        return self._cache(s)


_table_singleton: Optional[DirectionNumberTable] = None


def init_direction_numbers(instance: DirectionNumberTable) -> None:
    """Install the process-wide table. The CLI calls this once at startup."""
    global _table_singleton
    _table_singleton = instance


def get_direction_numbers() -> DirectionNumberTable:
    """Return the process-wide table, loading the default one on first use."""
    global _table_singleton
    if _table_singleton is None:
        _table_singleton = DirectionNumberTable()
    return _table_singleton
