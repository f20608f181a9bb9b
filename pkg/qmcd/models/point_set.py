from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class SequenceFamily(str, Enum):
    SOBOL = "sobol"
    HALTON = "halton"
    LATTICE = "lattice"
    VAN_DER_CORPUT = "van_der_corput"
    PSEUDO_RANDOM = "pseudo_random"


def _documented_alpha(family: SequenceFamily, s: int) -> Optional[float]:
    # log-exponent of the star discrepancy bound; reporting only
    if family in (SequenceFamily.SOBOL, SequenceFamily.VAN_DER_CORPUT):
        return float(s - 1)
    if family == SequenceFamily.HALTON:
        return float(s)
    if family == SequenceFamily.LATTICE:
        return 2.0 if s == 2 else float(s)
    return None


class PointSet(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    points: np.ndarray = Field(..., description="n x s coordinates in [0, 1)")
    family: SequenceFamily
    seed: Optional[int] = Field(None, description="Randomization seed, present iff randomized")

    @field_validator("points")
    @classmethod
    def _check_points(cls, value: np.ndarray) -> np.ndarray:
        arr = np.array(value, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"points must be an n x s matrix with n, s >= 1, got shape {arr.shape}")
        if not np.all((arr >= 0.0) & (arr < 1.0)):
            raise ValueError("every coordinate must lie in [0, 1)")
        arr.setflags(write=False)
        return arr

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def s(self) -> int:
        return self.points.shape[1]

    @property
    def alpha_s(self) -> Optional[float]:
        return _documented_alpha(self.family, self.s)

    @property
    def randomized(self) -> bool:
        return self.seed is not None
