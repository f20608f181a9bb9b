from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from qmcd.models.discrepancy import DiscrepancySpec
from qmcd.models.generator import GeneratorSpec
from qmcd.models.inference import SamplerSpec


class ErrorMode(str, Enum):
    SELF_VS_SELF = "self_vs_self"
    VS_REFERENCE = "vs_reference"


class ErrorTransform(str, Enum):
    ABS = "abs"
    ROOT = "root"


class SweepConfig(BaseModel):
    name: str = "sweep"
    generator: GeneratorSpec
    theta: List[float] = Field(default_factory=list)
    discrepancies: List[DiscrepancySpec]
    samplers: List[SamplerSpec]
    d_list: List[int] = Field(..., min_length=1)
    n_grid: List[int] = Field(..., min_length=1)
    repetitions: int = Field(25, ge=1)
    error_mode: ErrorMode = ErrorMode.SELF_VS_SELF
    error_transform: ErrorTransform = ErrorTransform.ABS
    m_ref: int = Field(2 ** 16, ge=1)
    seed: int = 0
    identical_sides: bool = Field(False, description="Both sides reuse one point-set seed (D(P,P) check)")
    fit_fraction: str = Field("upper_half", pattern="^(upper_half|all)$")

    @field_validator("n_grid")
    @classmethod
    def _strictly_increasing(cls, value: List[int]) -> List[int]:
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("n grid must be strictly increasing")
        if any(n < 1 for n in value):
            raise ValueError("n grid entries must be positive")
        return value


class SweepRecord(BaseModel):
    generator: str
    discrepancy: str
    sampler: str
    d: int
    n: int
    repetition: int
    value: float = Field(..., description="Raw discrepancy value")
    error: float = Field(..., ge=0, description="Transformed error used for aggregation")
    wall_clock: float = Field(0.0, ge=0, description="Seconds; kept out of the results CSV")
    reference_hash: str = Field("", description="sha256 of the data-side measure")

    @model_validator(mode="after")
    def _finite(self) -> "SweepRecord":
        if self.value != self.value or self.value in (float("inf"), float("-inf")):
            raise ValueError("value must be finite")
        return self


class SweepFailure(BaseModel):
    generator: str
    discrepancy: str
    sampler: str
    d: int
    n: int
    repetition: Optional[int] = None
    reason: str


class AggregatedCell(BaseModel):
    generator: str
    discrepancy: str
    sampler: str
    d: int
    n: int
    mean: float
    min: float
    max: float
    count: int


class SlopeFit(BaseModel):
    slope: float
    intercept: float
    residual_rms: float
    n_min: int
    n_max: int
    points_used: int = Field(..., ge=4)
    generator: str = ""
    discrepancy: str = ""
    sampler: str = ""
    d: int = 0
