import math
from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

from qmcd.models.discrepancy import DiscrepancySpec
from qmcd.models.generator import GeneratorSpec, ParamVector
from qmcd.models.point_set import SequenceFamily


class SamplerKind(str, Enum):
    MC = "mc"
    RQMC = "rqmc"


class SamplerSpec(BaseModel):
    kind: SamplerKind = SamplerKind.RQMC
    family: SequenceFamily = SequenceFamily.SOBOL

    @property
    def label(self) -> str:
        return "MC" if self.kind == SamplerKind.MC else f"RQMC-{self.family.value}"


class OptimizerKind(str, Enum):
    DE = "de"
    SGD = "sgd"


class DEOptions(BaseModel):
    pop: Optional[int] = Field(None, ge=4, description="Population size; None means 15 * p")
    F: float = Field(0.8, gt=0, le=2)
    CR: float = Field(0.9, ge=0, le=1)
    bounds: List[Tuple[float, float]] = Field(default_factory=list)


class SGDOptions(BaseModel):
    step: float = Field(0.2, ge=0)
    exp_coordinates: List[int] = Field(default_factory=list, description="Coordinates optimized on the log scale")
    bounds: List[Tuple[float, float]] = Field(default_factory=list, description="Admissible box in optimizer coordinates")
    fd_step: Optional[float] = Field(None, gt=0)


class MDEConfig(BaseModel):
    discrepancy: DiscrepancySpec
    sampler: SamplerSpec = Field(default_factory=SamplerSpec)
    n_sim: Optional[int] = Field(None, ge=1)
    gamma: Optional[float] = Field(None, description="n_sim = minibatch ** gamma when n_sim is unset")
    minibatch: int = Field(..., ge=1)
    iterations: int = Field(..., ge=0)
    seed: int = 0
    optimizer: OptimizerKind = OptimizerKind.DE
    de: DEOptions = Field(default_factory=DEOptions)
    sgd: SGDOptions = Field(default_factory=SGDOptions)
    rescramble: bool = Field(True, description="Fresh scramble seed per objective evaluation")
    jobs: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _check(self) -> "MDEConfig":
        if self.n_sim is None and self.gamma is None:
            raise ValueError("set n_sim or gamma")
        if self.gamma is not None and min(abs(self.gamma - g) for g in (1.0, 0.75, 2.0 / 3.0, 0.5)) > 1e-9:
            raise ValueError("gamma must be one of 1, 3/4, 2/3, 1/2")
        if self.optimizer == OptimizerKind.DE:
            for lo, hi in self.de.bounds:
                if not (lo < hi) or abs(lo) == float("inf") or abs(hi) == float("inf"):
                    raise ValueError(f"DE bounds must be finite intervals, got ({lo}, {hi})")
        return self

    def resolved_n_sim(self) -> int:
        if self.n_sim is not None:
            return self.n_sim
        return max(1, int(round(self.minibatch ** self.gamma)))


class TrajectoryRecord(BaseModel):
    iteration: int
    objective: float
    theta: List[float]
    wall_clock: float = Field(..., ge=0)


class MDEResult(BaseModel):
    theta_hat: ParamVector
    trajectory: List[TrajectoryRecord]
    final_discrepancy_full_data: Optional[float] = None
    skipped_steps: int = 0


class ABCConfig(BaseModel):
    generator: GeneratorSpec
    discrepancy: DiscrepancySpec
    prior_bounds: List[Tuple[float, float]]
    epsilon: float = Field(..., ge=0)
    attempts: int = Field(..., ge=1)
    n_sim: int = Field(..., ge=1)
    sampler: SamplerSpec = Field(default_factory=SamplerSpec)
    seed: int = 0
    data_path: Optional[str] = None
    data_theta: Optional[List[float]] = Field(None, description="Simulate the observations from this theta when no data file is given")
    data_size: int = Field(2 ** 10, ge=1)


class ABCResult(BaseModel):
    accepted: List[ParamVector]
    attempted: int = Field(..., ge=1)
    epsilon: float
    acceptance_rate: float = Field(..., ge=0, le=1)
    distances: List[float] = Field(default_factory=list, description="Discrepancy of every attempt, in attempt order")
    accepted_index: List[int] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check(self) -> "ABCResult":
        if abs(self.acceptance_rate - len(self.accepted) / self.attempted) > 1e-15:
            raise ValueError("acceptance_rate must equal |accepted| / attempted")
        return self


class MDERunConfig(BaseModel):
    """File-level config for the `mde` subcommand."""

    generator: GeneratorSpec
    mde: MDEConfig
    theta0: Optional[List[float]] = None
    data_path: Optional[str] = None
    data_theta: Optional[List[float]] = None
    data_size: int = Field(2 ** 14, ge=1)
    log_scale_inputs: bool = Field(
        False, description="theta0 and data_theta give the sgd.exp_coordinates on the log scale"
    )

    @model_validator(mode="after")
    def _check(self) -> "MDERunConfig":
        p = self.generator.param_count
        for name in ("theta0", "data_theta"):
            values = getattr(self, name)
            if values is not None and len(values) != p:
                raise ValueError(f"{name} has {len(values)} values, {self.generator.kind.value} has {p} parameters")
        if any(not 0 <= j < p for j in self.mde.sgd.exp_coordinates):
            raise ValueError(f"sgd.exp_coordinates must index the {p} parameters")
        return self

    def generator_scale(self, values: Optional[List[float]]) -> Optional[List[float]]:
        """`values` in generator coordinates."""
        if values is None or not self.log_scale_inputs:
            return values
        out = list(values)
        for j in self.mde.sgd.exp_coordinates:
            out[j] = math.exp(out[j])
        return out
