from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field, model_validator


class KernelKind(str, Enum):
    SE = "se"
    MATERN32 = "matern32"
    MATERN52 = "matern52"
    MATERN72 = "matern72"


class KernelSpec(BaseModel):
    kind: KernelKind = KernelKind.SE
    amplitude: float = Field(1.0, gt=0, description="Kernel amplitude lambda_k")
    lengthscale: Optional[float] = Field(None, gt=0, description="sigma; None means 1.5 * sqrt(d)")

    def resolved_lengthscale(self, d: int) -> float:
        return self.lengthscale if self.lengthscale is not None else 1.5 * d ** 0.5


class CostMetric(str, Enum):
    EUCLIDEAN = "euclidean"
    L1 = "l1"
    LINF = "linf"


class CostSpec(BaseModel):
    metric: CostMetric = CostMetric.EUCLIDEAN
    p: float = Field(1.0, ge=1, description="Cost exponent")


class DiscrepancyKind(str, Enum):
    MMD = "mmd"
    MMD_U = "mmd_u"
    WASSERSTEIN = "wasserstein"
    SINKHORN = "sinkhorn"
    SLICED = "sliced"


class DiscrepancySpec(BaseModel):
    kind: DiscrepancyKind
    kernel: KernelSpec = Field(default_factory=KernelSpec)
    include_diagonal: bool = Field(False, description="V-statistic instead of the off-diagonal plug-in")
    cost: CostSpec = Field(default_factory=CostSpec)
    lambda_s: float = Field(1.0, gt=0, description="Sinkhorn regularization")
    tol: Optional[float] = Field(None, gt=0)
    max_iter: Optional[int] = Field(None, ge=1)
    slices: int = Field(100, ge=1)
    direction_seed: int = 0
    qmc_directions: bool = False

    @property
    def label(self) -> str:
        if self.kind in (DiscrepancyKind.MMD, DiscrepancyKind.MMD_U):
            suffix = "-v" if self.include_diagonal and self.kind == DiscrepancyKind.MMD else ""
            return f"{self.kind.value}{suffix}[{self.kernel.kind.value}]"
        if self.kind == DiscrepancyKind.SINKHORN:
            return f"sinkhorn[{self.cost.metric.value},p={self.cost.p:g},lambda={self.lambda_s:g}]"
        if self.kind == DiscrepancyKind.SLICED:
            return f"sliced[p={self.cost.p:g},L={self.slices}]"
        return f"wasserstein[{self.cost.metric.value},p={self.cost.p:g}]"

    @property
    def squared_scale(self) -> float:
        """Power q such that |value|^(1/q) is on the distance scale."""
        if self.kind in (DiscrepancyKind.MMD, DiscrepancyKind.MMD_U):
            return 2.0
        if self.kind == DiscrepancyKind.SINKHORN:
            return self.cost.p
        return 1.0


class SinkhornResult(BaseModel):
    value: float
    iterations: int = Field(..., ge=0)
    marginal_error: float = Field(..., ge=0)
    converged: bool
    tol: float

    @model_validator(mode="after")
    def _check(self) -> "SinkhornResult":
        if self.converged and self.marginal_error > self.tol:
            raise ValueError("converged result must satisfy marginal_error <= tol")
        return self


class GradientEstimate(BaseModel):
    values: List[float]
    one_sided: List[bool] = Field(..., description="True where the central difference fell back to one side")

    @property
    def any_one_sided(self) -> bool:
        return any(self.one_sided)
