# Models package
from .discrepancy import (
    CostMetric,
    CostSpec,
    DiscrepancyKind,
    DiscrepancySpec,
    GradientEstimate,
    KernelKind,
    KernelSpec,
    SinkhornResult,
)
from .experiment import AggregatedCell, ErrorMode, ErrorTransform, SlopeFit, SweepConfig, SweepFailure, SweepRecord
from .generator import EmpiricalMeasure, GeneratorKind, GeneratorSpec, MLPWeights, ParamVector
from .inference import (
    ABCConfig,
    ABCResult,
    DEOptions,
    MDEConfig,
    MDEResult,
    MDERunConfig,
    OptimizerKind,
    SamplerKind,
    SamplerSpec,
    SGDOptions,
    TrajectoryRecord,
)
from .point_set import PointSet, SequenceFamily
