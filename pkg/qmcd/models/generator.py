from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from qmcd.utils.seeding import philox


class GeneratorKind(str, Enum):
    UNIFORM = "uniform"
    GAUSSIAN = "gaussian"
    GAUSSIAN_LOCATION = "gaussian_location"
    GANDK = "gandk"
    BIVARIATE_BETA = "bivariate_beta"
    MLP = "mlp"


GANDK_NAMES = ["a", "b", "g", "k", "rho"]
BIVBETA_NAMES = ["theta1", "theta2", "theta3", "theta4", "theta5"]


class ParamVector(BaseModel):
    values: List[float] = Field(default_factory=list, description="Parameter values theta")
    names: List[str] = Field(default_factory=list, description="One label per value")

    @model_validator(mode="after")
    def _check(self) -> "ParamVector":
        if len(self.values) != len(self.names):
            raise ValueError(f"{len(self.values)} values but {len(self.names)} names")
        if not all(np.isfinite(v) for v in self.values):
            raise ValueError("parameter values must be finite")
        return self

    @classmethod
    def from_array(cls, values, names: List[str]) -> "ParamVector":
        return cls(values=[float(v) for v in np.asarray(values, dtype=np.float64).ravel()], names=list(names))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)

    @property
    def p(self) -> int:
        return len(self.values)


class GeneratorSpec(BaseModel):
    kind: GeneratorKind
    d: int = Field(1, ge=1, description="Output dimension (fixed to 2 for the bivariate Beta)")
    weights_ref: Optional[str] = Field(None, description="MLP weight file (CSV sections W1, b1, ...)")

    @model_validator(mode="after")
    def _check(self) -> "GeneratorSpec":
        if self.kind == GeneratorKind.BIVARIATE_BETA and self.d != 2:
            raise ValueError("the bivariate Beta generator has d = 2")
        if self.kind == GeneratorKind.MLP and not self.weights_ref:
            raise ValueError("the MLP generator needs weights_ref")
        return self

    @property
    def param_names(self) -> List[str]:
        if self.kind in (GeneratorKind.UNIFORM, GeneratorKind.GAUSSIAN, GeneratorKind.MLP):
            return []
        if self.kind == GeneratorKind.GAUSSIAN_LOCATION:
            return [f"mu{j}" for j in range(self.d)]
        if self.kind == GeneratorKind.GANDK:
            return list(GANDK_NAMES)
        return list(BIVBETA_NAMES)

    @property
    def param_count(self) -> int:
        return len(self.param_names)

    def params(self, values) -> ParamVector:
        return ParamVector.from_array(values, self.param_names)

    def input_dim(self, theta: Optional[ParamVector] = None) -> int:
        """Dimension s(θ) of the uniform input space."""
        if self.kind == GeneratorKind.BIVARIATE_BETA:
            if theta is None:
                raise ValueError("s depends on theta for the bivariate Beta generator")
            values = theta.array
            whole = int(np.sum(np.floor(values)))
            fractional = bool(np.any(values != np.floor(values)))
            return whole + 15 if fractional else whole
        if self.kind == GeneratorKind.MLP:
            from qmcd.services.generators import load_mlp_weights
            return load_mlp_weights(self.weights_ref).input_dim
        return self.d

    def gradient_input_dim(self, theta: ParamVector) -> int:
        """Point-set dimension that covers theta and every perturbation keeping its column layout."""
        if self.kind == GeneratorKind.BIVARIATE_BETA:
            return int(np.sum(np.floor(theta.array))) + 15
        return self.input_dim(theta)

    def same_input_layout(self, a, b) -> bool:
        """Whether two parameter vectors read the point-set columns the same way."""
        if self.kind != GeneratorKind.BIVARIATE_BETA:
            return True
        return bool(np.array_equal(np.floor(np.asarray(a, dtype=np.float64)), np.floor(np.asarray(b, dtype=np.float64))))

    def default_bounds(self) -> List[Tuple[float, float]]:
        """Admissible box used when an optimizer is not given explicit bounds."""
        if self.kind == GeneratorKind.GANDK:
            return [(-10.0, 10.0), (1e-3, 10.0), (-10.0, 10.0), (-10.0, 10.0), (-0.5, 0.5)]
        if self.kind == GeneratorKind.BIVARIATE_BETA:
            return [(1e-3, 10.0)] * 5
        return [(-10.0, 10.0)] * self.param_count


class EmpiricalMeasure(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    samples: np.ndarray = Field(..., description="n x d sample matrix, uniform weights 1/n")

    @field_validator("samples")
    @classmethod
    def _check_samples(cls, value: np.ndarray) -> np.ndarray:
        arr = np.array(value, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"samples must be an n x d matrix with n >= 1, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite")
        arr.setflags(write=False)
        return arr

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def d(self) -> int:
        return self.samples.shape[1]


class MLPWeights(BaseModel):
    """Decoder weights; layer l maps h_{l-1} -> h_l as h W_l + b_l."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    weights: List[np.ndarray]
    biases: List[np.ndarray]

    @model_validator(mode="after")
    def _check_shapes(self) -> "MLPWeights":
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ValueError("need one bias per weight matrix")
        for l, (w, b) in enumerate(zip(self.weights, self.biases), start=1):
            if w.ndim != 2 or b.ndim != 1 or w.shape[1] != b.shape[0]:
                raise ValueError(f"layer {l}: W{l} {w.shape} does not match b{l} {b.shape}")
            if l > 1 and self.weights[l - 2].shape[1] != w.shape[0]:
                raise ValueError(f"layer {l}: W{l} has {w.shape[0]} rows, previous layer emits {self.weights[l - 2].shape[1]}")
        return self

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[1]

    @property
    def layer_sizes(self) -> List[int]:
        return [self.input_dim] + [w.shape[1] for w in self.weights]

    @classmethod
    def random(cls, layer_sizes: List[int] = (2, 500, 500, 784), seed: int = 0) -> "MLPWeights":
        """Untrained decoder with N(0, 1/fan_in) weights and zero biases."""
        rng = philox(seed)
        weights, biases = [], []
        for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
            weights.append(rng.standard_normal((fan_in, fan_out)) / np.sqrt(fan_in))
            biases.append(np.zeros(fan_out))
        return cls(weights=weights, biases=biases)
