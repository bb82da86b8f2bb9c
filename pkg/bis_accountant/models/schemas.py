"""
Data models for the BIS accountant
Every object validated from user input or written to a run record lives here
"""
import math
from enum import Enum
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from bis_accountant.core.config import settings

CERTIFICATION_CONVENTION = (
    "additive-split: verify passes iff the empirical-Bernstein UCB at failure probability "
    "eta = delta_split * delta_target is <= (1 - delta_split) * delta_target, and "
    "(epsilon, delta_target) is reported; in a noise search only the released sigma is "
    "charged"
)


class MechanismShape(BaseModel):
    """T iterations, each example participates in exactly k of them"""
    model_config = ConfigDict(frozen=True)

    T: int = Field(..., ge=1, description="Total iterations")
    k: int = Field(..., ge=1, description="Participation count")

    @model_validator(mode="after")
    def check_bounds(self) -> "MechanismShape":
        if self.k > self.T:
            raise ValueError(f"k={self.k} must not exceed T={self.T}")
        if self.T > settings.max_iterations:
            raise ValueError(f"T={self.T} exceeds the iteration cap {settings.max_iterations}")
        return self


class AccountingConfig(BaseModel):
    """Parameters of one Monte Carlo accounting run"""
    model_config = ConfigDict(frozen=True)

    shape: MechanismShape
    sigma: float = Field(..., gt=0, description="Noise multiplier")
    epsilon: float = Field(..., gt=0, description="Privacy budget in nats")
    delta_target: float = Field(..., gt=0, lt=1)
    samples: int = Field(..., description="Monte Carlo sample count")
    seed: int = Field(default=0, ge=0, lt=2**64)
    delta_split: float = Field(default=0.1, gt=0, lt=1)

    @field_validator("samples")
    @classmethod
    def check_samples(cls, value: int) -> int:
        if value < settings.min_samples:
            raise ValueError(f"samples must be at least {settings.min_samples}, got {value}")
        return value

    @property
    def eta(self) -> float:
        """Failure probability reserved for the statistical verifier"""
        return self.delta_split * self.delta_target

    @property
    def delta_prime(self) -> float:
        """Share of delta_target the estimated divergence may use"""
        return (1.0 - self.delta_split) * self.delta_target


class DeltaEstimate(BaseModel):
    """Monte Carlo estimate of the hockey-stick divergence"""
    point: float = Field(..., ge=0, le=1, description="Mean hinge value; reaches 1.0 only through rounding")
    upper_bound: float = Field(..., ge=0, le=1)
    samples_used: int = Field(..., ge=1)
    screened_out: int = Field(..., ge=0)
    exact_evals: int = Field(..., ge=0)
    sum_of_values: float = Field(..., ge=0)
    sum_of_squares: float = Field(..., ge=0)

    @model_validator(mode="after")
    def check_counters(self) -> "DeltaEstimate":
        if self.screened_out + self.exact_evals != self.samples_used:
            raise ValueError("screened_out + exact_evals must equal samples_used")
        if self.point > self.upper_bound:
            raise ValueError("point estimate exceeds its upper confidence bound")
        return self


class CrossCheckEstimate(BaseModel):
    """Estimate of the same divergence from outputs drawn under Q"""
    point: float = Field(..., ge=0)
    standard_error: float = Field(..., ge=0)
    samples_used: int = Field(..., ge=1)
    screened_out: int = Field(..., ge=0)


class SearchMode(str, Enum):
    CERTIFIED = "certified"
    OPTIMISTIC = "optimistic"


class SearchPhase(str, Enum):
    BRACKET = "bracket"
    ASCENT = "ascent"
    DESCENT = "descent"


class TraceEntry(BaseModel):
    """One evaluated noise multiplier"""
    sigma: float
    phase: SearchPhase
    passed: bool
    estimate: DeltaEstimate


class NoiseSearchResult(BaseModel):
    """Outcome of a noise multiplier line search"""
    sigma: float = Field(..., gt=0)
    status: SearchMode
    trace: List[TraceEntry] = Field(default_factory=list)
    total_samples: int = Field(default=0, ge=0)
    sigma_low: float = Field(default=0.0, ge=0)
    sigma_high: float = Field(default=0.0, ge=0)
    note: Optional[str] = None

    @model_validator(mode="after")
    def check_descent(self) -> "NoiseSearchResult":
        descent = [entry.sigma for entry in self.trace if entry.phase == SearchPhase.DESCENT]
        if any(later >= earlier for earlier, later in zip(descent, descent[1:])):
            raise ValueError("descent trace must be strictly decreasing in sigma")
        return self


class RuntimeInfo(BaseModel):
    """Environment facts that vary between otherwise identical runs"""
    wall_time_seconds: float = Field(..., ge=0)
    worker_count: int = Field(..., ge=1)


class RunRecord(BaseModel):
    """One line of accountant output"""
    command: Literal["estimate-delta", "find-sigma"]
    config: Dict[str, Any]
    result: Union[DeltaEstimate, NoiseSearchResult]
    artifact_version: str
    certification_convention: str = CERTIFICATION_CONVENTION
    settings: Dict[str, Any] = Field(default_factory=dict)
    fingerprint: str = ""
    runtime: Optional[RuntimeInfo] = None

    @field_validator("config")
    @classmethod
    def check_finite(cls, value: Dict[str, Any]) -> Dict[str, Any]:
        for key, item in value.items():
            if isinstance(item, float) and not math.isfinite(item):
                raise ValueError(f"config field {key} must be finite to be reproducible")
        return value
