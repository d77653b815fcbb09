"""
Experiment specification and result records
"""

from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..conic.solver import SolverOptions
from .system import RadioConfig, RateConfig, SystemGeometry, Tolerances


class ExperimentKind(str, Enum):
    SOP_TIGHTNESS = "sop-tightness"
    CONVERGE_FULL = "converge-full"
    CONVERGE_STAT = "converge-stat"
    SWEEP_POWER = "sweep-power"
    SWEEP_ELEMENTS = "sweep-elements"
    QUANTIZATION = "quantization"
    PLACEMENT = "placement"
    SOLVE_ONE = "solve-one"


class Metric(str, Enum):
    SECRECY_CAPACITY = "secrecy_capacity"
    SOP = "sop"
    TRANSMISSION_RATE = "transmission_rate"


class SchemeKind(str, Enum):
    """Transmission schemes compared in the sweeps"""
    STAR_NOMA = "star-noma"
    STAR_OMA = "star-oma"
    CRIS_NOMA = "cris-noma"
    CRIS_OMA = "cris-oma"
    RANDOM_PHASE = "random-phase"

    @property
    def is_oma(self) -> bool:
        return self in (SchemeKind.STAR_OMA, SchemeKind.CRIS_OMA)

    @property
    def is_conventional(self) -> bool:
        return self in (SchemeKind.CRIS_NOMA, SchemeKind.CRIS_OMA)


SOP_ESTIMATORS = ("closed-form", "monte-carlo")
ALL_SCHEMES = [kind.value for kind in SchemeKind]

DEFAULT_SWEEPS = {
    ExperimentKind.SOP_TIGHTNESS: [10.0, 20.0, 30.0, 40.0, 50.0],
    ExperimentKind.CONVERGE_FULL: [0.0],
    ExperimentKind.CONVERGE_STAT: [0.0],
    ExperimentKind.SWEEP_POWER: [5.0, 10.0, 15.0, 20.0],
    ExperimentKind.SWEEP_ELEMENTS: [4.0, 8.0, 12.0],
    ExperimentKind.QUANTIZATION: [0.0, 1.0, 2.0, 3.0, 4.0],
    ExperimentKind.PLACEMENT: [10.0, 20.0, 30.0, 40.0, 50.0],
    ExperimentKind.SOLVE_ONE: [0.0],
}

DEFAULT_SCHEMES = {
    ExperimentKind.SOP_TIGHTNESS: list(SOP_ESTIMATORS),
    ExperimentKind.CONVERGE_FULL: [SchemeKind.STAR_NOMA.value],
    ExperimentKind.CONVERGE_STAT: [SchemeKind.STAR_NOMA.value],
    ExperimentKind.QUANTIZATION: [SchemeKind.STAR_NOMA.value],
    ExperimentKind.SOLVE_ONE: [SchemeKind.STAR_NOMA.value],
}

DEFAULT_METRICS = {
    ExperimentKind.SOP_TIGHTNESS: Metric.SOP,
    ExperimentKind.CONVERGE_STAT: Metric.SOP,
}


class ExperimentSpec(BaseModel):
    """One reproducible study: what to sweep, which schemes, how many trials"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    experiment: ExperimentKind = Field(..., description="Experiment id")
    sweep: List[float] = Field(default_factory=list, description="Sweep axis values; empty selects the default")
    trials: int = Field(default=20, description="Channel realizations per sweep point")
    seed: int = Field(default=0, description="Experiment seed")
    schemes: List[str] = Field(default_factory=list, description="Schemes; empty selects the default")
    metric: Optional[Metric] = Field(default=None, description="Reported metric; None selects the default")
    geometry: SystemGeometry = Field(default_factory=SystemGeometry)
    radio: RadioConfig = Field(default_factory=RadioConfig)
    rates: RateConfig = Field(default_factory=RateConfig)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    solver: SolverOptions = Field(default_factory=SolverOptions)
    mc_trials: int = Field(default=100000, description="Eavesdropper draws per Monte-Carlo SOP estimate")
    workers: Optional[int] = Field(default=None, description="Worker processes; None uses the CPU count")

    @field_validator('trials')
    @classmethod
    def validate_trials(cls, v):
        if v < 1:
            raise ValueError('At least one trial is required')
        return v

    @field_validator('seed')
    @classmethod
    def validate_seed(cls, v):
        if not 0 <= v < 2 ** 64:
            raise ValueError('Seed must be an unsigned 64-bit integer')
        return v

    @field_validator('mc_trials')
    @classmethod
    def validate_mc_trials(cls, v):
        if v < 1000:
            raise ValueError('Monte-Carlo SOP needs at least 1000 draws')
        return v

    @field_validator('workers')
    @classmethod
    def validate_workers(cls, v):
        if v is not None and v < 1:
            raise ValueError('Worker count must be at least 1')
        return v

    @model_validator(mode="before")
    @classmethod
    def fill_defaults(cls, data):
        if not isinstance(data, dict) or "experiment" not in data:
            return data
        try:
            kind = ExperimentKind(data["experiment"])
        except ValueError:
            return data
        data = dict(data)
        if not data.get("sweep"):
            data["sweep"] = list(DEFAULT_SWEEPS[kind])
        if not data.get("schemes"):
            data["schemes"] = list(DEFAULT_SCHEMES.get(kind, ALL_SCHEMES))
        if data.get("metric") is None:
            data["metric"] = DEFAULT_METRICS.get(kind, Metric.SECRECY_CAPACITY)
        return data

    @model_validator(mode="after")
    def validate_combination(self):
        valid = SOP_ESTIMATORS if self.experiment is ExperimentKind.SOP_TIGHTNESS else ALL_SCHEMES
        unknown = [s for s in self.schemes if s not in valid]
        if unknown:
            raise ValueError(f'Schemes {unknown} are not valid for {self.experiment.value}; choose from {list(valid)}')
        if self.experiment in (ExperimentKind.CONVERGE_FULL, ExperimentKind.CONVERGE_STAT) \
                and self.schemes != [SchemeKind.STAR_NOMA.value]:
            raise ValueError('Convergence experiments trace the star-noma pipeline only')
        if self.experiment is ExperimentKind.SWEEP_ELEMENTS and any(x < 1 or x != int(x) for x in self.sweep):
            raise ValueError('Element counts must be positive integers')
        if self.experiment is ExperimentKind.QUANTIZATION and any(x < 0 or x != int(x) for x in self.sweep):
            raise ValueError('Quantization levels must be nonnegative integers (0 = continuous)')
        if self.experiment is ExperimentKind.SOP_TIGHTNESS and any(x <= 0 for x in self.sweep):
            raise ValueError('Eavesdropper distances must be positive')
        return self


class ExperimentRecord(BaseModel):
    """Aggregate of one (scheme, sweep value, metric) cell"""
    model_config = ConfigDict(extra="forbid")

    scheme: str
    x: float
    metric: str
    mean: float
    std: float
    trials: int
    infeasible: int
    seed: int

    @field_validator('std')
    @classmethod
    def validate_std(cls, v):
        if v < 0:
            raise ValueError('Standard deviation must be nonnegative')
        return v

    @model_validator(mode="after")
    def validate_counts(self):
        if not 0 <= self.infeasible <= self.trials:
            raise ValueError('Infeasible count must lie between 0 and the trial count')
        return self
