"""
Pydantic models for constrained multi-objective search.

An ObjectiveMode names which metrics are optimized (accuracy is always
maximized, the others minimized) and the constraints that apply. Every
evaluated design becomes a Candidate; a search run is a RunRecord holding
the append-only candidate log and the resulting Pareto front.
"""

from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from estimator.models.hardware_models import HardwareConfig
from estimator.models.workload_models import ModelConfig

DEFAULT_LATENCY_CAP_S = 0.050


class ObjectiveVariant(str, Enum):
    """The four search modes, valued by their CLI names"""

    ACC_CARBON = "carbon"                   # latency-constrained
    ACC_LATENCY = "latency"
    ACC_ENERGY = "energy"                   # latency-constrained
    ACC_LATENCY_CARBON = "carbon+latency"


# Minimized metrics per variant, in objective order after accuracy
MINIMIZED_METRICS = {
    ObjectiveVariant.ACC_CARBON: ("carbon_kg",),
    ObjectiveVariant.ACC_LATENCY: ("latency_s",),
    ObjectiveVariant.ACC_ENERGY: ("energy_j",),
    ObjectiveVariant.ACC_LATENCY_CARBON: ("latency_s", "carbon_kg"),
}

LEAD_METRIC = {
    ObjectiveVariant.ACC_CARBON: "carbon_kg",
    ObjectiveVariant.ACC_LATENCY: "latency_s",
    ObjectiveVariant.ACC_ENERGY: "energy_j",
    ObjectiveVariant.ACC_LATENCY_CARBON: "carbon_kg",
}


class Metrics(BaseModel):
    """Evaluated metrics of one design, per inference unless stated"""

    model_config = ConfigDict(frozen=True)

    accuracy: float = Field(..., ge=0, le=1)
    latency_s: float = Field(..., ge=0)
    energy_j: float = Field(..., ge=0)
    carbon_kg: float = Field(..., ge=0, description="Lifetime total carbon")
    embodied_kg: float = Field(..., ge=0)
    operational_kg: float = Field(..., ge=0)
    area_mm2: float = Field(..., ge=0)
    params: int = Field(..., ge=0)
    peak_tops: float = Field(..., ge=0)
    utilization: float = Field(0.0, ge=0, le=1)


class ObjectiveMode(BaseModel):
    model_config = ConfigDict(frozen=True)

    variant: ObjectiveVariant
    latency_cap_s: Optional[float] = Field(
        None, gt=0, description="Latency constraint; only for modes without a latency objective"
    )
    tops_budget: float = Field(20.0, gt=0)

    @model_validator(mode="before")
    @classmethod
    def _default_cap(cls, data):
        if isinstance(data, dict):
            variant = ObjectiveVariant(data.get("variant"))
            if not cls.has_latency_objective(variant) and data.get("latency_cap_s") is None:
                data = {**data, "latency_cap_s": DEFAULT_LATENCY_CAP_S}
        return data

    @model_validator(mode="after")
    def _check_cap(self) -> "ObjectiveMode":
        if self.has_latency_objective(self.variant) and self.latency_cap_s is not None:
            raise ValueError(f"mode '{self.variant.value}' optimizes latency and takes no latency cap")
        return self

    @staticmethod
    def has_latency_objective(variant: ObjectiveVariant) -> bool:
        return "latency_s" in MINIMIZED_METRICS[variant]

    @property
    def metric_names(self) -> Tuple[str, ...]:
        return ("accuracy",) + MINIMIZED_METRICS[self.variant]

    @property
    def lead_metric(self) -> str:
        return LEAD_METRIC[self.variant]

    def objective_vector(self, m: Metrics) -> Tuple[float, ...]:
        """Minimization vector: accuracy negated, other objectives as-is"""
        return (-m.accuracy,) + tuple(getattr(m, name) for name in MINIMIZED_METRICS[self.variant])


class Provenance(BaseModel):
    model_config = ConfigDict(frozen=True)

    trial: int = Field(..., ge=0, description="Evaluation index within the run")
    seed: Optional[int] = None
    strategy: str = ""
    generation: int = 0


class Candidate(BaseModel):
    """One evaluated (model, hardware) design point"""

    model_config = ConfigDict(frozen=True)

    model: ModelConfig
    hw: HardwareConfig
    metrics: Optional[Metrics] = None
    feasible: bool
    violations: Tuple[str, ...] = ()
    violation: float = Field(0.0, ge=0, description="Summed constraint-violation magnitude")
    mode: Optional[ObjectiveVariant] = None
    provenance: Optional[Provenance] = None

    @property
    def fingerprint(self) -> str:
        return f"{self.model.fingerprint}#{self.hw.fingerprint}"

    def with_provenance(self, provenance: Provenance) -> "Candidate":
        return self.model_copy(update={"provenance": provenance})


class ParetoFront(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: ObjectiveMode
    members: Tuple[Candidate, ...] = ()
    ref_point: Optional[Tuple[float, ...]] = None

    def __len__(self) -> int:
        return len(self.members)


class RunRecord(BaseModel):
    """A search run: settings, append-only log and result"""

    schema_version: int = 1
    seed: Optional[int] = None
    mode: ObjectiveMode
    strategy: str
    budget: int = Field(..., ge=0)
    evaluations: int = Field(0, ge=0)
    candidates: List[Candidate] = Field(default_factory=list)
    front: ParetoFront
    ref_point: Optional[Tuple[float, ...]] = None
    hypervolume: float = 0.0
    oracle_hypervolume: Optional[float] = None
    hv_ratio: Optional[float] = None
    diagnostics: List[str] = Field(default_factory=list)

    def feasible_candidates(self) -> List[Candidate]:
        return [c for c in self.candidates if c.feasible]


__all__ = [
    "DEFAULT_LATENCY_CAP_S",
    "ObjectiveVariant",
    "MINIMIZED_METRICS",
    "LEAD_METRIC",
    "Metrics",
    "ObjectiveMode",
    "Provenance",
    "Candidate",
    "ParetoFront",
    "RunRecord",
]
