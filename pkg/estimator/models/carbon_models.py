"""
Pydantic models for lifecycle carbon accounting.

Embodied carbon follows a per-area fab model (fab energy at the fab's grid
intensity, fab gases and materials, scaled by yield) plus fixed DRAM and
packaging terms. Operational carbon is per-inference energy times lifetime
inferences times the deployment grid intensity.
"""

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field


class CarbonFactors(BaseModel):
    """Embodied-carbon factors, loaded from data/carbon_factors.json by default"""

    model_config = ConfigDict(frozen=True)

    schema_version: int = 1
    ci_fab: float = Field(560.0, ge=0, description="Fab grid intensity in gCO2/kWh")
    epa: float = Field(1.0, ge=0, description="Fab energy per area in kWh/cm^2")
    gpa: float = Field(150.0, ge=0, description="Fab gas emissions per area in g/cm^2")
    mpa: float = Field(500.0, ge=0, description="Raw material emissions per area in g/cm^2")
    yield_frac: float = Field(0.875, gt=0, le=1, description="Die yield")
    dram_cps: float = Field(150.0, ge=0, description="DRAM embodied carbon in g per GB")
    packaging_g: float = Field(150.0, ge=0, description="Packaging carbon per chip in g")


class DeploymentSchedule(BaseModel):
    """Deployment schedule; defaults give 23,652,000 lifetime inferences"""

    model_config = ConfigDict(frozen=True)

    lifetime_years: float = Field(3.0, gt=0)
    active_hours_per_day: float = Field(6.0, gt=0, le=24)
    inferences_per_second: float = Field(1.0, gt=0)


class GridIntensity(BaseModel):
    """Carbon intensity of electricity in one region"""

    model_config = ConfigDict(frozen=True)

    region: str
    g_per_kwh: float = Field(..., gt=0)
    source: Literal["static", "override", "network"] = "static"


class CarbonReport(BaseModel):
    """Lifecycle carbon of one design, in kg CO2e"""

    model_config = ConfigDict(frozen=True)

    embodied_kg: float = Field(..., ge=0)
    operational_kg: float = Field(..., ge=0)
    total_kg: float = Field(..., ge=0)
    lifetime_inferences: int = Field(..., ge=0)
    grid_region: str = ""
    grid_g_per_kwh: float = Field(0.0, ge=0)

    @property
    def embodied_share(self) -> float:
        return self.embodied_kg / self.total_kg if self.total_kg > 0 else 0.0

    @property
    def operational_share(self) -> float:
        return self.operational_kg / self.total_kg if self.total_kg > 0 else 0.0


__all__ = ["CarbonFactors", "DeploymentSchedule", "GridIntensity", "CarbonReport"]
