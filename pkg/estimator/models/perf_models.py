"""
Pydantic models for the analytical cost model.
"""

from typing import Dict, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

Bound = Literal["compute", "glb", "dram", "l2"]


class CostCoefficients(BaseModel):
    """Technology coefficients, loaded from data/cost_coefficients.json by default"""

    model_config = ConfigDict(frozen=True)

    schema_version: int = 1
    # energy, pJ per MAC / per byte moved
    e_mac: float = Field(0.02, ge=0)
    e_l2: float = Field(0.05, ge=0)
    e_glb: float = Field(0.25, ge=0)
    e_dram: float = Field(2.0, ge=0)
    e_vec: Optional[float] = Field(None, ge=0, description="pJ per vector lane-cycle; defaults to e_mac")
    # cycles per element on one vector lane
    cpe: Dict[str, float] = Field(
        default_factory=lambda: {"softmax": 4.0, "layernorm": 3.0, "gelu": 2.0, "residual_add": 1.0}
    )
    dram_bw: float = Field(64.0, gt=0, description="DRAM bandwidth in bytes/cycle")
    # area, mm^2
    a_pe: float = Field(0.0006, ge=0, description="mm^2 per MAC PE")
    a_sram: float = Field(1.5e-6, ge=0, description="mm^2 per SRAM byte")
    a_vec: float = Field(0.002, ge=0, description="mm^2 per vector lane")
    a_fixed: float = Field(2.0, ge=0, description="mm^2 of fixed logic (control, NoC, I/O)")
    p_static: float = Field(0.5, ge=0, description="Static power density in mW/mm^2")

    @model_validator(mode="after")
    def _check_energy_ordering(self) -> "CostCoefficients":
        if not (self.e_dram > self.e_glb > self.e_l2 > 0):
            raise ValueError(
                f"per-byte energies must satisfy e_dram > e_glb > e_l2 > 0, "
                f"got {self.e_dram}, {self.e_glb}, {self.e_l2}"
            )
        if self.e_mac <= 0:
            raise ValueError("e_mac must be positive")
        return self

    @property
    def vector_energy(self) -> float:
        return self.e_mac if self.e_vec is None else self.e_vec


class OpCost(BaseModel):
    """Cost of one operator (all repeats included)"""

    model_config = ConfigDict(frozen=True)

    name: str
    encoder: str = ""
    kind: str
    cycles: int = Field(..., ge=0)
    compute_cycles: int = Field(..., ge=0)
    bound: Bound
    dyn_energy_j: float = Field(..., ge=0)
    macs: int = Field(0, ge=0)
    traffic: Dict[str, int] = Field(
        default_factory=dict, description="Bytes moved per memory level: dram, glb, l2"
    )


class PerfReport(BaseModel):
    """Per-inference cost of a graph on one hardware config"""

    model_config = ConfigDict(frozen=True)

    latency_s: float = Field(..., ge=0)
    cycles: int = Field(..., ge=0)
    energy_j: float = Field(..., ge=0)
    dynamic_energy_j: float = Field(..., ge=0)
    static_energy_j: float = Field(..., ge=0)
    area_mm2: float = Field(..., ge=0)
    utilization: float = Field(..., ge=0, le=1)
    total_macs: int = Field(0, ge=0)
    op_costs: Tuple[OpCost, ...] = ()

    def bound_counts(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for op in self.op_costs:
            counts[op.bound] = counts.get(op.bound, 0) + 1
        return counts


__all__ = ["Bound", "CostCoefficients", "OpCost", "PerfReport"]
