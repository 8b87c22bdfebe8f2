"""
Pydantic models for the edge accelerator template.

The template is a multi-core systolic-array accelerator: every core has a
pe_x x pe_y output-stationary MAC array, a vector unit of pe_x lanes and a
private local buffer (L2); all cores share a global buffer (GLB) backed by
DRAM. Sizes are bytes, bandwidths are words (bytes at 8 bit) per cycle.
"""

from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field, computed_field

KIB = 1024
MIB = 1024 * 1024
GIB = 1024 * 1024 * 1024

HW_FIELDS: Tuple[str, ...] = ("tc", "pe_x", "pe_y", "glb_bytes", "l2_bytes", "l2_bw")


class HardwareConfig(BaseModel):
    """One accelerator instance; range checks live in archspace.validate_hw"""

    model_config = ConfigDict(frozen=True)

    tc: int = Field(..., ge=1, description="Number of cores")
    pe_x: int = Field(..., ge=1, description="Systolic array rows")
    pe_y: int = Field(..., ge=1, description="Systolic array columns")
    glb_bytes: int = Field(..., ge=1, description="Global buffer size")
    l2_bytes: int = Field(..., ge=1, description="Per-core local buffer size")
    l2_bw: int = Field(..., ge=1, description="Per-core local buffer bandwidth (words/cycle)")

    @computed_field
    @property
    def v_pe(self) -> int:
        """Vector lanes per core, tied to the array row count"""
        return self.pe_x

    @property
    def fingerprint(self) -> str:
        return (
            f"tc{self.tc}-pe{self.pe_x}x{self.pe_y}-l2_{self.l2_bytes}"
            f"-bw{self.l2_bw}-glb{self.glb_bytes}"
        )

    @classmethod
    def from_notation(cls, text: str) -> "HardwareConfig":
        """
        Parse the compact notation 'TC,PEx,PEy,L2_KB,L2bw,GLB_MB'.

        Example: '1,256,8,64,128,2' is one core, a 256x8 array, 64 KB of L2
        at 128 words/cycle and a 2 MB GLB.
        """
        parts = [p.strip() for p in text.strip().strip("{}").split(",")]
        if len(parts) != 6:
            raise ValueError(f"Expected 6 comma-separated fields, got {len(parts)}: '{text}'")
        tc, pe_x, pe_y, l2_kb, l2_bw, glb_mb = (int(p) for p in parts)
        return cls(
            tc=tc, pe_x=pe_x, pe_y=pe_y,
            l2_bytes=l2_kb * KIB, l2_bw=l2_bw, glb_bytes=glb_mb * MIB,
        )

    def notation(self) -> str:
        return (
            f"{self.tc},{self.pe_x},{self.pe_y},{self.l2_bytes // KIB},"
            f"{self.l2_bw},{self.glb_bytes // MIB}"
        )


class HardwareBounds(BaseModel):
    """Accepted ranges of the tunable hardware parameters"""

    model_config = ConfigDict(frozen=True)

    tc_choices: Tuple[int, ...] = (1, 2, 4)
    pe_max: int = 256
    glb_min_bytes: int = 1 * MIB
    glb_max_bytes: int = 8 * MIB
    l2_min_bytes: int = 64 * KIB
    l2_max_bytes: int = 4 * MIB
    l2_bw_max: int = 256


class Platform(BaseModel):
    """Parameters fixed for every design point"""

    model_config = ConfigDict(frozen=True)

    glb_bw: int = Field(256, ge=1, description="GLB bandwidth (words/cycle)")
    dram_bytes: int = Field(1 * GIB, ge=1, description="Attached DRAM capacity")
    tech_nm: int = Field(22, ge=1, description="Process node")
    bitwidth: int = Field(8, ge=1, description="Datapath width in bits")
    tops_budget: float = Field(20.0, gt=0, description="Peak-throughput cap in TOPS")
    freq_hz: float = Field(500e6, gt=0, description="Clock frequency")
    bounds: HardwareBounds = Field(default_factory=HardwareBounds)

    @property
    def word_bytes(self) -> int:
        return max(1, self.bitwidth // 8)


def _pow2_range(lo: int, hi: int) -> Tuple[int, ...]:
    values = []
    v = lo
    while v <= hi:
        values.append(v)
        v *= 2
    return tuple(values)


class ArchSpace(BaseModel):
    """Candidate lists per tunable hardware field, enumerated in field order"""

    model_config = ConfigDict(frozen=True)

    platform: Platform = Field(default_factory=Platform)
    tc: Tuple[int, ...] = (1, 2, 4)
    pe_x: Tuple[int, ...] = _pow2_range(1, 256)
    pe_y: Tuple[int, ...] = _pow2_range(1, 256)
    glb_bytes: Tuple[int, ...] = tuple(m * MIB for m in (1, 2, 4, 8))
    l2_bytes: Tuple[int, ...] = tuple(k * KIB for k in (64, 128, 256, 512, 1024))
    l2_bw: Tuple[int, ...] = _pow2_range(1, 256)

    def lists(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(getattr(self, f) for f in HW_FIELDS)

    def raw_size(self) -> int:
        total = 1
        for values in self.lists():
            total *= len(values)
        return total

    def with_platform(self, **changes) -> "ArchSpace":
        return self.model_copy(update={"platform": self.platform.model_copy(update=changes)})


__all__ = [
    "KIB",
    "MIB",
    "GIB",
    "HW_FIELDS",
    "HardwareConfig",
    "HardwareBounds",
    "Platform",
    "ArchSpace",
]
