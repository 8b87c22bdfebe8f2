"""
Hardware design space: peak throughput, range checks and enumeration.
"""

import itertools
import logging
from typing import Dict, Iterator, List, Optional, Tuple

from estimator.models.hardware_models import (
    HW_FIELDS,
    KIB,
    ArchSpace,
    HardwareConfig,
    Platform,
)

logger = logging.getLogger(__name__)

# Selectable peak-throughput budgets (TOPS)
TOPS_PRESETS: Dict[str, float] = {"20": 20.0, "4": 4.0, "1": 1.0}

# Local-buffer candidate lists: sizes used by searched designs, and the
# wider range of the published design-space table
L2_PRESETS: Dict[str, Tuple[int, ...]] = {
    "searched": tuple(k * KIB for k in (64, 128, 256, 512, 1024)),
    "table": tuple(k * KIB for k in (256, 512, 1024, 2048, 4096)),
}


def peak_tops(hw: HardwareConfig, p: Platform) -> float:
    """Two ops per MAC on every PE of every core"""
    return hw.tc * hw.pe_x * hw.pe_y * 2 * p.freq_hz / 1e12


def _is_pow2(value: int) -> bool:
    return value >= 1 and (value & (value - 1)) == 0


def validate_hw(hw: HardwareConfig, p: Platform) -> List[str]:
    """
    Range and budget checks.

    Returns a list of violation strings, each naming the offending field and
    bound; empty means valid. TOPS violations start with 'TOPS'.
    """
    b = p.bounds
    violations: List[str] = []

    if hw.tc not in b.tc_choices:
        violations.append(f"RANGE tc={hw.tc} not in {list(b.tc_choices)}")
    for field in ("pe_x", "pe_y"):
        value = getattr(hw, field)
        if not (_is_pow2(value) and value <= b.pe_max):
            violations.append(f"RANGE {field}={value} not a power of two in [1, {b.pe_max}]")
    if not (_is_pow2(hw.glb_bytes) and b.glb_min_bytes <= hw.glb_bytes <= b.glb_max_bytes):
        violations.append(
            f"RANGE glb_bytes={hw.glb_bytes} not a power of two in "
            f"[{b.glb_min_bytes}, {b.glb_max_bytes}]"
        )
    if not (_is_pow2(hw.l2_bytes) and b.l2_min_bytes <= hw.l2_bytes <= b.l2_max_bytes):
        violations.append(
            f"RANGE l2_bytes={hw.l2_bytes} not a power of two in "
            f"[{b.l2_min_bytes}, {b.l2_max_bytes}]"
        )
    if not (_is_pow2(hw.l2_bw) and hw.l2_bw <= b.l2_bw_max):
        violations.append(f"RANGE l2_bw={hw.l2_bw} not a power of two in [1, {b.l2_bw_max}]")

    tops = peak_tops(hw, p)
    if tops > p.tops_budget:
        violations.append(f"TOPS {tops:g} exceeds budget {p.tops_budget:g}")
    return violations


def hw_from_values(values: Tuple[int, ...]) -> HardwareConfig:
    return HardwareConfig(**dict(zip(HW_FIELDS, values)))


def enumerate_space(
    space: ArchSpace, start: int = 0, stop: Optional[int] = None
) -> Iterator[HardwareConfig]:
    """
    Valid members of the cartesian product, lexicographic over field lists.

    start/stop select a slice of the raw cartesian index range, so workers
    can consume disjoint chunks of the same space.
    """
    product = itertools.product(*space.lists())
    for values in itertools.islice(product, start, stop):
        hw = hw_from_values(values)
        if not validate_hw(hw, space.platform):
            yield hw


def space_size(space: ArchSpace) -> int:
    """Number of valid members"""
    return sum(1 for _ in enumerate_space(space))


def resolve_tops(flag: str, custom: Optional[float] = None) -> float:
    """TOPS budget for a --tops flag value: a preset name, 'custom', or a number"""
    if flag in TOPS_PRESETS:
        return TOPS_PRESETS[flag]
    if flag == "custom":
        if custom is None or custom <= 0:
            raise ValueError("--tops custom needs a positive --tops-value")
        return float(custom)
    value = float(flag)
    if value <= 0:
        raise ValueError(f"TOPS budget must be positive, got {flag}")
    return value


__all__ = [
    "TOPS_PRESETS",
    "L2_PRESETS",
    "peak_tops",
    "validate_hw",
    "hw_from_values",
    "enumerate_space",
    "space_size",
    "resolve_tops",
]
