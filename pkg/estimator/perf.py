"""
Analytical latency / energy / area model of the accelerator template.

GEMMs run output-stationary on the systolic arrays: the M x N output is
tiled into pe_x x pe_y blocks distributed over the cores, and each block
streams K through the array. When the operand panels of a block do not fit
the local buffer, K is processed in chunks and the partial sums are spilled
and refilled between chunks. Every operator is then bounded by a roofline
over compute, GLB, DRAM and L2 bandwidth. Operators run sequentially.
"""

import json
import logging
import math
from typing import Dict, List, Optional

import pandas as pd
from pydantic import ValidationError

from config import data_path
from core.errors import ConfigError, InfeasibleMappingError
from estimator.models.hardware_models import HardwareConfig, Platform
from estimator.models.perf_models import CostCoefficients, OpCost, PerfReport
from estimator.models.workload_models import Operator, OperatorGraph

logger = logging.getLogger(__name__)

SUPPORTED_COEFF_SCHEMAS = (1,)

# tie-break order of the roofline terms
BOUND_ORDER = ("compute", "glb", "dram", "l2")

OP_DUMP_COLUMNS = [
    "op", "encoder", "kind", "M", "K", "N", "elements", "repeat", "cycles",
    "compute_cycles", "bound", "energy_pj", "dram_bytes", "glb_bytes", "l2_bytes",
]


def k_chunks(K: int, hw: HardwareConfig) -> int:
    """
    Smallest chunk count whose per-tile working set fits the local buffer.

    The working set of one tile is the A panel (pe_x x Kc), the B panel
    (Kc x pe_y) and the pe_x x pe_y output block.
    """
    out_block = hw.pe_x * hw.pe_y
    panel_width = hw.pe_x + hw.pe_y
    if out_block + panel_width > hw.l2_bytes:
        raise InfeasibleMappingError(
            f"L2 of {hw.l2_bytes} B cannot hold one K-slice of a {hw.pe_x}x{hw.pe_y} tile "
            f"({out_block + panel_width} B needed)"
        )
    kc_max = (hw.l2_bytes - out_block) // panel_width
    return math.ceil(K / min(K, kc_max))


def gemm_cost(op: Operator, hw: HardwareConfig, p: Platform, c: CostCoefficients) -> OpCost:
    """
    Cost of a GEMM operator.

    Args:
        op: GEMM with shape (M, K, N) and a repeat count.
        hw: Hardware configuration.
        p: Platform (GLB bandwidth, clock).
        c: Cost coefficients (energies, DRAM bandwidth).

    Returns:
        OpCost with roofline cycles, bound label, dynamic energy and traffic.

    Raises:
        InfeasibleMappingError: the local buffer cannot hold a single K-slice.
    """
    M, K, N, repeat = op.M, op.K, op.N, op.repeat
    wb = p.word_bytes
    tiles_m = math.ceil(M / hw.pe_x)
    tiles = tiles_m * math.ceil(N / hw.pe_y)

    try:
        ch = k_chunks(K, hw)
    except InfeasibleMappingError as e:
        raise InfeasibleMappingError(f"{op.name}: {e}", operator=op.name) from e

    out_block = hw.pe_x * hw.pe_y
    refill = math.ceil(out_block / hw.l2_bw)
    k_eff = K + (ch - 1) * refill
    per_tile = k_eff + hw.pe_x + hw.pe_y - 2
    compute = math.ceil(tiles / hw.tc) * per_tile * repeat

    dram = (M * K + K * N + M * N) * wb * repeat
    glb = (M * K + K * N * tiles_m + M * N) * wb * repeat
    per_tile_l2 = (
        hw.pe_x * K + K * hw.pe_y + out_block      # operand reads and output write
        + 2 * out_block * (ch - 1)                 # partial-sum spill and refill
    ) * wb
    l2 = tiles * per_tile_l2 * repeat

    terms = {
        "compute": compute,
        "glb": math.ceil(glb / p.glb_bw),
        "dram": math.ceil(dram / c.dram_bw),
        "l2": math.ceil(l2 / (hw.tc * hw.l2_bw)),
    }
    bound = max(BOUND_ORDER, key=lambda name: (terms[name], -BOUND_ORDER.index(name)))
    macs = M * K * N * repeat
    energy_pj = macs * c.e_mac + dram * c.e_dram + glb * c.e_glb + l2 * c.e_l2

    return OpCost(
        name=op.name,
        encoder=op.encoder,
        kind=op.kind,
        cycles=terms[bound],
        compute_cycles=compute,
        bound=bound,
        dyn_energy_j=energy_pj * 1e-12,
        macs=macs,
        traffic={"dram": dram, "glb": glb, "l2": l2},
    )


def vector_cost(op: Operator, hw: HardwareConfig, p: Platform, c: CostCoefficients) -> OpCost:
    """Element-wise op on the vector units of all cores"""
    if op.kind not in c.cpe:
        raise ConfigError(f"No cycles-per-element coefficient for vector kind '{op.kind}'")
    cpe = c.cpe[op.kind]
    cycles = math.ceil(op.elements * cpe / (hw.tc * hw.v_pe)) * op.repeat
    energy_pj = op.elements * cpe * c.vector_energy * op.repeat
    glb = 2 * op.elements * p.word_bytes * op.repeat

    return OpCost(
        name=op.name,
        encoder=op.encoder,
        kind=op.kind,
        cycles=cycles,
        compute_cycles=cycles,
        bound="compute",
        dyn_energy_j=energy_pj * 1e-12,
        traffic={"dram": 0, "glb": glb, "l2": 0},
    )


def operator_cost(op: Operator, hw: HardwareConfig, p: Platform, c: CostCoefficients) -> OpCost:
    if op.is_gemm:
        return gemm_cost(op, hw, p, c)
    return vector_cost(op, hw, p, c)


def area(hw: HardwareConfig, c: CostCoefficients) -> float:
    """Die area in mm^2"""
    core = hw.pe_x * hw.pe_y * c.a_pe + hw.l2_bytes * c.a_sram + hw.v_pe * c.a_vec
    return hw.tc * core + hw.glb_bytes * c.a_sram + c.a_fixed


def graph_cost(g: OperatorGraph, hw: HardwareConfig, p: Platform, c: CostCoefficients) -> PerfReport:
    """
    Sequential execution of every operator of the graph.

    Static energy is p_static (mW/mm^2) x area x latency.

    Raises:
        InfeasibleMappingError: some GEMM cannot be mapped on this hardware.
    """
    op_costs = [operator_cost(op, hw, p, c) for op in g.operators]
    cycles = sum(oc.cycles for oc in op_costs)
    latency = cycles / p.freq_hz
    die_area = area(hw, c)
    dynamic = sum(oc.dyn_energy_j for oc in op_costs)
    static = c.p_static * 1e-3 * die_area * latency
    total_macs = sum(oc.macs for oc in op_costs)

    peak_macs = cycles * hw.tc * hw.pe_x * hw.pe_y
    utilization = min(1.0, total_macs / peak_macs) if peak_macs > 0 else 0.0

    return PerfReport(
        latency_s=latency,
        cycles=cycles,
        energy_j=dynamic + static,
        dynamic_energy_j=dynamic,
        static_energy_j=static,
        area_mm2=die_area,
        utilization=utilization,
        total_macs=total_macs,
        op_costs=tuple(op_costs),
    )


def op_cost_frame(g: OperatorGraph, report: PerfReport) -> pd.DataFrame:
    """Per-operator costs as a table with OP_DUMP_COLUMNS"""
    rows = []
    for op, oc in zip(g.operators, report.op_costs):
        rows.append({
            "op": op.name,
            "encoder": op.encoder,
            "kind": op.kind,
            "M": op.M,
            "K": op.K,
            "N": op.N,
            "elements": op.elements,
            "repeat": op.repeat,
            "cycles": oc.cycles,
            "compute_cycles": oc.compute_cycles,
            "bound": oc.bound,
            "energy_pj": oc.dyn_energy_j * 1e12,
            "dram_bytes": oc.traffic.get("dram", 0),
            "glb_bytes": oc.traffic.get("glb", 0),
            "l2_bytes": oc.traffic.get("l2", 0),
        })
    return pd.DataFrame(rows, columns=OP_DUMP_COLUMNS)


def dump_op_costs(g: OperatorGraph, report: PerfReport, path: str) -> None:
    op_cost_frame(g, report).to_csv(path, index=False)
    logger.info(f"Wrote {len(report.op_costs)} operator costs to {path}")


def load_coefficients(path: Optional[str] = None) -> CostCoefficients:
    """Cost coefficients from a versioned JSON file (shipped defaults when path is None)"""
    path = path or data_path("cost_coefficients.json")
    try:
        with open(path) as f:
            payload: Dict = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from e
    except OSError as e:
        raise ConfigError(f"Cannot read coefficient file {path}: {e}") from e

    version = payload.get("schema_version")
    if version not in SUPPORTED_COEFF_SCHEMAS:
        raise ConfigError(f"{path}: unsupported schema_version {version}")
    fields = {k: v for k, v in payload.items() if not k.startswith("_")}
    try:
        coeffs = CostCoefficients.model_validate(fields)
    except ValidationError as e:
        raise ConfigError(f"{path}: {e}") from e
    logger.info(f"Loaded cost coefficients from {path}")
    return coeffs


__all__ = [
    "BOUND_ORDER",
    "OP_DUMP_COLUMNS",
    "k_chunks",
    "gemm_cost",
    "vector_cost",
    "operator_cost",
    "area",
    "graph_cost",
    "op_cost_frame",
    "dump_op_costs",
    "load_coefficients",
]
