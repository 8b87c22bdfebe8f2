"""
Report tables computed from run records.

Every table is a list of pydantic rows with a fixed column order, emitted
and parsed as CSV through pandas. Rows are recomputed from the candidate
log (and, for carbon breakdowns, from the cost and carbon models) on every
call; nothing is cached between reports.
"""

import logging
import os
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Type, TypeVar

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from core.data import RunConfig
from core.errors import ConfigError
from estimator.archspace import resolve_tops
from estimator.carbon import GridProvider, total_carbon
from estimator.models.carbon_models import CarbonReport
from estimator.models.hardware_models import HardwareConfig
from estimator.models.workload_models import ModelConfig
from estimator.perf import graph_cost
from estimator.workload import lower_to_graph
from optimizer.codesign_optimizer import CodesignOptimizer
from optimizer.evaluation import EvaluationContext
from optimizer.models.search_models import Candidate, ObjectiveMode, ParetoFront, RunRecord
from optimizer.pareto import REF_MARGIN, hypervolume, objective_matrix
from reporting.run_store import RunStore, write_table

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 0.01
SWEEP_AXES = ("tops", "region", "latency")
LATENCY_TIERS = (0.010, 0.050, 0.100)

Row = TypeVar("Row", bound=BaseModel)


# Row types

class IsoAccuracyRow(BaseModel):
    """Best design of one mode within the tolerance window around a target accuracy"""

    target: float
    tolerance: float = DEFAULT_TOLERANCE
    mode: str
    lead_metric: str
    source: Literal["front", "feasible"] = Field(
        "front", description="Candidate pool searched: front members, or every feasible evaluated design"
    )
    filled: bool = Field(..., description="False when no candidate of the pool lies within tolerance")
    fingerprint: Optional[str] = None
    hw: Optional[str] = Field(None, description="Hardware in TC,PEx,PEy,L2_KB,L2bw,GLB_MB notation")
    accuracy: Optional[float] = None
    latency_s: Optional[float] = None
    energy_j: Optional[float] = None
    carbon_kg: Optional[float] = None
    area_mm2: Optional[float] = None


class BreakdownRow(BaseModel):
    """Embodied / operational split of one design"""

    fingerprint: str
    label: Optional[str] = None
    embodied_kg: float = Field(..., ge=0)
    operational_kg: float = Field(..., ge=0)
    total_kg: float = Field(..., ge=0)
    operational_share: float = Field(..., ge=0, le=1)
    latency_s: float = Field(..., ge=0)
    energy_j: float = Field(..., ge=0)
    area_mm2: float = Field(..., ge=0)

    @classmethod
    def from_carbon(cls, fingerprint: str, carbon: CarbonReport, latency_s: float,
                    energy_j: float, area_mm2: float, label: Optional[str] = None) -> "BreakdownRow":
        return cls(
            fingerprint=fingerprint,
            label=label,
            embodied_kg=carbon.embodied_kg,
            operational_kg=carbon.operational_kg,
            total_kg=carbon.total_kg,
            operational_share=carbon.operational_share,
            latency_s=latency_s,
            energy_j=energy_j,
            area_mm2=area_mm2,
        )


class ExtremeRow(BaseModel):
    kind: str
    mode: str
    fingerprint: str
    hw: str
    accuracy: float
    latency_s: float
    energy_j: float
    carbon_kg: float
    area_mm2: float
    peak_tops: float


class SweepRow(BaseModel):
    """One sweep point: the axis value and the outcome of its run"""

    axis: str
    value: str
    tops_budget: float
    region: str
    grid_g_per_kwh: float
    latency_cap_s: Optional[float] = None
    evaluations: int
    feasible: int
    front_size: int
    hypervolume: float
    max_accuracy: Optional[float] = None
    min_carbon_kg: Optional[float] = None
    min_carbon_latency_s: Optional[float] = None
    min_carbon_fingerprint: Optional[str] = None
    min_latency_s: Optional[float] = None
    min_latency_carbon_kg: Optional[float] = None
    max_front_peak_tops: Optional[float] = None


class ConsistencyRow(BaseModel):
    """Hypervolume statistics of one mode over seeds, on normalized objectives"""

    mode: str
    runs: int
    seeds: str
    mean_hv: float
    std_hv: float
    cv: float


# CSV emission

def rows_frame(rows: Sequence[BaseModel], row_type: Type[Row]) -> pd.DataFrame:
    columns = list(row_type.model_fields)
    return pd.DataFrame([r.model_dump() for r in rows], columns=columns)


def emit_rows(rows: Sequence[BaseModel], row_type: Type[Row], path: str) -> None:
    write_table(rows_frame(rows, row_type), path)


def _string_columns(row_type: Type[Row]) -> List[str]:
    return [
        name for name, field in row_type.model_fields.items()
        if field.annotation in (str, Optional[str])
    ]


def parse_rows(path: str, row_type: Type[Row]) -> List[Row]:
    """Rows of a CSV written by emit_rows; empty cells become None"""
    try:
        df = pd.read_csv(
            path, float_precision="round_trip",
            dtype={name: str for name in _string_columns(row_type)},
        )
    except (OSError, pd.errors.ParserError) as e:
        raise ConfigError(f"Cannot read report {path}: {str(e)}") from e
    df = df.astype(object).where(pd.notna(df), None)
    return [row_type.model_validate(record) for record in df.to_dict(orient="records")]


def pareto_scatter_frame(front: ParetoFront) -> pd.DataFrame:
    """Plot-ready front: accuracy against carbon, latency as third column"""
    rows = [
        {
            "accuracy": c.metrics.accuracy,
            "carbon_kg": c.metrics.carbon_kg,
            "latency_s": c.metrics.latency_s,
            "energy_j": c.metrics.energy_j,
            "fingerprint": c.fingerprint,
        }
        for c in front.members
    ]
    return pd.DataFrame(rows, columns=["accuracy", "carbon_kg", "latency_s", "energy_j", "fingerprint"])


# Iso-accuracy

def _best_within(members: Sequence[Candidate], target: float, tol: float,
                 lead: str) -> Optional[Candidate]:
    window = [c for c in members if abs(c.metrics.accuracy - target) <= tol]
    if not window:
        return None
    return min(window, key=lambda c: (getattr(c.metrics, lead), -c.metrics.accuracy, c.fingerprint))


def iso_accuracy(runs: Sequence[RunRecord], targets: Sequence[float],
                 tol: float = DEFAULT_TOLERANCE, front_only: bool = True) -> List[IsoAccuracyRow]:
    """
    Per target and run, the design within tolerance that minimizes the run
    mode's lead objective. Rows are ordered by target, then by run.

    The pool is the run's front by default; front_only=False searches every
    feasible evaluated candidate. The pool is recorded in each row's source.
    """
    source = "front" if front_only else "feasible"
    rows: List[IsoAccuracyRow] = []
    for target in targets:
        for run in runs:
            lead = run.mode.lead_metric
            pool = run.front.members if front_only else run.feasible_candidates()
            best = _best_within(pool, target, tol, lead)
            row = IsoAccuracyRow(
                target=target, tolerance=tol, mode=run.mode.variant.value,
                lead_metric=lead, source=source, filled=best is not None,
            )
            if best is not None:
                m = best.metrics
                row = row.model_copy(update={
                    "fingerprint": best.fingerprint,
                    "hw": best.hw.notation(),
                    "accuracy": m.accuracy,
                    "latency_s": m.latency_s,
                    "energy_j": m.energy_j,
                    "carbon_kg": m.carbon_kg,
                    "area_mm2": m.area_mm2,
                })
            else:
                logger.warning(
                    f"No {run.mode.variant.value} {source} candidate within {tol} of accuracy {target}"
                )
            rows.append(row)
    return rows


# Carbon breakdown

def breakdown_row(model: ModelConfig, hw: HardwareConfig, ctx: EvaluationContext) -> BreakdownRow:
    """Recompute the carbon split of one design from the cost and carbon models"""
    perf = graph_cost(lower_to_graph(model), hw, ctx.platform, ctx.coeffs)
    carbon = total_carbon(perf, ctx.factors, ctx.schedule, ctx.grid, ctx.platform)
    return BreakdownRow.from_carbon(
        f"{model.fingerprint}#{hw.fingerprint}", carbon,
        perf.latency_s, perf.energy_j, perf.area_mm2, label=model.name,
    )


def _by_total(rows: List[BreakdownRow]) -> List[BreakdownRow]:
    return sorted(rows, key=lambda r: (r.total_kg, r.fingerprint))


def breakdown(run: RunRecord, ctx: EvaluationContext, front_only: bool = True) -> List[BreakdownRow]:
    """Carbon split of the front (or every feasible candidate), sorted by total carbon"""
    cands = run.front.members if front_only else run.feasible_candidates()
    return _by_total([breakdown_row(c.model, c.hw, ctx) for c in cands])


def breakdown_models(models: Sequence[ModelConfig], hw: HardwareConfig,
                     ctx: EvaluationContext) -> List[BreakdownRow]:
    """Carbon split of a model ladder on fixed hardware"""
    return _by_total([breakdown_row(model, hw, ctx) for model in models])


# Extremes

def min_carbon(cands: Sequence[Candidate]) -> Optional[Candidate]:
    feasible = [c for c in cands if c.feasible and c.metrics is not None]
    if not feasible:
        return None
    return min(feasible, key=lambda c: (c.metrics.carbon_kg, c.metrics.latency_s, c.fingerprint))


def min_latency(cands: Sequence[Candidate]) -> Optional[Candidate]:
    feasible = [c for c in cands if c.feasible and c.metrics is not None]
    if not feasible:
        return None
    return min(feasible, key=lambda c: (c.metrics.latency_s, c.metrics.carbon_kg, c.fingerprint))


def _extreme_row(kind: str, c: Candidate, mode: ObjectiveMode) -> ExtremeRow:
    m = c.metrics
    return ExtremeRow(
        kind=kind, mode=mode.variant.value, fingerprint=c.fingerprint, hw=c.hw.notation(),
        accuracy=m.accuracy, latency_s=m.latency_s, energy_j=m.energy_j,
        carbon_kg=m.carbon_kg, area_mm2=m.area_mm2, peak_tops=m.peak_tops,
    )


def extremes(run: RunRecord) -> List[ExtremeRow]:
    """Minimum-carbon and minimum-latency feasible designs of a run"""
    rows = []
    for kind, pick in (("min_carbon", min_carbon), ("min_latency", min_latency)):
        c = pick(run.candidates)
        if c is not None:
            rows.append(_extreme_row(kind, c, run.mode))
    return rows


# Hypervolume consistency

def normalized_hypervolumes(runs: Sequence[RunRecord]) -> List[float]:
    """
    Hypervolume of each run with objectives normalized to [0, 1].

    Bounds are the min/max over the feasible candidates of all given runs;
    the reference point sits REF_MARGIN beyond the upper bound.
    """
    if not runs:
        return []
    mode = runs[0].mode
    if any(r.mode.variant != mode.variant for r in runs):
        raise ConfigError("Normalized hypervolumes need runs of a single mode")
    feasible = [c for r in runs for c in r.feasible_candidates()]
    if not feasible:
        return [0.0 for _ in runs]

    points = objective_matrix(feasible, mode)
    lower = points.min(axis=0)
    upper = points.max(axis=0)
    span = np.where(upper > lower, upper - lower, 1.0)
    ref = upper + REF_MARGIN * span
    return [hypervolume(r.front, ref, r.mode, bounds=(lower, upper)) for r in runs]


def hv_consistency(runs: Sequence[RunRecord]) -> List[ConsistencyRow]:
    """Mean, standard deviation and CV of normalized HV per mode"""
    groups: Dict[str, List[RunRecord]] = {}
    for run in runs:
        groups.setdefault(run.mode.variant.value, []).append(run)

    rows = []
    for mode in sorted(groups):
        group = groups[mode]
        values = np.array(normalized_hypervolumes(group))
        mean = float(values.mean())
        std = float(values.std(ddof=1)) if len(values) > 1 else 0.0
        rows.append(ConsistencyRow(
            mode=mode,
            runs=len(group),
            seeds=";".join(str(r.seed) for r in group),
            mean_hv=mean,
            std_hv=std,
            cv=std / mean if mean > 0 else 0.0,
        ))
        logger.info(f"HV consistency {mode}: mean={mean:.4f} std={std:.4f} over {len(group)} runs")
    return rows


# Sweeps

def _axis_label(axis: str, value: str) -> str:
    return f"{axis}-{value}".replace("/", "_")


def sweep_configs(axis: str, values: Sequence[str], config: RunConfig) -> List[Tuple[str, RunConfig]]:
    """One RunConfig per axis value; everything else, including the seed, is shared"""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"Unknown sweep axis '{axis}'. Available axes: {', '.join(SWEEP_AXES)}")
    if not values:
        raise ConfigError(f"Sweep over '{axis}' needs at least one value")

    points = []
    for value in values:
        value = str(value).strip()
        if axis == "tops":
            budget = resolve_tops(value)
            point = config.model_copy(update={"arch": config.arch.with_platform(tops_budget=budget)})
        elif axis == "region":
            carbon = config.carbon.model_copy(update={"region": value, "grid_override": None})
            point = config.model_copy(update={"carbon": carbon})
        else:
            if ObjectiveMode.has_latency_objective(config.search.mode):
                raise ConfigError(
                    f"Latency tiers apply to capped modes, not '{config.search.mode.value}'"
                )
            search = config.search.model_copy(update={"latency_cap_s": float(value)})
            point = config.model_copy(update={"search": search})
        points.append((value, point))
    return points


def sweep_row(axis: str, value: str, record: RunRecord, ctx: EvaluationContext) -> SweepRow:
    lo_carbon = min_carbon(record.front.members)
    lo_latency = min_latency(record.front.members)
    members = record.front.members
    return SweepRow(
        axis=axis,
        value=value,
        tops_budget=record.mode.tops_budget,
        region=ctx.grid.region,
        grid_g_per_kwh=ctx.grid.g_per_kwh,
        latency_cap_s=record.mode.latency_cap_s,
        evaluations=record.evaluations,
        feasible=len(record.feasible_candidates()),
        front_size=len(members),
        hypervolume=record.hypervolume,
        max_accuracy=max((c.metrics.accuracy for c in members), default=None),
        min_carbon_kg=lo_carbon.metrics.carbon_kg if lo_carbon else None,
        min_carbon_latency_s=lo_carbon.metrics.latency_s if lo_carbon else None,
        min_carbon_fingerprint=lo_carbon.fingerprint if lo_carbon else None,
        min_latency_s=lo_latency.metrics.latency_s if lo_latency else None,
        min_latency_carbon_kg=lo_latency.metrics.carbon_kg if lo_latency else None,
        max_front_peak_tops=max((c.metrics.peak_tops for c in members), default=None),
    )


class SweepResult(BaseModel):
    axis: str
    records: Dict[str, RunRecord]
    rows: List[SweepRow]

    def fronts_frame(self) -> pd.DataFrame:
        """Front members of every point, keyed by the axis value"""
        frames = []
        for row in self.rows:
            frame = pareto_scatter_frame(self.records[row.value].front)
            frame.insert(0, "value", row.value)
            frame.insert(0, "axis", self.axis)
            frames.append(frame)
        columns = ["axis", "value", "accuracy", "carbon_kg", "latency_s", "energy_j", "fingerprint"]
        if not frames:
            return pd.DataFrame(columns=columns)
        return pd.concat(frames, ignore_index=True)[columns]


def sweep(axis: str, values: Sequence[str], config: RunConfig,
          provider: Optional[GridProvider] = None, out_dir: Optional[str] = None,
          force: bool = False) -> SweepResult:
    """
    Run the same search once per axis value.

    With out_dir, each point is persisted as its own run directory under
    out_dir and the comparison tables go to out_dir/reports/.
    """
    records: Dict[str, RunRecord] = {}
    rows: List[SweepRow] = []
    for value, point in sweep_configs(axis, values, config):
        optimizer = CodesignOptimizer(point, provider)
        store = None
        if out_dir:
            store = RunStore(os.path.join(out_dir, _axis_label(axis, value)), force=force).prepare()
        record = optimizer.run(store)
        records[value] = record
        rows.append(sweep_row(axis, value, record, optimizer.context))
        logger.info(f"Sweep {axis}={value}: front of {len(record.front)}, HV={record.hypervolume:.6g}")

    result = SweepResult(axis=axis, records=records, rows=rows)
    if out_dir:
        reports = os.path.join(out_dir, "reports")
        emit_rows(rows, SweepRow, os.path.join(reports, f"sweep_{axis}.csv"))
        write_table(result.fronts_frame(), os.path.join(reports, f"sweep_{axis}_fronts.csv"))
    return result


__all__ = [
    "DEFAULT_TOLERANCE",
    "SWEEP_AXES",
    "LATENCY_TIERS",
    "IsoAccuracyRow",
    "BreakdownRow",
    "ExtremeRow",
    "SweepRow",
    "ConsistencyRow",
    "rows_frame",
    "emit_rows",
    "parse_rows",
    "pareto_scatter_frame",
    "iso_accuracy",
    "breakdown_row",
    "breakdown",
    "breakdown_models",
    "min_carbon",
    "min_latency",
    "extremes",
    "normalized_hypervolumes",
    "hv_consistency",
    "sweep_configs",
    "sweep_row",
    "SweepResult",
    "sweep",
]
