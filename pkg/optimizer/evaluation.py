"""
Candidate evaluation: validate -> lower -> cost -> carbon -> accuracy.

evaluate_candidate never raises; every failure becomes an infeasibility
record on the returned Candidate so search strategies can rank it.
"""

import logging
from concurrent.futures import Executor, ProcessPoolExecutor
from typing import Any, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict

from core.errors import InfeasibleMappingError, ProxyLookupError
from estimator.archspace import peak_tops, validate_hw
from estimator.carbon import total_carbon
from estimator.models.carbon_models import CarbonFactors, DeploymentSchedule, GridIntensity
from estimator.models.hardware_models import HardwareConfig, Platform
from estimator.models.perf_models import CostCoefficients
from estimator.models.workload_models import ModelConfig, PruneSpace
from estimator.perf import graph_cost
from estimator.workload import lower_to_graph, validate_model_config
from optimizer.models.search_models import Candidate, Metrics, ObjectiveMode

logger = logging.getLogger(__name__)

# violation magnitudes for constraints without a natural scale
RANGE_PENALTY = 1.0
MAPPING_PENALTY = 10.0
ERROR_PENALTY = 100.0


class EvaluationContext(BaseModel):
    """Everything fixed across the candidates of one run"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    platform: Platform
    coeffs: CostCoefficients
    factors: CarbonFactors
    schedule: DeploymentSchedule
    grid: GridIntensity
    estimator: Any
    mode: ObjectiveMode
    prune_space: Optional[PruneSpace] = None

    def with_mode(self, mode: ObjectiveMode) -> "EvaluationContext":
        platform = self.platform.model_copy(update={"tops_budget": mode.tops_budget})
        return self.model_copy(update={"mode": mode, "platform": platform})


def _hw_violations(hw: HardwareConfig, p: Platform) -> Tuple[List[str], float]:
    reasons = validate_hw(hw, p)
    magnitude = 0.0
    for reason in reasons:
        if reason.startswith("TOPS"):
            magnitude += peak_tops(hw, p) / p.tops_budget - 1.0
        else:
            magnitude += RANGE_PENALTY
    return reasons, magnitude


def evaluate_candidate(model: ModelConfig, hw: HardwareConfig, ctx: EvaluationContext) -> Candidate:
    """
    Evaluate one design point.

    Infeasibility reasons start with a code: TOPS, RANGE, PRUNE_SPACE,
    MAPPING, PROXY, LATENCY_CAP or ERROR.
    """
    mode = ctx.mode
    try:
        violations, magnitude = _hw_violations(hw, ctx.platform)

        if ctx.prune_space is not None:
            for enc, dim, value in validate_model_config(model, ctx.prune_space):
                violations.append(f"PRUNE_SPACE {enc}.{dim}={value}")
                magnitude += RANGE_PENALTY

        graph = lower_to_graph(model)
        try:
            perf = graph_cost(graph, hw, ctx.platform, ctx.coeffs)
        except InfeasibleMappingError as e:
            violations.append(f"MAPPING {str(e)}")
            return Candidate(
                model=model, hw=hw, feasible=False, violations=tuple(violations),
                violation=magnitude + MAPPING_PENALTY, mode=mode.variant,
            )

        try:
            accuracy = ctx.estimator.estimate(model)
        except ProxyLookupError as e:
            violations.append(f"PROXY {str(e)}")
            return Candidate(
                model=model, hw=hw, feasible=False, violations=tuple(violations),
                violation=magnitude + MAPPING_PENALTY, mode=mode.variant,
            )

        carbon = total_carbon(perf, ctx.factors, ctx.schedule, ctx.grid, ctx.platform)

        cap = mode.latency_cap_s
        if cap is not None and perf.latency_s > cap:
            violations.append(f"LATENCY_CAP {perf.latency_s:.6g}s exceeds {cap:g}s")
            magnitude += perf.latency_s / cap - 1.0

        metrics = Metrics(
            accuracy=accuracy,
            latency_s=perf.latency_s,
            energy_j=perf.energy_j,
            carbon_kg=carbon.total_kg,
            embodied_kg=carbon.embodied_kg,
            operational_kg=carbon.operational_kg,
            area_mm2=perf.area_mm2,
            params=graph.total_params,
            peak_tops=peak_tops(hw, ctx.platform),
            utilization=perf.utilization,
        )
        candidate = Candidate(
            model=model, hw=hw, metrics=metrics, feasible=not violations,
            violations=tuple(violations), violation=magnitude, mode=mode.variant,
        )
        logger.debug(
            f"Evaluated {candidate.fingerprint}: feasible={candidate.feasible} "
            f"acc={accuracy:.4f} latency={perf.latency_s * 1e3:.3f}ms carbon={carbon.total_kg:.4f}kg"
        )
        return candidate

    except Exception as e:
        logger.error(f"Error evaluating {model.fingerprint} on {hw.fingerprint}: {str(e)}")
        return Candidate(
            model=model, hw=hw, feasible=False, violations=(f"ERROR {str(e)}",),
            violation=ERROR_PENALTY, mode=mode.variant,
        )


def _evaluate_pair(args: Tuple[ModelConfig, HardwareConfig, EvaluationContext]) -> Candidate:
    return evaluate_candidate(*args)


def evaluate_batch(
    pairs: Sequence[Tuple[ModelConfig, HardwareConfig]],
    ctx: EvaluationContext,
    jobs: int = 1,
    executor: Optional[Executor] = None,
) -> List[Candidate]:
    """
    Evaluate pairs, results in submission order regardless of jobs.

    A supplied executor is used and left open. Without one, jobs > 1 opens
    a process pool for this batch only.
    """
    if len(pairs) < 2 or (executor is None and jobs <= 1):
        return [evaluate_candidate(model, hw, ctx) for model, hw in pairs]

    args = [(model, hw, ctx) for model, hw in pairs]
    chunksize = max(1, len(pairs) // (max(jobs, 1) * 4))
    if executor is not None:
        return list(executor.map(_evaluate_pair, args, chunksize=chunksize))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_evaluate_pair, args, chunksize=chunksize))


__all__ = [
    "EvaluationContext",
    "evaluate_candidate",
    "evaluate_batch",
]
