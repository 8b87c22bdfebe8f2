"""
Co-design run orchestration.

CodesignOptimizer turns a RunConfig into everything a search needs: the
base model and its prune space, the hardware space, the cost and carbon
inputs, the accuracy estimator and the objective mode. It then runs the
configured strategy, persists the run and, when an exhaustive run of the
same space is supplied, scores the result against that oracle.
"""

import logging
import time
from concurrent.futures import Executor, ProcessPoolExecutor
from contextlib import nullcontext
from typing import ContextManager, Optional

from pydantic import ValidationError

from core.data import RunConfig, SearchSection
from core.errors import ConfigError
from estimator.carbon import (
    GridProvider,
    default_grid_provider,
    factors_for_fab,
    grid_intensity,
    load_carbon_factors,
)
from estimator.models.hardware_models import ArchSpace
from estimator.models.workload_models import ModelConfig, PruneSpace
from estimator.perf import load_coefficients
from estimator.proxy import build_estimator
from estimator.workload import build_prune_space, load_model_preset, singleton_space
from optimizer.evaluation import EvaluationContext
from optimizer.models.search_models import ObjectiveMode, RunRecord
from optimizer.pareto import hypervolume
from optimizer.strategies import ExhaustiveSearch, JointSpace, NSGA2Search, Strategy

logger = logging.getLogger(__name__)


def resolve_base_model(config: RunConfig) -> ModelConfig:
    """Explicit base model of the run, else the named preset"""
    section = config.model
    if section.base is not None:
        return section.base
    if not section.preset:
        raise ConfigError("model: either 'base' or 'preset' must be given")
    return load_model_preset(section.preset)


def build_objective_mode(search: SearchSection, tops_budget: float) -> ObjectiveMode:
    """ObjectiveMode of a search section; a cap given to a latency mode is dropped with a warning"""
    cap = search.latency_cap_s
    if cap is not None and ObjectiveMode.has_latency_objective(search.mode):
        logger.warning(
            f"Mode '{search.mode.value}' optimizes latency; ignoring latency_cap_s={cap}"
        )
        cap = None
    try:
        return ObjectiveMode(variant=search.mode, latency_cap_s=cap, tops_budget=tops_budget)
    except ValidationError as e:
        raise ConfigError(f"search: {e}") from e


class CodesignOptimizer:
    """Builds the evaluation context of one RunConfig and runs its search"""

    def __init__(self, config: RunConfig, provider: Optional[GridProvider] = None):
        self.config = config
        self.provider = provider or default_grid_provider(
            config.files.grid_path, config.carbon.use_network_grid
        )
        self.base_model = resolve_base_model(config)
        self.prune_space = self._build_prune_space()
        self.arch: ArchSpace = config.arch
        self.mode = build_objective_mode(config.search, self.arch.platform.tops_budget)
        self.context = self._build_context()

        logger.info(
            f"Prepared run: base={self.base_model.name or self.base_model.fingerprint} "
            f"mode={self.mode.variant.value} tops={self.mode.tops_budget:g} "
            f"grid={self.context.grid.region}@{self.context.grid.g_per_kwh:g}g/kWh "
            f"prune_space={self.prune_space.size()}"
        )

    def _build_prune_space(self) -> PruneSpace:
        if self.config.model.fixed:
            return singleton_space(self.base_model)
        return build_prune_space(self.base_model, self.config.model.steps)

    def _build_context(self) -> EvaluationContext:
        files = self.config.files
        carbon = self.config.carbon

        factors = load_carbon_factors(files.factors_path)
        if carbon.fab_region:
            factors = factors_for_fab(factors, self.provider.intensity(carbon.fab_region))
        grid = grid_intensity(carbon.region, self.provider, carbon.grid_override)

        return EvaluationContext(
            platform=self.arch.platform,
            coeffs=load_coefficients(files.coeffs_path),
            factors=factors,
            schedule=carbon.schedule,
            grid=grid,
            estimator=build_estimator(self.config.proxy, self.base_model),
            mode=self.mode,
            prune_space=self.prune_space,
        )

    def joint_space(self) -> JointSpace:
        return JointSpace(prune=self.prune_space, arch=self.arch)

    def strategy(self) -> Strategy:
        search = self.config.search
        if search.strategy == "exhaustive":
            return ExhaustiveSearch(jobs=self.config.jobs)
        return NSGA2Search(
            budget=search.budget,
            seed=search.seed,
            population=search.population,
            crossover_prob=search.crossover_prob,
            mutation_prob=search.mutation_prob,
            jobs=self.config.jobs,
        )

    def _executor(self) -> ContextManager[Optional[Executor]]:
        """One worker pool for the whole run when jobs > 1"""
        if self.config.jobs <= 1:
            return nullcontext()
        logger.debug(f"Starting {self.config.jobs} evaluation workers")
        return ProcessPoolExecutor(max_workers=self.config.jobs)

    def run(self, store=None, oracle: Optional[RunRecord] = None) -> RunRecord:
        """
        Run the configured search.

        Args:
            store: Optional RunStore; the config snapshot is written before
                the search starts and the run after it ends.
            oracle: Exhaustive run of the same space, for the HV ratio.

        Returns:
            RunRecord with the candidate log, front and hypervolume.
        """
        if store is not None:
            store.write_config(self.config)

        start_time = time.time()
        strategy = self.strategy()
        with self._executor() as executor:
            record = strategy.run(self.joint_space(), self.context, executor)
        elapsed = time.time() - start_time

        if oracle is not None:
            record = compare_to_oracle(record, oracle)

        logger.info(
            f"{strategy.name} finished in {elapsed:.2f}s: {record.evaluations} evaluations, "
            f"{len(record.feasible_candidates())} feasible, front of {len(record.front)}, "
            f"HV={record.hypervolume:.6g}"
        )
        if store is not None:
            store.save_run(record)
        return record


def compare_to_oracle(record: RunRecord, oracle: RunRecord) -> RunRecord:
    """
    HV ratio of a run against the exhaustive front of the same space.

    Both fronts are measured from one reference point, the component-wise
    worst of the two runs' reference points.
    """
    if oracle.mode.variant != record.mode.variant:
        raise ConfigError(
            f"Oracle run used mode '{oracle.mode.variant.value}', "
            f"this run uses '{record.mode.variant.value}'"
        )
    refs = [r for r in (record.ref_point, oracle.ref_point) if r is not None]
    if not refs:
        return record.model_copy(update={"oracle_hypervolume": 0.0, "hv_ratio": None})

    shared = tuple(max(values) for values in zip(*refs))
    run_hv = hypervolume(record.front, shared, record.mode)
    oracle_hv = hypervolume(oracle.front, shared, oracle.mode)
    ratio = run_hv / oracle_hv if oracle_hv > 0 else None
    if ratio is not None:
        logger.info(f"HV ratio against oracle: {ratio:.4f}")
    return record.model_copy(update={"oracle_hypervolume": oracle_hv, "hv_ratio": ratio})


__all__ = [
    "resolve_base_model",
    "build_objective_mode",
    "CodesignOptimizer",
    "compare_to_oracle",
]
