"""
Search strategies over the joint (model x hardware) space.

Both strategies share one genome: an index into the candidate list of every
prunable model dimension followed by every tunable hardware field. The
exhaustive strategy is the desk-scale oracle; NSGA-II is the seeded
evolutionary search used when the space is too large to enumerate.
"""

import logging
from concurrent.futures import Executor
from typing import Dict, List, Optional, Protocol, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from config import settings
from core.errors import SearchSpaceTooLargeError
from estimator.archspace import enumerate_space, hw_from_values, space_size
from estimator.models.hardware_models import ArchSpace, HardwareConfig
from estimator.models.workload_models import ModelConfig, PruneSpace
from estimator.workload import config_from_values, iter_model_configs
from optimizer.evaluation import EvaluationContext, evaluate_batch
from optimizer.models.search_models import Candidate, ObjectiveMode, Provenance, RunRecord
from optimizer.pareto import hypervolume, objective_matrix, pareto_front, reference_point

logger = logging.getLogger(__name__)

Genome = Tuple[int, ...]

BATCH_SIZE = 4096


class JointSpace(BaseModel):
    """Cartesian product of a prune space and a hardware space"""

    model_config = ConfigDict(frozen=True)

    prune: PruneSpace
    arch: ArchSpace

    def gene_lists(self) -> List[Tuple[int, ...]]:
        model_lists = [self.prune.candidates[enc][dim] for enc, dim in self.prune.genes()]
        return model_lists + list(self.arch.lists())

    def decode(self, genome: Genome) -> Tuple[ModelConfig, HardwareConfig]:
        lists = self.gene_lists()
        values = [lists[i][g] for i, g in enumerate(genome)]
        n_model = len(self.prune.genes())
        model = config_from_values(self.prune, values[:n_model])
        hw = hw_from_values(tuple(values[n_model:]))
        return model, hw

    def size(self) -> int:
        """Number of valid joint members (hardware filtered by range and budget)"""
        return self.prune.size() * space_size(self.arch)


def build_run_record(
    candidates: List[Candidate],
    mode: ObjectiveMode,
    strategy: str,
    seed: Optional[int],
    budget: int,
    evaluations: int,
    diagnostics: Optional[List[str]] = None,
) -> RunRecord:
    """Front, reference point and hypervolume of an evaluation log"""
    diagnostics = list(diagnostics or [])
    front = pareto_front(candidates, mode)
    ref = reference_point(candidates, mode)
    hv = hypervolume(front, ref, mode) if front.members and ref is not None else 0.0
    if not front.members:
        diagnostics.append(f"no feasible candidate among {len(candidates)} evaluated")
        logger.warning(f"{strategy}: empty feasible region after {evaluations} evaluations")
    front = front.model_copy(update={"ref_point": ref})
    return RunRecord(
        seed=seed, mode=mode, strategy=strategy, budget=budget, evaluations=evaluations,
        candidates=candidates, front=front, ref_point=ref, hypervolume=hv, diagnostics=diagnostics,
    )


class Strategy(Protocol):
    name: str

    def run(self, space: JointSpace, ctx: EvaluationContext,
            executor: Optional[Executor] = None) -> RunRecord:
        ...


class ExhaustiveSearch:
    """Evaluates every joint member; its front is the true front"""

    name = "exhaustive"

    def __init__(self, cap: Optional[int] = None, jobs: int = 1):
        self.cap = cap if cap is not None else settings.exhaustive_cap
        self.jobs = jobs

    def run(self, space: JointSpace, ctx: EvaluationContext,
            executor: Optional[Executor] = None) -> RunRecord:
        size = space.size()
        if size > self.cap:
            raise SearchSpaceTooLargeError(
                f"Joint space has {size} members, above the exhaustive cap of {self.cap}; "
                f"use the nsga2 strategy instead"
            )
        logger.info(f"Exhaustive search over {size} joint configurations")

        hw_list = list(enumerate_space(space.arch))
        candidates: List[Candidate] = []
        pending: List[Tuple[ModelConfig, HardwareConfig]] = []

        def _flush():
            for cand in evaluate_batch(pending, ctx, self.jobs, executor):
                trial = len(candidates)
                candidates.append(cand.with_provenance(Provenance(trial=trial, strategy=self.name)))
            pending.clear()

        for model in iter_model_configs(space.prune):
            for hw in hw_list:
                pending.append((model, hw))
                if len(pending) >= BATCH_SIZE:
                    _flush()
        _flush()

        return build_run_record(candidates, ctx.mode, self.name, None, size, len(candidates))


def fast_non_dominated_sort(points: np.ndarray) -> List[List[int]]:
    """Fronts of row indices, best first"""
    n = len(points)
    if n == 0:
        return []
    le = np.all(points[:, None, :] <= points[None, :, :], axis=2)
    lt = np.any(points[:, None, :] < points[None, :, :], axis=2)
    dom = le & lt  # dom[i, j]: i dominates j
    counts = dom.sum(axis=0)
    fronts: List[List[int]] = []
    current = [i for i in range(n) if counts[i] == 0]
    while current:
        fronts.append(current)
        nxt: List[int] = []
        for i in current:
            for j in np.flatnonzero(dom[i]):
                counts[j] -= 1
                if counts[j] == 0:
                    nxt.append(int(j))
        current = sorted(nxt)
    return fronts


def crowding_distance(points: np.ndarray) -> np.ndarray:
    n, d = points.shape
    distance = np.zeros(n)
    if n <= 2:
        distance[:] = np.inf
        return distance
    for k in range(d):
        order = np.argsort(points[:, k], kind="stable")
        lo, hi = points[order[0], k], points[order[-1], k]
        distance[order[0]] = distance[order[-1]] = np.inf
        if hi > lo:
            gaps = (points[order[2:], k] - points[order[:-2], k]) / (hi - lo)
            distance[order[1:-1]] += gaps
    return distance


class NSGA2Search:
    """
    Seeded NSGA-II with constraint domination.

    Feasible candidates always outrank infeasible ones; infeasible ones are
    ranked by violation magnitude. The budget counts generated individuals;
    repeated genomes reuse the cached evaluation and are logged once.
    """

    name = "nsga2"

    def __init__(self, budget: int, seed: int = 0, population: int = 32,
                 crossover_prob: float = 0.9, mutation_prob: Optional[float] = None,
                 jobs: int = 1):
        if budget < population:
            raise ValueError(f"budget {budget} must be at least the population size {population}")
        if population < 2:
            raise ValueError("population must be at least 2")
        self.budget = budget
        self.seed = seed
        self.population = population
        self.crossover_prob = crossover_prob
        self.mutation_prob = mutation_prob
        self.jobs = jobs

    def run(self, space: JointSpace, ctx: EvaluationContext,
            executor: Optional[Executor] = None) -> RunRecord:
        rng = np.random.default_rng(self.seed)
        sizes = np.array([len(values) for values in space.gene_lists()])
        pm = self.mutation_prob if self.mutation_prob is not None else 1.0 / len(sizes)
        generations = self.budget // self.population

        cache: Dict[Genome, Candidate] = {}
        log: List[Candidate] = []
        evaluations = 0

        def _evaluate(genomes: List[Genome], generation: int) -> List[Candidate]:
            nonlocal evaluations
            evaluations += len(genomes)
            fresh = [g for g in dict.fromkeys(genomes) if g not in cache]
            results = evaluate_batch([space.decode(g) for g in fresh], ctx, self.jobs, executor)
            for genome, cand in zip(fresh, results):
                cand = cand.with_provenance(Provenance(
                    trial=len(log), seed=self.seed, strategy=self.name, generation=generation,
                ))
                cache[genome] = cand
                log.append(cand)
            return [cache[g] for g in genomes]

        genomes = [tuple(int(v) for v in rng.integers(0, sizes)) for _ in range(self.population)]
        cands = _evaluate(genomes, 0)
        logger.info(f"NSGA-II seed={self.seed}: {generations} generations of {self.population}")

        for generation in range(1, generations):
            ranks, crowd = self._rank(cands, ctx.mode)
            offspring: List[Genome] = []
            while len(offspring) < self.population:
                a = self._tournament(rng, ranks, crowd)
                b = self._tournament(rng, ranks, crowd)
                for child in self._crossover(rng, genomes[a], genomes[b]):
                    offspring.append(self._mutate(rng, child, sizes, pm))
            offspring = offspring[: self.population]
            off_cands = _evaluate(offspring, generation)

            genomes, cands = self._survivors(genomes + offspring, cands + off_cands, ctx.mode)
            n_feasible = sum(1 for c in cands if c.feasible)
            logger.debug(
                f"Generation {generation}: {len(log)} unique evaluations, "
                f"{n_feasible}/{len(cands)} feasible survivors"
            )

        return build_run_record(log, ctx.mode, self.name, self.seed, self.budget, evaluations)

    def _rank(self, cands: Sequence[Candidate], mode: ObjectiveMode) -> Tuple[np.ndarray, np.ndarray]:
        n = len(cands)
        ranks = np.zeros(n, dtype=int)
        crowd = np.zeros(n)
        feasible = [i for i, c in enumerate(cands) if c.feasible]
        infeasible = [i for i, c in enumerate(cands) if not c.feasible]

        next_rank = 0
        if feasible:
            points = objective_matrix([cands[i] for i in feasible], mode)
            for front in fast_non_dominated_sort(points):
                idx = [feasible[i] for i in front]
                ranks[idx] = next_rank
                crowd[idx] = crowding_distance(points[front])
                next_rank += 1
        levels = sorted({cands[i].violation for i in infeasible})
        for i in infeasible:
            ranks[i] = next_rank + levels.index(cands[i].violation)
        return ranks, crowd

    def _tournament(self, rng: np.random.Generator, ranks: np.ndarray, crowd: np.ndarray) -> int:
        i, j = (int(v) for v in rng.integers(0, len(ranks), size=2))
        if ranks[i] != ranks[j]:
            return i if ranks[i] < ranks[j] else j
        if crowd[i] != crowd[j]:
            return i if crowd[i] > crowd[j] else j
        return i

    def _crossover(self, rng: np.random.Generator, a: Genome, b: Genome) -> List[Genome]:
        if rng.random() >= self.crossover_prob:
            return [a, b]
        mask = rng.random(len(a)) < 0.5
        child1 = tuple(int(y) if m else int(x) for x, y, m in zip(a, b, mask))
        child2 = tuple(int(x) if m else int(y) for x, y, m in zip(a, b, mask))
        return [child1, child2]

    def _mutate(self, rng: np.random.Generator, genome: Genome, sizes: np.ndarray, pm: float) -> Genome:
        genes = list(genome)
        for k, size in enumerate(sizes):
            if rng.random() < pm and size > 1:
                genes[k] = int((genes[k] + rng.integers(1, size)) % size)
        return tuple(genes)

    def _survivors(self, genomes: List[Genome], cands: List[Candidate],
                   mode: ObjectiveMode) -> Tuple[List[Genome], List[Candidate]]:
        # unique genomes first, duplicates only to fill the population
        seen = set()
        unique, dupes = [], []
        for i, g in enumerate(genomes):
            (dupes if g in seen else unique).append(i)
            seen.add(g)

        pool = unique if len(unique) >= self.population else unique + dupes
        ranks, crowd = self._rank([cands[i] for i in pool], mode)
        order = sorted(range(len(pool)), key=lambda k: (ranks[k], -crowd[k], genomes[pool[k]]))
        chosen = [pool[k] for k in order[: self.population]]
        return [genomes[i] for i in chosen], [cands[i] for i in chosen]


__all__ = [
    "Genome",
    "JointSpace",
    "Strategy",
    "build_run_record",
    "ExhaustiveSearch",
    "fast_non_dominated_sort",
    "crowding_distance",
    "NSGA2Search",
]
