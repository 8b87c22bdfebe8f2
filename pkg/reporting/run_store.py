"""
Run-directory persistence.

Layout of a run directory:

    config.json        RunConfig snapshot, written before the search starts
    candidates.jsonl   append-only candidate log, one JSON object per line
    pareto.csv         front members with metrics, hardware and model fields
    run.json           run summary (seed, mode, budget, reference point, HV)
    reports/*.csv      report tables

All tables are written and read with pandas; floats use round-trip
precision so a table read back equals the table written.
"""

import json
import logging
import os
from typing import Iterable, List, Optional, Tuple

import pandas as pd
from pydantic import BaseModel, Field

from core.data import RunConfig, parse_run_config
from core.errors import ConfigError, OutputDirError
from estimator.models.hardware_models import HW_FIELDS
from estimator.models.workload_models import PRUNE_DIMENSIONS
from optimizer.models.search_models import Candidate, ObjectiveMode, ParetoFront, RunRecord
from optimizer.pareto import pareto_front

logger = logging.getLogger(__name__)

RUN_SCHEMA_VERSION = 1

CONFIG_FILE = "config.json"
CANDIDATES_FILE = "candidates.jsonl"
PARETO_FILE = "pareto.csv"
RUN_FILE = "run.json"
REPORTS_DIR = "reports"

METRIC_COLUMNS = [
    "accuracy", "latency_s", "energy_j", "carbon_kg", "embodied_kg",
    "operational_kg", "area_mm2", "params", "peak_tops",
]


class RunSummary(BaseModel):
    """Contents of run.json"""

    schema_version: int = RUN_SCHEMA_VERSION
    seed: Optional[int] = None
    mode: ObjectiveMode
    strategy: str
    budget: int
    evaluations: int
    candidates: int = Field(0, description="Unique candidates in the log")
    feasible: int = 0
    front_size: int = 0
    ref_point: Optional[Tuple[float, ...]] = None
    hypervolume: float = 0.0
    oracle_hypervolume: Optional[float] = None
    hv_ratio: Optional[float] = None
    diagnostics: List[str] = Field(default_factory=list)

    @classmethod
    def from_record(cls, record: RunRecord) -> "RunSummary":
        return cls(
            seed=record.seed,
            mode=record.mode,
            strategy=record.strategy,
            budget=record.budget,
            evaluations=record.evaluations,
            candidates=len(record.candidates),
            feasible=len(record.feasible_candidates()),
            front_size=len(record.front),
            ref_point=record.ref_point,
            hypervolume=record.hypervolume,
            oracle_hypervolume=record.oracle_hypervolume,
            hv_ratio=record.hv_ratio,
            diagnostics=record.diagnostics,
        )


def write_table(df: pd.DataFrame, path: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    df.to_csv(path, index=False)


def read_table(path: str) -> pd.DataFrame:
    """CSV table with exact float round-trip"""
    try:
        return pd.read_csv(path, float_precision="round_trip")
    except (OSError, pd.errors.ParserError) as e:
        raise ConfigError(f"Cannot read table {path}: {str(e)}") from e


def front_frame(front: ParetoFront) -> pd.DataFrame:
    """pareto.csv table: one row per member, in front order"""
    encoders = sorted({enc for c in front.members for enc in c.model.encoders})
    model_columns = [f"{enc}_{dim}" for enc in encoders for dim in PRUNE_DIMENSIONS]
    columns = ["fingerprint"] + METRIC_COLUMNS + list(HW_FIELDS) + model_columns

    rows = []
    for c in front.members:
        row = {"fingerprint": c.fingerprint}
        row.update({name: getattr(c.metrics, name) for name in METRIC_COLUMNS})
        row.update({name: getattr(c.hw, name) for name in HW_FIELDS})
        for enc in encoders:
            dims = c.model.encoders[enc].dims()
            row.update({f"{enc}_{dim}": dims[dim] for dim in PRUNE_DIMENSIONS})
        rows.append(row)
    return pd.DataFrame(rows, columns=columns)


class RunStore:
    """Reads and writes one run directory"""

    def __init__(self, out_dir: str, force: bool = False):
        self.out_dir = out_dir
        self.force = force

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def prepare(self) -> "RunStore":
        """
        Create the directory.

        Raises:
            OutputDirError: the directory exists, is not empty, and force is off.
        """
        if os.path.isdir(self.out_dir) and os.listdir(self.out_dir):
            if not self.force:
                raise OutputDirError(
                    f"Output directory {self.out_dir} is not empty; pass --force to overwrite"
                )
            # the candidate log is append-only, start it over
            log_path = self.path(CANDIDATES_FILE)
            if os.path.exists(log_path):
                os.remove(log_path)
            logger.warning(f"Overwriting run files in {self.out_dir}")
        os.makedirs(self.out_dir, exist_ok=True)
        return self

    def write_config(self, config: RunConfig) -> None:
        with open(self.path(CONFIG_FILE), "w") as f:
            f.write(config.model_dump_json(indent=2))
        logger.info(f"Wrote config snapshot to {self.path(CONFIG_FILE)}")

    def append_candidates(self, candidates: Iterable[Candidate]) -> int:
        count = 0
        with open(self.path(CANDIDATES_FILE), "a") as f:
            for c in candidates:
                f.write(c.model_dump_json() + "\n")
                count += 1
        return count

    def write_front(self, front: ParetoFront) -> None:
        write_table(front_frame(front), self.path(PARETO_FILE))

    def write_summary(self, summary: RunSummary) -> None:
        with open(self.path(RUN_FILE), "w") as f:
            f.write(summary.model_dump_json(indent=2))

    def save_run(self, record: RunRecord) -> None:
        count = self.append_candidates(record.candidates)
        self.write_front(record.front)
        self.write_summary(RunSummary.from_record(record))
        logger.info(f"Saved run with {count} candidates and a front of {len(record.front)} to {self.out_dir}")

    def write_report(self, name: str, df: pd.DataFrame) -> str:
        path = os.path.join(self.out_dir, REPORTS_DIR, f"{name}.csv")
        write_table(df, path)
        logger.info(f"Wrote report {path} ({len(df)} rows)")
        return path

    def load_config(self) -> RunConfig:
        path = self.path(CONFIG_FILE)
        try:
            with open(path) as f:
                return parse_run_config(f.read(), path)
        except OSError as e:
            raise ConfigError(f"Cannot read config snapshot {path}: {e}") from e

    def load_candidates(self) -> List[Candidate]:
        path = self.path(CANDIDATES_FILE)
        candidates: List[Candidate] = []
        try:
            with open(path) as f:
                for line in f:
                    if line.strip():
                        candidates.append(Candidate.model_validate_json(line))
        except OSError as e:
            raise ConfigError(f"Cannot read candidate log {path}: {e}") from e
        return candidates

    def load_summary(self) -> RunSummary:
        path = self.path(RUN_FILE)
        try:
            with open(path) as f:
                payload = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Cannot read run summary {path}: {e}") from e
        if payload.get("schema_version") != RUN_SCHEMA_VERSION:
            raise ConfigError(f"{path}: unsupported schema_version {payload.get('schema_version')}")
        return RunSummary.model_validate(payload)

    def load_run(self) -> RunRecord:
        """Rebuild the RunRecord by replaying the candidate log"""
        summary = self.load_summary()
        candidates = self.load_candidates()
        front = pareto_front(candidates, summary.mode).model_copy(
            update={"ref_point": summary.ref_point}
        )
        return RunRecord(
            schema_version=summary.schema_version,
            seed=summary.seed,
            mode=summary.mode,
            strategy=summary.strategy,
            budget=summary.budget,
            evaluations=summary.evaluations,
            candidates=candidates,
            front=front,
            ref_point=summary.ref_point,
            hypervolume=summary.hypervolume,
            oracle_hypervolume=summary.oracle_hypervolume,
            hv_ratio=summary.hv_ratio,
            diagnostics=summary.diagnostics,
        )


def load_run(run_dir: str) -> RunRecord:
    return RunStore(run_dir).load_run()


__all__ = [
    "RUN_SCHEMA_VERSION",
    "CONFIG_FILE",
    "CANDIDATES_FILE",
    "PARETO_FILE",
    "RUN_FILE",
    "REPORTS_DIR",
    "METRIC_COLUMNS",
    "RunSummary",
    "write_table",
    "read_table",
    "front_frame",
    "RunStore",
    "load_run",
]
