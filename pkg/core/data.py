"""
Run configuration and command envelope.

This module contains the Pydantic models that describe one run of the
co-design engine (what to search, on which hardware space, under which
carbon assumptions) and the response envelope every CLI command returns.
"""

import json
import logging
from typing import Any, Dict, Literal, Optional, Union

from pydantic import BaseModel, Field, ValidationError

from core.errors import ConfigError
from estimator.models.carbon_models import DeploymentSchedule
from estimator.models.hardware_models import ArchSpace
from estimator.models.proxy_models import ProxySettings
from estimator.models.workload_models import ModelConfig, PruneSteps
from optimizer.models.search_models import ObjectiveVariant

logger = logging.getLogger(__name__)

SUPPORTED_RUN_SCHEMAS = (1,)


class ModelSection(BaseModel):
    """Base model and how it may be pruned"""

    preset: Optional[str] = Field(
        "clip-b-16",
        description="Name from data/model_presets.json; ignored when base is given"
    )
    base: Optional[ModelConfig] = Field(
        None,
        description="Explicit base model"
    )
    steps: Union[PruneSteps, Dict[str, PruneSteps]] = Field(
        default_factory=PruneSteps,
        description="Prune steps for all encoders, or per encoder name"
    )
    fixed: bool = Field(
        False,
        description="Search hardware only, keeping the base model unpruned"
    )


class FilesSection(BaseModel):
    """Data files; None selects the shipped defaults under data/"""

    coeffs_path: Optional[str] = None
    factors_path: Optional[str] = None
    grid_path: Optional[str] = None


class CarbonSection(BaseModel):
    """Deployment and fabrication assumptions"""

    region: str = Field("CA-US", description="Operation grid region")
    fab_region: Optional[str] = Field(
        None,
        description="Fab grid region; None keeps ci_fab from the factor file"
    )
    grid_override: Optional[float] = Field(
        None, gt=0,
        description="Operation grid intensity in g/kWh, bypassing the provider"
    )
    use_network_grid: bool = Field(
        False,
        description="Query the configured grid service instead of the bundled dataset"
    )
    schedule: DeploymentSchedule = Field(default_factory=DeploymentSchedule)


class SearchSection(BaseModel):
    mode: ObjectiveVariant = ObjectiveVariant.ACC_CARBON
    latency_cap_s: Optional[float] = Field(
        None, gt=0,
        description="Latency constraint of capped modes; defaults to 50 ms"
    )
    strategy: Literal["nsga2", "exhaustive"] = "nsga2"
    seed: int = 0
    budget: int = Field(512, ge=1)
    population: int = Field(32, ge=2)
    crossover_prob: float = Field(0.9, ge=0, le=1)
    mutation_prob: Optional[float] = Field(None, ge=0, le=1)


class RunConfig(BaseModel):
    """
    Complete description of one run.

    A snapshot of this model is written to config.json of every run
    directory; (snapshot, seed) determine every output.
    """
    schema_version: int = 1
    model: ModelSection = Field(default_factory=ModelSection)
    arch: ArchSpace = Field(default_factory=ArchSpace)
    files: FilesSection = Field(default_factory=FilesSection)
    carbon: CarbonSection = Field(default_factory=CarbonSection)
    proxy: ProxySettings = Field(default_factory=ProxySettings)
    search: SearchSection = Field(default_factory=SearchSection)
    out_dir: Optional[str] = None
    jobs: int = Field(1, ge=1)


def _format_validation_error(e: ValidationError) -> str:
    lines = []
    for err in e.errors():
        loc = ".".join(str(part) for part in err["loc"]) or "<root>"
        lines.append(f"{loc}: {err['msg']}")
    return "; ".join(lines)


def parse_run_config(text: str, source: str = "<config>") -> RunConfig:
    """Parse RunConfig JSON with line/column and field-path diagnostics"""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{source}: line {e.lineno} column {e.colno}: {e.msg}") from e
    if not isinstance(payload, dict):
        raise ConfigError(f"{source}: top level must be a JSON object")
    version = payload.get("schema_version", 1)
    if version not in SUPPORTED_RUN_SCHEMAS:
        raise ConfigError(f"{source}: unsupported schema_version {version}")
    try:
        return RunConfig.model_validate(payload)
    except ValidationError as e:
        raise ConfigError(f"{source}: {_format_validation_error(e)}") from e


def load_run_config(path: Optional[str]) -> RunConfig:
    """RunConfig from a JSON file, or the defaults when path is None"""
    if not path:
        return RunConfig()
    try:
        with open(path) as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}") from e
    config = parse_run_config(text, path)
    logger.info(f"Loaded run config from {path}")
    return config


# Response Models

class CommandResponse(BaseModel):
    """
    Standardized result of every CLI command.

    Printed as JSON on standard output; exit_code follows the contract
    0 ok / 1 usage or configuration error / 2 infeasible.
    """
    success: bool = Field(
        ...,
        description="Whether the command produced its result"
    )
    data: Optional[Dict[str, Any]] = Field(
        None,
        description="Command-specific result data"
    )
    error: Optional[str] = Field(
        None,
        description="Error message if success is False"
    )
    meta: Optional[Dict[str, Any]] = Field(
        None,
        description="Additional metadata (e.g., execution_time_ms, run_dir)"
    )
    exit_code: int = Field(
        0,
        description="Process exit code"
    )


# Export all models for easy importing
__all__ = [
    "ModelSection",
    "FilesSection",
    "CarbonSection",
    "SearchSection",
    "RunConfig",
    "parse_run_config",
    "load_run_config",
    "CommandResponse",
]
