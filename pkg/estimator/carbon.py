"""
Carbon module: embodied, operational and total carbon of a design, and the
grid-intensity providers behind region lookups.

Units: area in mm^2 (converted to cm^2 for the fab model), energy in J,
grid intensity in gCO2/kWh, results in kg CO2e.
"""

import json
import logging
import math
from typing import Dict, Optional, Protocol

import httpx
from pydantic import ValidationError

from config import data_path, settings
from core.errors import CodesignError, ConfigError, UnknownRegionError
from estimator.models.carbon_models import (
    CarbonFactors,
    CarbonReport,
    DeploymentSchedule,
    GridIntensity,
)
from estimator.models.hardware_models import GIB, Platform
from estimator.models.perf_models import PerfReport

logger = logging.getLogger(__name__)

SUPPORTED_CARBON_SCHEMAS = (1,)
J_PER_KWH = 3.6e6

DEFAULT_FAB_REGION = "TW"
DEFAULT_OPERATION_REGION = "CA-US"


def lifetime_inferences(s: DeploymentSchedule) -> int:
    """years x 365 x hours/day x 3600 x rate, rounded down"""
    return int(math.floor(
        s.lifetime_years * 365 * s.active_hours_per_day * 3600 * s.inferences_per_second
    ))


def embodied_carbon(area_mm2: float, p: Platform, f: CarbonFactors) -> float:
    """Die, DRAM and packaging carbon in kg"""
    area_cm2 = area_mm2 / 100.0
    die_g = area_cm2 * (f.ci_fab * f.epa + f.gpa + f.mpa) / f.yield_frac
    dram_g = (p.dram_bytes / GIB) * f.dram_cps
    return (die_g + dram_g + f.packaging_g) / 1000.0


def operational_carbon(energy_per_inf_j: float, s: DeploymentSchedule, g: GridIntensity) -> float:
    """Lifetime electricity carbon in kg"""
    kwh = energy_per_inf_j * lifetime_inferences(s) / J_PER_KWH
    return kwh * g.g_per_kwh / 1000.0


def total_carbon(
    perf: PerfReport,
    f: CarbonFactors,
    s: DeploymentSchedule,
    g: GridIntensity,
    p: Platform,
) -> CarbonReport:
    embodied = embodied_carbon(perf.area_mm2, p, f)
    operational = operational_carbon(perf.energy_j, s, g)
    return CarbonReport(
        embodied_kg=embodied,
        operational_kg=operational,
        total_kg=embodied + operational,
        lifetime_inferences=lifetime_inferences(s),
        grid_region=g.region,
        grid_g_per_kwh=g.g_per_kwh,
    )


class GridProvider(Protocol):
    """Source of regional grid intensities"""

    def intensity(self, region: str) -> GridIntensity:
        ...

    def regions(self) -> Dict[str, float]:
        ...


class StaticGridProvider:
    """Yearly-average intensities from the bundled JSON dataset"""

    def __init__(self, path: Optional[str] = None):
        self.path = path or data_path("grid_intensity.json")
        self.table: Dict[str, float] = {}
        self.load_grid_data()

    def load_grid_data(self):
        """Load the region table into memory"""
        try:
            with open(self.path) as f:
                payload = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{self.path}: line {e.lineno} column {e.colno}: {e.msg}") from e
        except OSError as e:
            raise ConfigError(f"Cannot read grid file {self.path}: {e}") from e

        version = payload.get("schema_version")
        if version not in SUPPORTED_CARBON_SCHEMAS:
            raise ConfigError(f"{self.path}: unsupported schema_version {version}")
        regions = payload.get("regions", {})
        bad = [code for code, value in regions.items() if not value or value <= 0]
        if bad:
            raise ConfigError(f"{self.path}: non-positive intensity for {', '.join(bad)}")
        self.table = {code.upper(): float(value) for code, value in regions.items()}
        logger.info(f"Loaded {len(self.table)} grid regions from {self.path}")

    def regions(self) -> Dict[str, float]:
        return dict(self.table)

    def intensity(self, region: str) -> GridIntensity:
        code = region.strip().upper()
        if code not in self.table:
            raise UnknownRegionError(region, self.table)
        return GridIntensity(region=code, g_per_kwh=self.table[code], source="static")


class HttpGridProvider:
    """
    Live intensities from an HTTP service.

    Request: GET {url}?zone=<region> with a bearer token.
    Response: JSON object with a 'carbonIntensity' field in gCO2/kWh.
    Results are cached per region for the lifetime of the provider.
    """

    def __init__(self, url: str, token: str, timeout_s: float = 10.0,
                 client: Optional[httpx.Client] = None):
        self.url = url
        self.timeout_s = timeout_s
        self.client = client or httpx.Client(timeout=timeout_s)
        self.headers = {"Authorization": f"Bearer {token}"}
        self._cache: Dict[str, float] = {}

    def regions(self) -> Dict[str, float]:
        return dict(self._cache)

    def intensity(self, region: str) -> GridIntensity:
        code = region.strip().upper()
        if code not in self._cache:
            try:
                response = self.client.get(self.url, params={"zone": code}, headers=self.headers)
            except httpx.HTTPError as e:
                raise CodesignError(f"Grid service request for {code} failed: {str(e)}") from e

            if response.status_code == 404:
                raise UnknownRegionError(region, self._cache)
            if response.status_code != 200:
                raise CodesignError(
                    f"Grid service returned {response.status_code} for {code}"
                )
            value = response.json().get("carbonIntensity")
            if value is None or float(value) <= 0:
                raise CodesignError(f"Grid service returned no usable intensity for {code}")
            self._cache[code] = float(value)
            logger.info(f"Fetched grid intensity for {code}: {value} g/kWh")
        return GridIntensity(region=code, g_per_kwh=self._cache[code], source="network")


def default_grid_provider(path: Optional[str] = None, use_network: bool = False) -> GridProvider:
    """Static provider unless a network service is configured and requested"""
    if use_network:
        if not (settings.grid_api_url and settings.grid_api_token):
            raise ConfigError(
                "Network grid provider requested but CODESIGN_GRID_API_URL / "
                "CODESIGN_GRID_API_TOKEN are not set"
            )
        return HttpGridProvider(
            settings.grid_api_url, settings.grid_api_token, settings.grid_timeout_s
        )
    return StaticGridProvider(path)


def grid_intensity(region: str, provider: GridProvider,
                   override: Optional[float] = None) -> GridIntensity:
    """
    Grid intensity of a region.

    An override (g/kWh) bypasses the provider and is tagged source='override'.
    """
    if override is not None:
        if override <= 0:
            raise ConfigError(f"Grid override must be positive, got {override}")
        return GridIntensity(region=region.strip().upper(), g_per_kwh=float(override), source="override")
    return provider.intensity(region)


def load_carbon_factors(path: Optional[str] = None) -> CarbonFactors:
    path = path or data_path("carbon_factors.json")
    try:
        with open(path) as f:
            payload = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from e
    except OSError as e:
        raise ConfigError(f"Cannot read carbon factor file {path}: {e}") from e

    if payload.get("schema_version") not in SUPPORTED_CARBON_SCHEMAS:
        raise ConfigError(f"{path}: unsupported schema_version {payload.get('schema_version')}")
    fields = {k: v for k, v in payload.items() if not k.startswith("_")}
    try:
        return CarbonFactors.model_validate(fields)
    except ValidationError as e:
        raise ConfigError(f"{path}: {e}") from e


def factors_for_fab(f: CarbonFactors, fab: GridIntensity) -> CarbonFactors:
    """Factors with the fab grid intensity taken from a region lookup"""
    return f.model_copy(update={"ci_fab": fab.g_per_kwh})


__all__ = [
    "J_PER_KWH",
    "DEFAULT_FAB_REGION",
    "DEFAULT_OPERATION_REGION",
    "lifetime_inferences",
    "embodied_carbon",
    "operational_carbon",
    "total_carbon",
    "GridProvider",
    "StaticGridProvider",
    "HttpGridProvider",
    "default_grid_provider",
    "grid_intensity",
    "load_carbon_factors",
    "factors_for_fab",
]
