"""
Pytest configuration and fixtures for the co-design engine tests
"""
from typing import Callable, Dict, Optional

import pytest

from config import data_path
from core.data import RunConfig, load_run_config
from estimator.carbon import StaticGridProvider, grid_intensity, load_carbon_factors
from estimator.models.carbon_models import DeploymentSchedule
from estimator.models.hardware_models import KIB, MIB, HardwareConfig, Platform
from estimator.models.workload_models import EncoderConfig, ModelConfig
from estimator.perf import load_coefficients
from estimator.workload import load_model_preset
from optimizer.codesign_optimizer import CodesignOptimizer
from optimizer.models.search_models import (
    Candidate,
    Metrics,
    ObjectiveMode,
    ObjectiveVariant,
    RunRecord,
)

DESK_CONFIG = data_path("desk_benchmark.json")


@pytest.fixture(scope="session")
def grid_provider() -> StaticGridProvider:
    """Bundled static grid dataset"""
    return StaticGridProvider()


@pytest.fixture(scope="session")
def coeffs():
    return load_coefficients()


@pytest.fixture(scope="session")
def factors():
    return load_carbon_factors()


@pytest.fixture
def platform() -> Platform:
    return Platform()


@pytest.fixture
def schedule() -> DeploymentSchedule:
    return DeploymentSchedule()


@pytest.fixture(scope="session")
def ca_grid(grid_provider):
    return grid_intensity("CA-US", grid_provider)


@pytest.fixture(scope="session")
def clip_b16() -> ModelConfig:
    return load_model_preset("clip-b-16")


@pytest.fixture
def tiny_encoder_model() -> ModelConfig:
    """One-layer encoder: seq 4, hidden 8, ffn 16, two heads of width 4"""
    return ModelConfig(
        family="encoder",
        encoders={
            "text": EncoderConfig(
                num_layers=1, ffn_dim=16, hidden_dim=8, num_heads=2,
                head_dim=4, seq_len=4, vocab_size=32,
            )
        },
    )


@pytest.fixture
def desk_config() -> RunConfig:
    """Desk benchmark: 64 pruned toy dual encoders x 64 hardware designs"""
    return load_run_config(DESK_CONFIG)


@pytest.fixture
def desk_optimizer(desk_config, grid_provider) -> CodesignOptimizer:
    return CodesignOptimizer(desk_config, grid_provider)


@pytest.fixture
def big_hw() -> HardwareConfig:
    """Hardware with ample buffers and bandwidth for closed-form checks"""
    return HardwareConfig(tc=1, pe_x=16, pe_y=16, glb_bytes=4 * MIB, l2_bytes=1024 * KIB, l2_bw=256)


def exhaustive_config(config: RunConfig, mode: str) -> RunConfig:
    search = config.search.model_copy(update={"mode": ObjectiveVariant(mode), "strategy": "exhaustive"})
    return config.model_copy(update={"search": search})


@pytest.fixture(scope="session")
def desk_oracle(grid_provider) -> Callable[[str], RunRecord]:
    """
    Exhaustive desk-benchmark run per objective mode.

    Runs are cached for the whole session; the desk space is small enough
    to enumerate but not cheap enough to enumerate in every test.
    """
    cache: Dict[str, RunRecord] = {}

    def _run(mode: str = "carbon") -> RunRecord:
        if mode not in cache:
            config = exhaustive_config(load_run_config(DESK_CONFIG), mode)
            cache[mode] = CodesignOptimizer(config, grid_provider).run()
        return cache[mode]

    return _run


@pytest.fixture
def make_candidate(tiny_encoder_model, big_hw) -> Callable[..., Candidate]:
    """
    Build a feasible candidate with the given metrics.

    Candidates built with the same label differ only in their hardware so
    their fingerprints stay unique.
    """
    counter = {"n": 0}

    def _make(accuracy: float, latency_s: float = 0.01, energy_j: float = 0.001,
              carbon_kg: float = 1.0, mode: ObjectiveVariant = ObjectiveVariant.ACC_CARBON,
              feasible: bool = True, hw: Optional[HardwareConfig] = None) -> Candidate:
        counter["n"] += 1
        hw = hw or big_hw.model_copy(update={"glb_bytes": counter["n"]})
        metrics = Metrics(
            accuracy=accuracy, latency_s=latency_s, energy_j=energy_j, carbon_kg=carbon_kg,
            embodied_kg=carbon_kg / 2, operational_kg=carbon_kg / 2, area_mm2=5.0,
            params=1000, peak_tops=0.256,
        )
        return Candidate(
            model=tiny_encoder_model, hw=hw, metrics=metrics, feasible=feasible,
            violations=() if feasible else ("LATENCY_CAP test",), mode=mode,
        )

    return _make


@pytest.fixture
def carbon_mode() -> ObjectiveMode:
    return ObjectiveMode(variant=ObjectiveVariant.ACC_CARBON)


class TestConfig:
    """Test configuration constants"""
    DESK_CONFIG = DESK_CONFIG
    DESK_MODELS = 64
    DESK_HARDWARE = 64
    CLIP_B16_MIN_CARBON_HW = "1,256,8,64,256,2"
    PROPERTY_CASES = 1000
    SEEDS = (0, 1, 2, 3, 4)
