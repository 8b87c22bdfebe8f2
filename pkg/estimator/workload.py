"""
Workload module: prune spaces, configuration validation, lowering and
parameter counting for Transformer models.

Lowering turns a ModelConfig into the operator graph the cost model
consumes. Each operator is emitted once per encoder with a repeat count
covering layers, heads and batch, so graph size does not grow with depth.
"""

import json
import logging
import math
from typing import Dict, Iterator, List, Mapping, Optional, Tuple, Union

from pydantic import ValidationError

from config import data_path
from core.errors import ConfigError, PruneSpaceError
from estimator.models.hardware_models import HardwareConfig
from estimator.models.workload_models import (
    DIMENSION_FIELDS,
    PRUNE_DIMENSIONS,
    EncoderConfig,
    ModelConfig,
    Operator,
    OperatorGraph,
    PruneSpace,
    PruneSteps,
)

logger = logging.getLogger(__name__)

SUPPORTED_PRESET_SCHEMAS = (1,)

StepsArg = Union[PruneSteps, Mapping[str, PruneSteps], None]


def _candidate_values(base: int, step: int) -> Tuple[int, ...]:
    """Base value down to ceil(base/2) in decrements of step, ascending"""
    floor = math.ceil(base / 2)
    values = []
    value = base
    while value >= floor:
        values.append(value)
        value -= step
    return tuple(sorted(values))


def build_prune_space(base: ModelConfig, steps: StepsArg = None) -> PruneSpace:
    """
    Build the candidate lists of every (encoder, dimension) pair.

    Args:
        base: Unpruned model; every prunable dimension must be at least 2.
        steps: One PruneSteps for all encoders, or a mapping per encoder name.

    Returns:
        PruneSpace whose lists contain the base value and never go below half of it.
    """
    candidates: Dict[str, Dict[str, Tuple[int, ...]]] = {}
    for enc_name in base.encoder_names:
        if isinstance(steps, Mapping):
            enc_steps = steps.get(enc_name, PruneSteps())
        else:
            enc_steps = steps or PruneSteps()

        enc = base.encoders[enc_name]
        enc_candidates: Dict[str, Tuple[int, ...]] = {}
        for dim, base_value in enc.dims().items():
            step = getattr(enc_steps, dim)
            if step <= 0:
                raise PruneSpaceError(
                    f"{enc_name}.{dim}: step must be positive, got {step}"
                )
            if base_value < 2:
                raise PruneSpaceError(
                    f"{enc_name}.{dim}: base value must be at least 2, got {base_value}"
                )
            if step > base_value / 2:
                logger.warning(
                    f"{enc_name}.{dim}: step {step} exceeds half of base {base_value}, "
                    f"dimension is fixed at the base value"
                )
            enc_candidates[dim] = _candidate_values(base_value, step)
        candidates[enc_name] = enc_candidates

    space = PruneSpace(base=base, candidates=candidates)
    logger.debug(f"Prune space for {base.fingerprint}: {space.size()} configurations")
    return space


def singleton_space(model: ModelConfig) -> PruneSpace:
    """Prune space holding only the given model, for hardware-only search"""
    candidates = {
        enc: {dim: (value,) for dim, value in model.encoders[enc].dims().items()}
        for enc in model.encoder_names
    }
    return PruneSpace(base=model, candidates=candidates)


def validate_model_config(cfg: ModelConfig, space: PruneSpace) -> List[Tuple[str, str, int]]:
    """
    Check prune-space membership.

    Returns the violating (encoder, dimension, value) triples; an empty list
    means the configuration is a member of the space.
    """
    violations: List[Tuple[str, str, int]] = []
    for enc_name in sorted(set(cfg.encoders) | set(space.candidates)):
        if enc_name not in space.candidates or enc_name not in cfg.encoders:
            violations.append((enc_name, "encoder", 0))
            continue
        enc = cfg.encoders[enc_name]
        base_enc = space.base.encoders[enc_name]
        for dim, value in enc.dims().items():
            if value not in space.candidates[enc_name][dim]:
                violations.append((enc_name, dim, value))
        if enc.head_dim != base_enc.head_dim:
            violations.append((enc_name, "head_dim", enc.head_dim))
        if enc.seq_len != base_enc.seq_len:
            violations.append((enc_name, "seq_len", enc.seq_len))
    return violations


def iter_model_configs(space: PruneSpace) -> Iterator[ModelConfig]:
    """Every member of the prune space, in gene order with the last gene fastest"""
    genes = space.genes()
    lists = [space.candidates[enc][dim] for enc, dim in genes]

    def _expand(idx: int, chosen: List[int]) -> Iterator[ModelConfig]:
        if idx == len(genes):
            yield config_from_values(space, chosen)
            return
        for value in lists[idx]:
            chosen.append(value)
            yield from _expand(idx + 1, chosen)
            chosen.pop()

    yield from _expand(0, [])


def config_from_values(space: PruneSpace, values: List[int]) -> ModelConfig:
    """ModelConfig for one value per gene of the prune space"""
    dims: Dict[str, Dict[str, int]] = {}
    for (enc, dim), value in zip(space.genes(), values):
        dims.setdefault(enc, {})[dim] = value
    return space.base.with_encoder_dims(dims)


def _layer_operators(enc_name: str, enc: EncoderConfig, batch: int) -> List[Operator]:
    S, H, F = enc.seq_len, enc.hidden_dim, enc.ffn_dim
    A, heads, d = enc.attn_dim, enc.num_heads, enc.head_dim
    r = enc.num_layers * batch
    p = f"{enc_name}."

    return [
        Operator(name=p + "qkv_proj", encoder=enc_name, kind="gemm", M=S, K=H, N=3 * A, repeat=r),
        Operator(name=p + "attn_scores", encoder=enc_name, kind="gemm", M=S, K=d, N=S, repeat=r * heads),
        Operator(name=p + "softmax", encoder=enc_name, kind="softmax", elements=heads * S * S, repeat=r),
        Operator(name=p + "attn_context", encoder=enc_name, kind="gemm", M=S, K=S, N=d, repeat=r * heads),
        Operator(name=p + "attn_out_proj", encoder=enc_name, kind="gemm", M=S, K=A, N=H, repeat=r),
        Operator(name=p + "attn_residual", encoder=enc_name, kind="residual_add", elements=S * H, repeat=r),
        Operator(name=p + "attn_layernorm", encoder=enc_name, kind="layernorm", elements=S * H, repeat=r),
        Operator(name=p + "ffn_up", encoder=enc_name, kind="gemm", M=S, K=H, N=F, repeat=r),
        Operator(name=p + "gelu", encoder=enc_name, kind="gelu", elements=S * F, repeat=r),
        Operator(name=p + "ffn_down", encoder=enc_name, kind="gemm", M=S, K=F, N=H, repeat=r),
        Operator(name=p + "ffn_residual", encoder=enc_name, kind="residual_add", elements=S * H, repeat=r),
        Operator(name=p + "ffn_layernorm", encoder=enc_name, kind="layernorm", elements=S * H, repeat=r),
    ]


def lower_to_graph(cfg: ModelConfig) -> OperatorGraph:
    """
    Lower a model into its operator graph.

    Decoder-only models use the same layer recipe; the causal mask does not
    change the S x S score shape.
    """
    operators: List[Operator] = []
    try:
        for enc_name in cfg.encoder_names:
            enc = cfg.encoders[enc_name]
            if enc.num_layers > 0:
                operators.extend(_layer_operators(enc_name, enc, cfg.batch_size))
            if cfg.family == "dual":
                # projection of the pooled token into the shared embedding
                operators.append(
                    Operator(
                        name=f"{enc_name}.projection", encoder=enc_name, kind="gemm",
                        M=1, K=enc.hidden_dim, N=cfg.embed_dim, repeat=cfg.batch_size,
                    )
                )
    except ValidationError as e:
        raise ConfigError(f"Cannot lower {cfg.fingerprint}: {e}") from e
    return OperatorGraph(
        source_fingerprint=cfg.fingerprint,
        operators=tuple(operators),
        total_params=param_count(cfg),
    )


def _encoder_params(enc: EncoderConfig) -> int:
    H, F, A = enc.hidden_dim, enc.ffn_dim, enc.attn_dim

    embeddings = enc.seq_len * H
    if enc.vocab_size:
        embeddings += enc.vocab_size * H
    if enc.patch_size:
        # patch conv without bias, class token, pre-norm
        embeddings += enc.channels * enc.patch_size ** 2 * H + H + 2 * H

    per_layer = (
        H * 3 * A + 3 * A      # qkv
        + A * H + H            # attention output
        + H * F + F            # ffn up
        + F * H + H            # ffn down
        + 2 * 2 * H            # two layernorms
    )
    final_norm = 2 * H if enc.num_layers > 0 else 0
    return embeddings + enc.num_layers * per_layer + final_norm


def param_count(cfg: ModelConfig) -> int:
    """Weights of projections, FFNs, layernorms and embedding tables"""
    total = 0
    for enc_name in cfg.encoder_names:
        enc = cfg.encoders[enc_name]
        total += _encoder_params(enc)
        if cfg.family == "dual":
            total += enc.hidden_dim * cfg.embed_dim
    return total


def dump_graph(graph: OperatorGraph, path: Optional[str] = None) -> str:
    """Serialize a graph as JSON; write it to path when given"""
    text = graph.model_dump_json(indent=2)
    if path:
        with open(path, "w") as f:
            f.write(text)
        logger.info(f"Wrote operator graph with {len(graph.operators)} operators to {path}")
    return text


def _load_presets_file(path: Optional[str] = None) -> dict:
    path = path or data_path("model_presets.json")
    try:
        with open(path) as f:
            payload = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from e
    except OSError as e:
        raise ConfigError(f"Cannot read model presets file {path}: {e}") from e
    version = payload.get("schema_version")
    if version not in SUPPORTED_PRESET_SCHEMAS:
        raise ConfigError(f"{path}: unsupported schema_version {version}")
    return payload


def list_model_presets(path: Optional[str] = None) -> List[str]:
    return sorted(_load_presets_file(path)["presets"])


def load_model_preset(name: str, path: Optional[str] = None) -> ModelConfig:
    """Named model from the presets file, e.g. 'clip-b-16'"""
    presets = _load_presets_file(path)["presets"]
    if name not in presets:
        raise ConfigError(
            f"Unknown model preset '{name}'. Available presets: {', '.join(sorted(presets))}"
        )
    try:
        return ModelConfig.model_validate(presets[name])
    except ValidationError as e:
        raise ConfigError(f"Preset '{name}' is invalid: {e}") from e


def reference_hardware(key: str, path: Optional[str] = None) -> HardwareConfig:
    """Published hardware of a preset, e.g. 'carbonclip-xs' or 'clip-b-16:min-carbon'"""
    table = _load_presets_file(path).get("reference_hardware", {})
    if key not in table:
        raise ConfigError(
            f"No reference hardware for '{key}'. Available: {', '.join(sorted(table))}"
        )
    return HardwareConfig.from_notation(table[key])


__all__ = [
    "PRUNE_DIMENSIONS",
    "DIMENSION_FIELDS",
    "build_prune_space",
    "singleton_space",
    "validate_model_config",
    "iter_model_configs",
    "config_from_values",
    "lower_to_graph",
    "param_count",
    "dump_graph",
    "list_model_presets",
    "load_model_preset",
    "reference_hardware",
]
