"""
Pydantic models for Transformer workloads.

A ModelConfig names one or two encoders (text and vision for CLIP-style
dual encoders) with their structural dimensions. Lowering a ModelConfig
produces an OperatorGraph, the only workload representation the cost model
sees.
"""

from typing import Dict, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

# Prunable dimensions in the order they are reported: {layers, ffn, hidden, heads}
PRUNE_DIMENSIONS: Tuple[str, ...] = ("layers", "ffn", "hidden", "heads")

DIMENSION_FIELDS: Dict[str, str] = {
    "layers": "num_layers",
    "ffn": "ffn_dim",
    "hidden": "hidden_dim",
    "heads": "num_heads",
}

VectorKind = Literal["softmax", "layernorm", "gelu", "residual_add"]
OperatorKind = Literal["gemm", "softmax", "layernorm", "gelu", "residual_add"]


class EncoderConfig(BaseModel):
    """Structural dimensions of one Transformer stack"""

    model_config = ConfigDict(frozen=True)

    num_layers: int = Field(..., ge=0, description="Number of Transformer layers")
    ffn_dim: int = Field(..., ge=1, description="Inner width of the feed-forward block")
    hidden_dim: int = Field(..., ge=1, description="Residual stream width")
    num_heads: int = Field(..., ge=1, description="Number of attention heads")
    head_dim: int = Field(64, ge=1, description="Width of one attention head, fixed at the base value")
    seq_len: int = Field(..., ge=1, description="Tokens per sequence (patches + CLS for vision)")
    vocab_size: int = Field(0, ge=0, description="Token-embedding rows; 0 for patch-embedded inputs")
    patch_size: int = Field(0, ge=0, description="Patch edge in pixels; 0 for token inputs")
    channels: int = Field(3, ge=1, description="Image channels for patch embedding")

    @property
    def attn_dim(self) -> int:
        return self.num_heads * self.head_dim

    def dims(self) -> Dict[str, int]:
        """Prunable dimensions keyed by dimension name"""
        return {dim: getattr(self, field) for dim, field in DIMENSION_FIELDS.items()}

    def with_dims(self, dims: Dict[str, int]) -> "EncoderConfig":
        """Copy with some prunable dimensions replaced"""
        update = {DIMENSION_FIELDS[dim]: value for dim, value in dims.items()}
        return self.model_copy(update=update)


class ModelConfig(BaseModel):
    """A Transformer model: one stack, or two stacks joined by a shared embedding"""

    model_config = ConfigDict(frozen=True)

    family: Literal["encoder", "decoder", "dual"] = Field(
        ..., description="Encoder-only, decoder-only, or dual-encoder (CLIP-style)"
    )
    encoders: Dict[str, EncoderConfig] = Field(
        ..., description="Encoder stacks keyed by name, e.g. 'text' and 'vision'"
    )
    embed_dim: int = Field(
        0, ge=0,
        description="Shared embedding width of dual encoders (base text hidden width)"
    )
    batch_size: int = Field(1, ge=1, description="Sequences per inference")
    name: Optional[str] = Field(None, description="Preset or user-given label")

    @model_validator(mode="after")
    def _check_family(self) -> "ModelConfig":
        expected = 2 if self.family == "dual" else 1
        if len(self.encoders) != expected:
            raise ValueError(
                f"family '{self.family}' needs {expected} encoder(s), got {len(self.encoders)}"
            )
        if self.family == "dual" and self.embed_dim < 1:
            raise ValueError("dual encoders need a positive embed_dim")
        return self

    @property
    def encoder_names(self) -> Tuple[str, ...]:
        return tuple(sorted(self.encoders))

    @property
    def fingerprint(self) -> str:
        """Stable identity string, e.g. 'text:12-2048-512-8|vision:12-3072-768-12'"""
        parts = []
        for enc in self.encoder_names:
            dims = self.encoders[enc].dims()
            parts.append(f"{enc}:" + "-".join(str(dims[d]) for d in PRUNE_DIMENSIONS))
        return "|".join(parts)

    def with_encoder_dims(self, dims: Dict[str, Dict[str, int]]) -> "ModelConfig":
        """Copy with per-encoder prunable dimensions replaced"""
        encoders = dict(self.encoders)
        for enc, enc_dims in dims.items():
            encoders[enc] = encoders[enc].with_dims(enc_dims)
        return self.model_copy(update={"encoders": encoders})


class PruneSteps(BaseModel):
    """Step sizes for candidate generation of one encoder"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    layers: int = Field(1, description="Layer step")
    heads: int = Field(1, description="Head step")
    hidden: int = Field(32, description="Hidden-width step")
    ffn: int = Field(128, description="FFN-width step")


class PruneSpace(BaseModel):
    """Candidate values per (encoder, dimension) for a base model"""

    model_config = ConfigDict(frozen=True)

    base: ModelConfig
    candidates: Dict[str, Dict[str, Tuple[int, ...]]] = Field(
        ..., description="encoder -> dimension -> ascending candidate values"
    )

    def size(self) -> int:
        total = 1
        for enc_dims in self.candidates.values():
            for values in enc_dims.values():
                total *= len(values)
        return total

    def genes(self) -> Tuple[Tuple[str, str], ...]:
        """(encoder, dimension) pairs in a fixed order"""
        return tuple(
            (enc, dim) for enc in sorted(self.candidates) for dim in PRUNE_DIMENSIONS
        )


class Operator(BaseModel):
    """One lowered operator: a GEMM or an element-wise vector op"""

    model_config = ConfigDict(frozen=True)

    name: str
    encoder: str = ""
    kind: OperatorKind
    M: int = Field(0, ge=0)
    K: int = Field(0, ge=0)
    N: int = Field(0, ge=0)
    elements: int = Field(0, ge=0, description="Element count of a vector op")
    repeat: int = Field(1, ge=1, description="Identical instances (layers x heads x batch)")

    @model_validator(mode="after")
    def check_extent(self) -> "Operator":
        if self.kind == "gemm":
            if min(self.M, self.K, self.N) < 1:
                raise ValueError(f"GEMM {self.name} needs M, K, N >= 1, got {self.M}x{self.K}x{self.N}")
        elif self.elements < 1:
            raise ValueError(f"Vector op {self.name} needs at least one element")
        return self

    @property
    def is_gemm(self) -> bool:
        return self.kind == "gemm"

    @property
    def macs(self) -> int:
        return self.M * self.K * self.N * self.repeat if self.is_gemm else 0


class OperatorGraph(BaseModel):
    """Ordered operator list produced by lowering a ModelConfig"""

    model_config = ConfigDict(frozen=True)

    source_fingerprint: str
    operators: Tuple[Operator, ...]
    total_params: int = Field(..., ge=0)

    @property
    def total_macs(self) -> int:
        return sum(op.macs for op in self.operators)


__all__ = [
    "PRUNE_DIMENSIONS",
    "DIMENSION_FIELDS",
    "VectorKind",
    "OperatorKind",
    "EncoderConfig",
    "ModelConfig",
    "PruneSteps",
    "PruneSpace",
    "Operator",
    "OperatorGraph",
]
