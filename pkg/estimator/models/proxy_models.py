"""
Pydantic models for accuracy estimation.
"""

from typing import Dict, Iterable, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

MissPolicy = Literal["strict", "nearest"]


class DimensionExponents(BaseModel):
    """Sensitivity exponent per prunable dimension"""

    model_config = ConfigDict(frozen=True)

    hidden: float = Field(1.0, ge=0)
    layers: float = Field(0.6, ge=0)
    ffn: float = Field(0.3, ge=0)
    heads: float = Field(0.3, ge=0)

    @model_validator(mode="after")
    def _check_ordering(self) -> "DimensionExponents":
        # hidden width is the most sensitive dimension, FFN width the least
        if not (self.hidden >= self.layers >= self.ffn and self.hidden >= self.heads):
            raise ValueError(
                "exponents must satisfy hidden >= layers >= ffn and hidden >= heads, "
                f"got hidden={self.hidden}, layers={self.layers}, ffn={self.ffn}, heads={self.heads}"
            )
        return self


class SensitivityProfile(BaseModel):
    """Analytic accuracy proxy parameters"""

    model_config = ConfigDict(frozen=True)

    acc0: float = Field(0.5, ge=0, le=1, description="Accuracy of the unpruned base model")
    exponents: Dict[str, DimensionExponents] = Field(
        default_factory=dict, description="Per-encoder exponents; missing encoders use default_exponents"
    )
    default_exponents: DimensionExponents = Field(default_factory=DimensionExponents)
    weights: Dict[str, float] = Field(
        default_factory=lambda: {"vision": 0.6, "text": 0.4},
        description="Per-encoder weights of dual encoders; must sum to 1",
    )

    @model_validator(mode="after")
    def _check_weights(self) -> "SensitivityProfile":
        if self.weights:
            if any(w < 0 for w in self.weights.values()):
                raise ValueError("encoder weights must be non-negative")
            if abs(sum(self.weights.values()) - 1.0) > 1e-9:
                raise ValueError(f"encoder weights must sum to 1, got {sum(self.weights.values())}")
        return self

    def exponents_for(self, encoder: str) -> DimensionExponents:
        return self.exponents.get(encoder, self.default_exponents)

    def weights_for(self, encoders: Iterable[str]) -> Dict[str, float]:
        """Weights for the given encoders; equal weights when the profile does not cover them all"""
        encoders = list(encoders)
        if encoders and all(enc in self.weights for enc in encoders):
            picked = {enc: self.weights[enc] for enc in encoders}
            total = sum(picked.values())
            if total > 0:
                return {enc: w / total for enc, w in picked.items()}
        return {enc: 1.0 / len(encoders) for enc in encoders}


class ProxySettings(BaseModel):
    """Which accuracy estimator a run uses"""

    kind: Literal["analytic", "table"] = "analytic"
    profile: SensitivityProfile = Field(default_factory=SensitivityProfile)
    table_path: str = Field("", description="CSV of measured accuracies for kind='table'")
    policy: MissPolicy = "strict"


__all__ = ["MissPolicy", "DimensionExponents", "SensitivityProfile", "ProxySettings"]
