from typing import List, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from note2ucdi.exceptions import UcdiError

TERM_NAMES = ("binary", "rgb", "edges", "corners", "features", "regions")


class UcdiConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    epsilon: float = 1e-5
    z_max: float = 20.0
    weights: Tuple[float, float, float, float, float, float] = (0.4, 0.2, 0.15, 0.15, 0.05, 0.05)
    override_feature_ratio: float = 0.45
    override_binary_floor: float = 5.0
    override_cap: float = 0.65

    @field_validator("weights")
    @classmethod
    def _positive_weights(cls, weights: Tuple[float, ...]) -> Tuple[float, ...]:
        if any(w <= 0 for w in weights):
            raise ValueError("UCDI weights must be positive")
        return weights

    @model_validator(mode="after")
    def _positive_scales(self) -> "UcdiConfig":
        if self.epsilon <= 0 or self.z_max <= 0:
            raise ValueError("epsilon and z_max must be > 0")
        return self


class UcdiInputs(BaseModel):
    """The seven damage measurements folded into the index."""

    model_config = ConfigDict(frozen=True)

    binary_damage: float = Field(ge=0, le=100)  # percent
    rgb_damage: float = Field(ge=0, le=100)  # percent
    damaged_edges: int = Field(ge=0, le=4)
    damaged_corners: int = Field(ge=0, le=4)
    missing_features: int = Field(ge=0)
    total_features: int = Field(ge=0)
    damaged_regions: int = Field(ge=0)

    @model_validator(mode="after")
    def _features_within_total(self) -> "UcdiInputs":
        # UcdiError is not a ValueError, so pydantic lets it through unwrapped
        if self.missing_features > self.total_features:
            raise UcdiError(
                f"missing features ({self.missing_features}) exceed total features ({self.total_features})"
            )
        return self


class UcdiTerm(BaseModel):
    name: str
    value: float
    normalized: float
    transformed: float
    weight: float
    contribution: float


class UcdiBreakdown(BaseModel):
    terms: List[UcdiTerm]
    raw_score: float  # 1 - sum of contributions
    override_fired: bool
    capped: bool
    clamped: bool
    score: float

    def contribution(self, name: str) -> float:
        return next(t.contribution for t in self.terms if t.name == name)
