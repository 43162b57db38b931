import math
from typing import Callable, List, Optional, Tuple

from note2ucdi.ucdi.models import TERM_NAMES, UcdiBreakdown, UcdiConfig, UcdiInputs, UcdiTerm


def _normalized(inputs: UcdiInputs, config: UcdiConfig) -> List[Tuple[float, float]]:
    eps = config.epsilon
    return [
        (inputs.binary_damage, inputs.binary_damage / (100 + eps)),
        (inputs.rgb_damage, inputs.rgb_damage / (100 + eps)),
        (inputs.damaged_edges, inputs.damaged_edges / 4),
        (inputs.damaged_corners, inputs.damaged_corners / 4),
        (inputs.missing_features, inputs.missing_features / (inputs.total_features + eps)),
        (inputs.damaged_regions, inputs.damaged_regions / (config.z_max + eps)),
    ]


TRANSFORMS: Tuple[Callable[[float], float], ...] = (
    lambda b: 2 * b,
    lambda r: 2 * r,
    lambda e: 1.5 * e,
    lambda c: c**1.5,
    math.log1p,
    math.tanh,
)


def override_applies(inputs: UcdiInputs, config: UcdiConfig) -> bool:
    """Heavy feature loss on a torn note caps the score; both comparisons are strict."""
    if inputs.total_features == 0:
        return False
    feature_ratio = inputs.missing_features / inputs.total_features
    return (
        feature_ratio > config.override_feature_ratio
        and inputs.binary_damage > config.override_binary_floor
    )


def explain_ucdi(inputs: UcdiInputs, config: Optional[UcdiConfig] = None) -> UcdiBreakdown:
    config = config or UcdiConfig()

    terms = []
    for name, (value, normalized), transform, weight in zip(
        TERM_NAMES, _normalized(inputs, config), TRANSFORMS, config.weights
    ):
        transformed = transform(normalized)
        terms.append(
            UcdiTerm(
                name=name,
                value=value,
                normalized=normalized,
                transformed=transformed,
                weight=weight,
                contribution=weight * transformed,
            )
        )

    raw_score = 1.0 - sum(t.contribution for t in terms)
    score = raw_score
    fired = override_applies(inputs, config)
    capped = fired and score > config.override_cap
    if capped:
        score = config.override_cap
    clamped = not 0.0 <= score <= 1.0
    score = min(1.0, max(0.0, score))

    return UcdiBreakdown(
        terms=terms,
        raw_score=raw_score,
        override_fired=fired,
        capped=capped,
        clamped=clamped,
        score=score,
    )


def compute_ucdi(inputs: UcdiInputs, config: Optional[UcdiConfig] = None) -> float:
    """Unified Currency Damage Index in [0, 1]; 1 is a pristine note."""
    return explain_ucdi(inputs, config).score
