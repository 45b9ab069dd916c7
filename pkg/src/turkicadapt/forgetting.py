"""Logistic model of catastrophic-forgetting risk.

Risk grows with adapter capacity, adaptation data volume, and the novelty
of the new language, and shrinks with pretraining representation and with
transferable support from related languages already in the model:

    risk = sigmoid(a*R + b*D' + c*(1 - P) + d*U - e*T)

Raw token counts would saturate the sigmoid for any nonzero b, so D enters
as log10(1 + D) by default; the transform is a parameter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import ValidationError
from .profiles import ProfileSet
from .ttc import TTCMatrix

__all__ = [
    "ForgettingCoeffs",
    "ForgettingInputs",
    "logistic",
    "forgetting_risk",
    "derive_transfer_support",
    "log10p1",
]


_ONE_BELOW = math.nextafter(1.0, 0.0)
_ZERO_ABOVE = math.nextafter(0.0, 1.0)


def logistic(x: float) -> float:
    """Numerically stable sigmoid: the sign-split form never exponentiates
    a positive argument, so it is overflow-free for |x| up to ~700. The
    result is clamped to the open interval (float rounding would otherwise
    return exactly 1.0 past x of about 37)."""
    if not math.isfinite(x):
        raise ValidationError(f"logistic input must be finite, got {x}")
    if x >= 0:
        value = 1.0 / (1.0 + math.exp(-x))
    else:
        z = math.exp(x)
        value = z / (1.0 + z)
    return min(max(value, _ZERO_ABOVE), _ONE_BELOW)


@dataclass(frozen=True)
class ForgettingCoeffs:
    """Per-input slopes of the risk logit (e is a subtractive weight)."""

    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0
    e: float = 0.0

    def __post_init__(self):
        for field in ("a", "b", "c", "d", "e"):
            if not math.isfinite(getattr(self, field)):
                raise ValidationError(f"coefficient {field} must be finite")


@dataclass(frozen=True)
class ForgettingInputs:
    adapter_capacity: float
    data_tokens: float
    pretrain_repr: float
    novelty: float
    transfer_support: float

    def __post_init__(self):
        if not self.adapter_capacity >= 1:
            raise ValidationError(f"adapter_capacity must be >= 1, got {self.adapter_capacity}")
        if not self.data_tokens >= 0:
            raise ValidationError(f"data_tokens must be >= 0, got {self.data_tokens}")
        for field in ("pretrain_repr", "novelty", "transfer_support"):
            value = getattr(self, field)
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"{field} must be in [0, 1], got {value}")


def log10p1(tokens: float) -> float:
    return math.log10(1.0 + tokens)


def forgetting_risk(
    coeffs: ForgettingCoeffs,
    inputs: ForgettingInputs,
    data_transform: Callable[[float], float] = log10p1,
) -> float:
    """Risk in (0, 1). data_transform maps raw token counts onto the logit
    scale (identity recovers the untransformed model)."""
    logit = (
        coeffs.a * inputs.adapter_capacity
        + coeffs.b * data_transform(inputs.data_tokens)
        + coeffs.c * (1.0 - inputs.pretrain_repr)
        + coeffs.d * inputs.novelty
        - coeffs.e * inputs.transfer_support
    )
    return logistic(logit)


def default_novelty(pretrain_repr: float) -> float:
    """Fallback when novelty is not observed: the complement of how much
    of the language the model has already seen."""
    return 1.0 - pretrain_repr


def derive_transfer_support(
    matrix: TTCMatrix,
    profiles: ProfileSet,
    target: str,
    p_ref: float = 0.01,
) -> float:
    """Transfer support for a target language from its best-supported
    relative: the highest source->target score, gated by how well that
    source is represented in pretraining (sources with pretrain_repr at or
    above p_ref count fully; below, proportionally). Empty max is 0."""
    if not p_ref > 0:
        raise ValidationError(f"p_ref must be > 0, got {p_ref}")
    t = matrix.index(target)
    profiles.get(target)
    best = 0.0
    for source in matrix.languages:
        if source == target:
            continue
        gate = min(1.0, profiles.get(source).pretrain_repr / p_ref)
        best = max(best, matrix.score(source, target) * gate)
    return min(1.0, max(0.0, best))
