"""Cross-lingual transfer efficiency: observed performance gain per unit of
source-side adaptation cost, optionally discounted by linguistic distance,
and a similarity-linked predictor for pairs never measured.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationError
from .profiles import LanguageProfile
from .scaling import DEFAULT_FLOORS, ScalingParams, SmoothingFloors

__all__ = [
    "CTEConfig",
    "TransferObservation",
    "cte_measured",
    "cte_distance_aware",
    "cte_predicted",
    "target_readiness",
]


@dataclass(frozen=True)
class CTEConfig:
    """Cost and distance exponents plus the predictor's link constant."""

    omega: float = 0.0
    chi: float = 0.0
    tau: float = 0.0
    link_constant: float = 1.0

    def __post_init__(self):
        for field in ("omega", "chi", "tau"):
            value = getattr(self, field)
            if not (value >= 0 and value == value):
                raise ValidationError(f"{field} must be finite and >= 0, got {value}")
        if not self.link_constant > 0:
            raise ValidationError(f"link_constant must be > 0, got {self.link_constant}")


@dataclass(frozen=True)
class TransferObservation:
    """One measured transfer outcome: adapting on `source` changed the task
    metric on `target` by delta_perf (negative means harmful transfer)."""

    source: str
    target: str
    delta_perf: float
    source_data_tokens: float
    adapter_capacity: float

    def __post_init__(self):
        if not self.source_data_tokens > 0:
            raise ValidationError(
                f"source_data_tokens must be > 0, got {self.source_data_tokens}"
            )
        if not self.adapter_capacity >= 1:
            raise ValidationError(f"adapter_capacity must be >= 1, got {self.adapter_capacity}")


def cte_measured(obs: TransferObservation, cfg: CTEConfig) -> float:
    """Performance delta per unit cost, where cost is D_s^omega * R^chi.
    Sign follows the delta; zero exponents make this the raw delta."""
    cost = obs.source_data_tokens**cfg.omega * obs.adapter_capacity**cfg.chi
    return obs.delta_perf / cost


def cte_distance_aware(obs: TransferObservation, dist: float, cfg: CTEConfig) -> float:
    """Measured efficiency further divided by (1 + dist)^tau."""
    if not dist >= 0:
        raise ValidationError(f"distance must be >= 0, got {dist}")
    return cte_measured(obs, cfg) / (1.0 + dist) ** cfg.tau


def target_readiness(
    target: LanguageProfile,
    adapter_capacity: float,
    params: ScalingParams,
    floors: SmoothingFloors = DEFAULT_FLOORS,
) -> float:
    """How much the target side can absorb transfer, in (0, 1].

    The reciprocal of 1 plus the target-side cost terms of the loss law
    (pretraining, data, adapter), evaluated with the target's fitted
    constants. Saturates at 1 when all three cost terms vanish.
    """
    p_eff = max(target.pretrain_repr, floors.p_floor)
    d_eff = max(target.data_tokens, floors.d_floor)
    cost = (
        params.kappa * p_eff ** -params.pi_exp
        + params.gamma * d_eff ** -params.delta
        + params.eta * adapter_capacity ** -params.rho
    )
    return 1.0 / (1.0 + cost)


def cte_predicted(
    ttc_score: float,
    target: LanguageProfile,
    adapter_capacity: float,
    params: ScalingParams,
    floors: SmoothingFloors = DEFAULT_FLOORS,
    cfg: CTEConfig = CTEConfig(),
) -> float:
    """Predicted transfer efficiency for an unmeasured pair: linguistic
    similarity scaled by target readiness and the calibratable link
    constant. Similarity alone is not enough; a target with no data, no
    pretraining presence, and a tiny adapter predicts near-zero transfer."""
    return cfg.link_constant * ttc_score * target_readiness(target, adapter_capacity, params, floors)
