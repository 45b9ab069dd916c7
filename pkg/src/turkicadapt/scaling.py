"""Adaptation loss law and parameter-efficient fine-tuning arithmetic.

The predicted downstream loss of adapting a base model to a language is a
sum of power-law terms in model capacity M, adaptation data D, adapter
capacity R, and pretraining representation P, plus an irreducible floor:

    loss = alpha*M^-beta + gamma*D^-delta + eta*R^-rho + kappa*P^-pi + epsilon

D and P may be zero in practice, where the negative powers blow up; they
are evaluated on configurable floors instead so the singular behavior
stays inspectable. The extended form subtracts logarithmic coupling terms
lambda*log(1+D*P) + mu*log(1+R*P) + nu*log(1+D*R), which are regular at
zero and therefore use the raw (unfloored) values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ValidationError
from .profiles import Regime

__all__ = [
    "ScalingParams",
    "AdaptationInputs",
    "SmoothingFloors",
    "DEFAULT_FLOORS",
    "base_loss",
    "interaction_loss",
    "regime_loss",
    "LoraParamCount",
    "lora_param_count",
    "apply_low_rank_update",
    "fertility",
]


@dataclass(frozen=True)
class ScalingParams:
    """Constants of the loss law for one language.

    alpha/gamma/eta/kappa scale the capacity, data, adapter, and
    pretraining terms; beta/delta/rho/pi_exp are the matching exponents;
    epsilon is the irreducible loss. lambda_dp, mu_rp, nu_dr weight the
    data-pretraining, adapter-pretraining, and data-adapter couplings.
    """

    alpha: float
    beta: float
    gamma: float
    delta: float
    eta: float
    rho: float
    kappa: float
    pi_exp: float
    epsilon: float
    lambda_dp: float = 0.0
    mu_rp: float = 0.0
    nu_dr: float = 0.0

    def __post_init__(self):
        for field in ("alpha", "gamma", "eta", "kappa", "epsilon", "lambda_dp", "mu_rp", "nu_dr"):
            if not getattr(self, field) >= 0:
                raise ValidationError(f"{field} must be >= 0, got {getattr(self, field)}")
        for field in ("beta", "delta", "rho", "pi_exp"):
            if not getattr(self, field) > 0:
                raise ValidationError(f"{field} must be > 0, got {getattr(self, field)}")


@dataclass(frozen=True)
class AdaptationInputs:
    """The four knobs the loss law responds to."""

    model_capacity: float
    data_tokens: float
    adapter_capacity: float
    pretrain_repr: float

    def __post_init__(self):
        if not self.model_capacity > 0:
            raise ValidationError(f"model_capacity must be > 0, got {self.model_capacity}")
        if not self.data_tokens >= 0:
            raise ValidationError(f"data_tokens must be >= 0, got {self.data_tokens}")
        if not self.adapter_capacity >= 1:
            raise ValidationError(f"adapter_capacity must be >= 1, got {self.adapter_capacity}")
        if not 0.0 <= self.pretrain_repr <= 1.0:
            raise ValidationError(f"pretrain_repr must be in [0, 1], got {self.pretrain_repr}")


@dataclass(frozen=True)
class SmoothingFloors:
    """Lower clamps applied to D and P inside the power-law terms only."""

    d_floor: float = 1.0
    p_floor: float = 1e-6

    def __post_init__(self):
        if not self.d_floor > 0 or not self.p_floor > 0:
            raise ValidationError("smoothing floors must be positive")


DEFAULT_FLOORS = SmoothingFloors()


def base_loss(
    params: ScalingParams,
    inputs: AdaptationInputs,
    floors: SmoothingFloors = DEFAULT_FLOORS,
) -> float:
    """Power-law loss with the irreducible floor; no coupling terms."""
    d_eff = max(inputs.data_tokens, floors.d_floor)
    p_eff = max(inputs.pretrain_repr, floors.p_floor)
    return (
        params.alpha * inputs.model_capacity ** -params.beta
        + params.gamma * d_eff ** -params.delta
        + params.eta * inputs.adapter_capacity ** -params.rho
        + params.kappa * p_eff ** -params.pi_exp
        + params.epsilon
    )


def interaction_loss(
    params: ScalingParams,
    inputs: AdaptationInputs,
    floors: SmoothingFloors = DEFAULT_FLOORS,
) -> float:
    """Loss law extended with the logarithmic coupling terms.

    Couplings are subtracted, so with nonnegative coupling weights this is
    never above base_loss on the same inputs.
    """
    d, p, r = inputs.data_tokens, inputs.pretrain_repr, inputs.adapter_capacity
    return (
        base_loss(params, inputs, floors)
        - params.lambda_dp * math.log1p(d * p)
        - params.mu_rp * math.log1p(r * p)
        - params.nu_dr * math.log1p(d * r)
    )


def regime_loss(
    params: ScalingParams,
    inputs: AdaptationInputs,
    floors: SmoothingFloors = DEFAULT_FLOORS,
    regime: Regime = Regime.MODERATE,
) -> float:
    """Regime-appropriate predictor: couplings are dropped in the
    extreme-low-resource regime, where their products are negligible."""
    if regime is Regime.EXTREME_LOW:
        return base_loss(params, inputs, floors)
    return interaction_loss(params, inputs, floors)


class LoraParamCount(NamedTuple):
    trainable: int
    full: int
    ratio: float


def lora_param_count(d: int, k: int, r: int) -> LoraParamCount:
    """Trainable vs full parameter counts for a rank-r update of a d x k
    weight matrix: the factors hold r*(d+k) parameters against d*k."""
    if d < 1 or k < 1:
        raise ValidationError(f"matrix dims must be >= 1, got {d}x{k}")
    if not 1 <= r <= min(d, k):
        raise ValidationError(f"rank must satisfy 1 <= r <= min(d, k) = {min(d, k)}, got {r}")
    trainable = r * (d + k)
    full = d * k
    return LoraParamCount(trainable, full, trainable / full)


def apply_low_rank_update(W: np.ndarray, B: np.ndarray, A: np.ndarray) -> np.ndarray:
    """Return W + B @ A without touching W. B is d x r, A is r x k."""
    W = np.asarray(W, dtype=float)
    B = np.asarray(B, dtype=float)
    A = np.asarray(A, dtype=float)
    if W.ndim != 2 or B.ndim != 2 or A.ndim != 2:
        raise ValidationError("W, B, A must all be 2-D matrices")
    d, k = W.shape
    if B.shape[0] != d or A.shape[1] != k or B.shape[1] != A.shape[0]:
        raise ValidationError(
            f"shape mismatch: W is {W.shape}, B is {B.shape}, A is {A.shape}"
        )
    return W + B @ A


def fertility(tokens_per_word: Sequence[int]) -> float:
    """Mean number of subword tokens per word; 1.0 means no word is split."""
    counts = list(tokens_per_word)
    if not counts:
        raise ValidationError("fertility needs at least one word")
    for c in counts:
        if c < 1:
            raise ValidationError(f"token counts must be >= 1, got {c}")
    return sum(counts) / len(counts)
