"""Decision support on top of the predictive models: split a family-wide
token budget so aggregate predicted loss is minimized, and rank adapter
capacities against forgetting risk.

The allocator equalizes marginal loss reduction per token across languages
(water-filling). For each trial multiplier the per-language optimum is
found by a safeguarded Newton iteration on the marginal-gain equation, and
the multiplier itself is bisected until the budget is met. Predicted loss
is convex decreasing in added data everywhere except a sub-token sliver at
the data floor, so the first-order solution is globally optimal in
practice; a pairwise-exchange post-check catches the corner cases and
falls back to projected gradient descent, marking the plan as only
locally optimal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from .errors import InfeasibleBudgetError, ValidationError
from .forgetting import (
    ForgettingCoeffs,
    ForgettingInputs,
    default_novelty,
    forgetting_risk,
    log10p1,
)
from .profiles import LanguageProfile, ProfileSet
from .scaling import DEFAULT_FLOORS, AdaptationInputs, ScalingParams, SmoothingFloors, interaction_loss

__all__ = ["PlanRequest", "AllocationPlan", "allocate_data_budget", "select_rank"]


@dataclass(frozen=True)
class PlanRequest:
    """What to optimize: languages, their loss-law constants, the budget of
    new adaptation tokens to hand out, and the fixed model/adapter setup
    the predictions assume. weights scale each language's importance."""

    profiles: ProfileSet
    params: Union[ScalingParams, Mapping[str, ScalingParams]]
    total_budget: float
    min_per_language: float = 0.0
    model_capacity: float = 1e9
    adapter_capacity: float = 16.0
    weights: Mapping[str, float] | None = None
    floors: SmoothingFloors = DEFAULT_FLOORS

    def __post_init__(self):
        if not self.total_budget > 0:
            raise ValidationError(f"total_budget must be > 0, got {self.total_budget}")
        if self.min_per_language < 0:
            raise ValidationError(
                f"min_per_language must be >= 0, got {self.min_per_language}"
            )
        needed = self.min_per_language * len(self.profiles)
        if self.total_budget < needed:
            raise InfeasibleBudgetError(
                f"budget {self.total_budget} cannot cover {len(self.profiles)} languages "
                f"at minimum {self.min_per_language} each"
            )
        if not self.model_capacity > 0:
            raise ValidationError(f"model_capacity must be > 0, got {self.model_capacity}")
        if not self.adapter_capacity >= 1:
            raise ValidationError(
                f"adapter_capacity must be >= 1, got {self.adapter_capacity}"
            )
        if self.weights is not None:
            for lang, w in self.weights.items():
                if lang not in self.profiles:
                    raise ValidationError(f"weight given for unknown language {lang!r}")
                if not (math.isfinite(w) and w >= 0):
                    raise ValidationError(f"weight for {lang!r} must be finite and >= 0")

    def params_for(self, language_id: str) -> ScalingParams:
        if isinstance(self.params, ScalingParams):
            return self.params
        try:
            return self.params[language_id]
        except KeyError:
            raise ValidationError(f"no scaling params for language {language_id!r}") from None

    def weight_for(self, language_id: str) -> float:
        if self.weights is None:
            return 1.0
        return float(self.weights.get(language_id, 1.0))


@dataclass(frozen=True)
class AllocationPlan:
    languages: tuple[str, ...]
    allocations: tuple[float, ...]
    loss_before: tuple[float, ...]
    loss_after: tuple[float, ...]
    aggregate_before: float
    aggregate_after: float
    total_budget: float
    optimality: str  # "kkt" when the water-filling conditions hold, else "local"

    def as_dict(self) -> dict:
        return {
            "languages": list(self.languages),
            "allocations": {l: a for l, a in zip(self.languages, self.allocations)},
            "loss_before": {l: v for l, v in zip(self.languages, self.loss_before)},
            "loss_after": {l: v for l, v in zip(self.languages, self.loss_after)},
            "aggregate_before": self.aggregate_before,
            "aggregate_after": self.aggregate_after,
            "total_budget": self.total_budget,
            "optimality": self.optimality,
        }


class _Language:
    """Scalar view of one language's loss as a function of added tokens."""

    __slots__ = (
        "id", "weight", "d_base", "gamma", "delta", "lam", "nu",
        "p", "r", "d_floor", "fixed",
    )

    def __init__(self, profile: LanguageProfile, params: ScalingParams, weight: float,
                 model_capacity: float, adapter_capacity: float, floors: SmoothingFloors):
        self.id = profile.id
        self.weight = weight
        self.d_base = profile.data_tokens
        self.gamma = params.gamma
        self.delta = params.delta
        self.lam = params.lambda_dp
        self.nu = params.nu_dr
        self.p = profile.pretrain_repr
        self.r = adapter_capacity
        self.d_floor = floors.d_floor
        # Terms that do not vary with added data.
        p_eff = max(self.p, floors.p_floor)
        self.fixed = (
            params.alpha * model_capacity ** -params.beta
            + params.eta * adapter_capacity ** -params.rho
            + params.kappa * p_eff ** -params.pi_exp
            + params.epsilon
            - params.mu_rp * math.log1p(adapter_capacity * self.p)
        )

    def loss(self, x: float) -> float:
        d = self.d_base + x
        d_eff = max(d, self.d_floor)
        return (
            self.fixed
            + self.gamma * d_eff ** -self.delta
            - self.lam * math.log1p(d * self.p)
            - self.nu * math.log1p(d * self.r)
        )

    def gain(self, x: float) -> tuple[float, float]:
        """Weighted marginal loss reduction per token and its derivative."""
        d = self.d_base + x
        g = 0.0
        gp = 0.0
        if d > self.d_floor and self.gamma > 0:
            t = self.gamma * self.delta * d ** (-self.delta - 1.0)
            g += t
            gp -= t * (self.delta + 1.0) / d
        if self.lam > 0 and self.p > 0:
            denom = 1.0 + d * self.p
            g += self.lam * self.p / denom
            gp -= self.lam * self.p * self.p / (denom * denom)
        if self.nu > 0:
            denom = 1.0 + d * self.r
            g += self.nu * self.r / denom
            gp -= self.nu * self.r * self.r / (denom * denom)
        return self.weight * g, self.weight * gp


def _solve_allocation(lang: _Language, multiplier: float, x_min: float, x_cap: float) -> float:
    """Tokens language `lang` takes when a token is worth `multiplier`:
    the x with gain(x) == multiplier, clipped to [x_min, x_cap]."""
    g_min, _ = lang.gain(x_min)
    if g_min <= multiplier:
        return x_min
    g_cap, _ = lang.gain(x_cap)
    if g_cap >= multiplier:
        return x_cap
    lo, hi = x_min, x_cap
    x = 0.5 * (lo + hi)
    for _ in range(200):
        g, gp = lang.gain(x)
        if g > multiplier:
            lo = x
        else:
            hi = x
        if hi - lo <= 1e-12 * max(1.0, 0.5 * (lo + hi)):
            break
        step = (g - multiplier) / gp if gp < 0 else 0.0
        x_newton = x - step
        x = x_newton if lo < x_newton < hi else 0.5 * (lo + hi)
    return 0.5 * (lo + hi)

def _water_fill(langs: list[_Language], budget: float, x_min: float) -> list[float]:
    """Search the shared marginal value whose induced allocations meet the
    budget (bisection bracket, Newton steps on the dual inside it).
    Returns per-language added tokens, summing exactly to budget."""
    n = len(langs)
    spare = budget - x_min * n
    if spare <= 0:
        return [x_min] * n
    caps = [x_min + spare] * n
    hi = max(lang.gain(x_min)[0] for lang in langs)
    if hi <= 0.0:
        # No language benefits from data: every split is equally good.
        return [x_min + spare / n for _ in langs]

    def allocations(mult: float) -> list[float]:
        return [
            _solve_allocation(lang, mult, x_min, cap) for lang, cap in zip(langs, caps)
        ]

    lo = hi
    for _ in range(1100):
        lo /= 16.0
        if sum(allocations(lo)) >= budget or lo < 1e-320:
            break
    xs = allocations(lo)
    gap = abs(sum(xs) - budget)
    mult = math.sqrt(lo * hi)
    tol = max(1e-9, 1e-14 * budget)
    for _ in range(140):
        xs_try = allocations(mult)
        total = sum(xs_try)
        if total >= budget:
            lo = mult
        else:
            hi = mult
        if abs(total - budget) < gap:
            gap, xs = abs(total - budget), xs_try
        if gap <= tol or hi - lo <= 1e-15 * hi:
            break
        # Newton step on the dual: d(total)/d(mult) = sum of 1/gain' over
        # languages strictly between their bounds.
        slope = 0.0
        for lang, x, cap in zip(langs, xs_try, caps):
            if x_min < x < cap:
                gp = lang.gain(x)[1]
                if gp < 0:
                    slope += 1.0 / gp
        proposal = mult - (total - budget) / slope if slope < 0 else float("nan")
        mult = proposal if lo < proposal < hi else math.sqrt(lo * hi)
    # Close the (tiny) remaining gap exactly, where it distorts the
    # marginal conditions least: extra tokens go to the highest remaining
    # marginal gain, removals hit the lowest-gain slack first.
    residual = budget - sum(xs)
    if residual > 0:
        order = sorted(range(n), key=lambda i: langs[i].gain(xs[i])[0], reverse=True)
        for i in order:
            give = min(residual, caps[i] - xs[i])
            xs[i] += give
            residual -= give
            if residual <= 0:
                break
        if residual > 0:
            xs[order[0]] += residual
    elif residual < 0:
        deficit = -residual
        for i in sorted(range(n), key=lambda i: langs[i].gain(xs[i])[0]):
            slack = xs[i] - x_min
            if deficit >= slack:
                xs[i] = x_min
                deficit -= slack
            else:
                xs[i] -= deficit
                deficit = 0.0
            if deficit <= 0:
                break
    return xs


def _aggregate(langs: list[_Language], xs: Sequence[float]) -> float:
    return sum(lang.weight * lang.loss(x) for lang, x in zip(langs, xs))


def _exchange_improves(langs: list[_Language], xs: list[float], x_min: float) -> bool:
    """True if shifting tokens between some pair lowers the aggregate,
    i.e. the first-order solution is not actually optimal here."""
    total = _aggregate(langs, xs)
    tol = 1e-10 * max(1.0, abs(total))
    budget = sum(xs)
    for h in (1.0, max(1.0, 1e-4 * budget)):
        for i, giver in enumerate(langs):
            if xs[i] - h < x_min:
                continue
            di = langs[i].weight * (langs[i].loss(xs[i] - h) - langs[i].loss(xs[i]))
            for j, taker in enumerate(langs):
                if i == j:
                    continue
                dj = langs[j].weight * (langs[j].loss(xs[j] + h) - langs[j].loss(xs[j]))
                if di + dj < -tol:
                    return True
    return False


def _projected_gradient(langs: list[_Language], xs: list[float], x_min: float,
                        budget: float, iterations: int = 400) -> list[float]:
    """Fallback for non-convex corners: descend the aggregate while staying
    on the budget simplex with per-language lower bounds."""

    def project(v):
        # Project v onto {x : x >= x_min, sum(x) = budget} (shifted simplex).
        shifted = [max(0.0, vi - x_min) for vi in v]
        mass = budget - x_min * len(v)
        u = sorted(shifted, reverse=True)
        css = 0.0
        rho_idx, theta = 0, 0.0
        for k, uk in enumerate(u, start=1):
            css += uk
            t = (css - mass) / k
            if uk - t > 0:
                rho_idx, theta = k, t
        return [x_min + max(0.0, s - theta) for s in shifted]

    x = project(list(xs))
    f = _aggregate(langs, x)
    step = max(1.0, budget / len(langs))
    for _ in range(iterations):
        grad = [-lang.gain(xi)[0] for lang, xi in zip(langs, x)]  # d aggregate / d x_i
        improved = False
        while step > 1e-9:
            trial = project([xi - step * gi for xi, gi in zip(x, grad)])
            f_trial = _aggregate(langs, trial)
            if f_trial < f:
                x, f = trial, f_trial
                step *= 1.3
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    return x


def allocate_data_budget(request: PlanRequest) -> AllocationPlan:
    """Split the token budget across languages to minimize total weighted
    predicted loss. Marginal loss reductions are equalized across all
    languages not pinned at the per-language minimum."""
    langs = [
        _Language(
            profile,
            request.params_for(profile.id),
            request.weight_for(profile.id),
            request.model_capacity,
            request.adapter_capacity,
            request.floors,
        )
        for profile in request.profiles
    ]
    xs = _water_fill(langs, request.total_budget, request.min_per_language)
    optimality = "kkt"
    if _exchange_improves(langs, xs, request.min_per_language):
        xs = _projected_gradient(langs, xs, request.min_per_language, request.total_budget)
        optimality = "local"

    loss_before = tuple(lang.loss(0.0) for lang in langs)
    loss_after = tuple(lang.loss(x) for lang, x in zip(langs, xs))
    aggregate_before = sum(l.weight * v for l, v in zip(langs, loss_before))
    aggregate_after = sum(l.weight * v for l, v in zip(langs, loss_after))
    return AllocationPlan(
        languages=tuple(lang.id for lang in langs),
        allocations=tuple(xs),
        loss_before=loss_before,
        loss_after=loss_after,
        aggregate_before=aggregate_before,
        aggregate_after=min(aggregate_after, aggregate_before),
        total_budget=request.total_budget,
        optimality=optimality,
    )


def select_rank(
    profile: LanguageProfile,
    params: ScalingParams,
    coeffs: ForgettingCoeffs,
    candidates: Sequence[int],
    trade_weight: float = 0.0,
    model_capacity: float = 1e9,
    floors: SmoothingFloors = DEFAULT_FLOORS,
    novelty: float | None = None,
    transfer_support: float = 0.0,
) -> list[tuple[int, float]]:
    """Rank candidate adapter capacities for one language.

    Each candidate is scored as predicted loss plus trade_weight times
    forgetting risk, so trade_weight = 0 orders purely by loss while large
    values favor small, stable adapters. Ties go to the smaller rank.
    """
    if not candidates:
        raise ValidationError("candidates must be nonempty")
    if trade_weight < 0:
        raise ValidationError(f"trade_weight must be >= 0, got {trade_weight}")
    u = default_novelty(profile.pretrain_repr) if novelty is None else novelty
    scored = []
    for rank in candidates:
        inputs = AdaptationInputs(
            model_capacity=model_capacity,
            data_tokens=profile.data_tokens,
            adapter_capacity=float(rank),
            pretrain_repr=profile.pretrain_repr,
        )
        score = interaction_loss(params, inputs, floors)
        if trade_weight > 0:
            risk = forgetting_risk(
                coeffs,
                ForgettingInputs(
                    adapter_capacity=float(rank),
                    data_tokens=profile.data_tokens,
                    pretrain_repr=profile.pretrain_repr,
                    novelty=u,
                    transfer_support=transfer_support,
                ),
                data_transform=log10p1,
            )
            score += trade_weight * risk
        scored.append((int(rank), float(score)))
    return sorted(scored, key=lambda rs: (rs[1], rs[0]))
