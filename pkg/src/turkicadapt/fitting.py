"""Estimation of loss-law constants from observed (inputs -> loss) samples.

The solver is a damped Gauss-Newton (Levenberg-Marquardt) iteration on the
mean squared residual. Every constant is positive by contract, so the
optimizer works on u = log(theta) and exponentiates back: the feasible set
becomes all of R^p and no bound handling is needed. When the damped normal
equations are too ill-conditioned to trust, the step falls back to plain
gradient descent with backtracking. Multiple restarts (one heuristic start
plus log-uniform random draws) guard against local minima; the winner is
the lowest final objective, ties broken by restart index, which makes the
whole fit deterministic for a given seed.

Free parameters, in canonical order:

    alpha, beta, gamma, delta, eta, rho, kappa, pi_exp, epsilon
    [, lambda_dp, mu_rp, nu_dr]          (with fit_interactions)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InsufficientDataError, NonFiniteObjectiveError, ValidationError
from .scaling import DEFAULT_FLOORS, AdaptationInputs, ScalingParams, SmoothingFloors

__all__ = [
    "Observation",
    "FitConfig",
    "FitResult",
    "BASE_PARAM_ORDER",
    "INTERACTION_PARAM_ORDER",
    "residuals",
    "objective_gradient",
    "fit_scaling",
    "synthesize_observations",
    "SAMPLING_RANGES",
]

BASE_PARAM_ORDER = (
    "alpha",
    "beta",
    "gamma",
    "delta",
    "eta",
    "rho",
    "kappa",
    "pi_exp",
    "epsilon",
)
INTERACTION_PARAM_ORDER = BASE_PARAM_ORDER + ("lambda_dp", "mu_rp", "nu_dr")

# Log-uniform input sampling ranges used by synthesize_observations.
SAMPLING_RANGES = {
    "model_capacity": (1e8, 1e11),
    "data_tokens": (1e4, 1e10),
    "adapter_capacity": (4, 256),  # rounded to integer ranks
    "pretrain_repr": (1e-6, 0.05),
}

# Random-restart draw ranges (log-uniform), per parameter kind.
_RESTART_COEFF_RANGE = (1e-3, 1e3)
_RESTART_EXPONENT_RANGE = (0.05, 2.0)

_COND_LIMIT = 1e12
_DAMPING_INIT = 1e-3
_DAMPING_GROW = 2.0
_DAMPING_SHRINK = 1.0 / 3.0
_DAMPING_MAX = 1e16
# Box on u = log(theta). exp(200) ~ 7e86 is far beyond any meaningful
# constant; clamping there keeps every term and Jacobian entry finite
# without constraining the optimization in practice.
_U_BOUND = 200.0


@dataclass(frozen=True)
class Observation:
    """One measured adaptation outcome."""

    inputs: AdaptationInputs
    measured_loss: float

    def __post_init__(self):
        if not (np.isfinite(self.measured_loss) and self.measured_loss > 0):
            raise ValidationError(
                f"measured_loss must be finite and positive, got {self.measured_loss}"
            )


@dataclass(frozen=True)
class FitConfig:
    max_iterations: int = 500
    convergence_tol: float = 1e-10
    initial_params: ScalingParams | None = None
    fit_interactions: bool = False
    seed: int = 0
    restarts: int = 8
    floors: SmoothingFloors = DEFAULT_FLOORS

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValidationError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.restarts < 1:
            raise ValidationError(f"restarts must be >= 1, got {self.restarts}")
        if not self.convergence_tol > 0:
            raise ValidationError(f"convergence_tol must be > 0, got {self.convergence_tol}")


@dataclass(frozen=True)
class FitResult:
    params: ScalingParams
    objective: float
    iterations: int
    converged: bool
    best_restart: int
    restart_objectives: tuple[float, ...]
    objective_trace: tuple[float, ...]


def param_order(fit_interactions: bool) -> tuple[str, ...]:
    return INTERACTION_PARAM_ORDER if fit_interactions else BASE_PARAM_ORDER


def params_to_vector(params: ScalingParams, fit_interactions: bool) -> np.ndarray:
    return np.array([getattr(params, name) for name in param_order(fit_interactions)])


def vector_to_params(theta: np.ndarray, fit_interactions: bool) -> ScalingParams:
    values = dict(zip(param_order(fit_interactions), (float(v) for v in theta)))
    return ScalingParams(**values)


class _Design:
    """Precomputed per-observation arrays for vectorized evaluation."""

    def __init__(
        self,
        inputs: Sequence[AdaptationInputs],
        y: np.ndarray | None,
        floors: SmoothingFloors,
    ):
        if not len(inputs):
            raise ValidationError("need at least one observation")
        m = np.array([x.model_capacity for x in inputs], dtype=float)
        d = np.array([x.data_tokens for x in inputs], dtype=float)
        r = np.array([x.adapter_capacity for x in inputs], dtype=float)
        p = np.array([x.pretrain_repr for x in inputs], dtype=float)
        self.y = None if y is None else np.asarray(y, dtype=float)
        self.log_m = np.log(m)
        self.log_d_eff = np.log(np.maximum(d, floors.d_floor))
        self.log_r = np.log(r)
        self.log_p_eff = np.log(np.maximum(p, floors.p_floor))
        # Coupling logs use the raw values; log1p is regular at zero.
        self.l_dp = np.log1p(d * p)
        self.l_rp = np.log1p(r * p)
        self.l_dr = np.log1p(d * r)
        self.n = len(inputs)

    @classmethod
    def from_observations(cls, obs: Sequence[Observation], floors: SmoothingFloors) -> "_Design":
        return cls([o.inputs for o in obs], [o.measured_loss for o in obs], floors)


def _terms(theta: np.ndarray, design: _Design) -> tuple[np.ndarray, ...]:
    alpha, beta, gamma, delta, eta, rho, kappa, pi_exp, epsilon = theta[:9]
    with np.errstate(over="ignore", invalid="ignore"):
        term_m = alpha * np.exp(-beta * design.log_m)
        term_d = gamma * np.exp(-delta * design.log_d_eff)
        term_r = eta * np.exp(-rho * design.log_r)
        term_p = kappa * np.exp(-pi_exp * design.log_p_eff)
    return term_m, term_d, term_r, term_p


def _predict(theta: np.ndarray, design: _Design, fit_interactions: bool) -> np.ndarray:
    term_m, term_d, term_r, term_p = _terms(theta, design)
    pred = term_m + term_d + term_r + term_p + theta[8]
    if fit_interactions:
        lam, mu, nu = theta[9:12]
        pred = pred - lam * design.l_dp - mu * design.l_rp - nu * design.l_dr
    return pred


def residuals(
    params: ScalingParams,
    obs: Sequence[Observation],
    fit_interactions: bool = False,
    floors: SmoothingFloors = DEFAULT_FLOORS,
) -> np.ndarray:
    """Predicted minus measured loss, one entry per observation.

    The predictor is the coupled form when fit_interactions is set and the
    plain power-law form otherwise (coupling weights are ignored then).
    """
    design = _Design.from_observations(obs, floors)
    theta = params_to_vector(params, fit_interactions)
    return _predict(theta, design, fit_interactions) - design.y


def _jacobian_u(theta: np.ndarray, design: _Design, fit_interactions: bool):
    """Predictions and the Jacobian of predictions w.r.t. u = log(theta).

    d pred / d u_k = (d pred / d theta_k) * theta_k, which for each
    power-law term is the term itself (coefficient) or the term scaled by
    -exponent*log(input) (exponent).
    """
    term_m, term_d, term_r, term_p = _terms(theta, design)
    beta, delta, rho, pi_exp = theta[1], theta[3], theta[5], theta[7]
    epsilon = theta[8]
    pred = term_m + term_d + term_r + term_p + epsilon
    cols = [
        term_m,
        -term_m * beta * design.log_m,
        term_d,
        -term_d * delta * design.log_d_eff,
        term_r,
        -term_r * rho * design.log_r,
        term_p,
        -term_p * pi_exp * design.log_p_eff,
        np.full(design.n, epsilon),
    ]
    if fit_interactions:
        lam, mu, nu = theta[9:12]
        pred = pred - lam * design.l_dp - mu * design.l_rp - nu * design.l_dr
        cols.extend([-lam * design.l_dp, -mu * design.l_rp, -nu * design.l_dr])
    return pred, np.column_stack(cols)


def _objective(theta: np.ndarray, design: _Design, fit_interactions: bool) -> float:
    res = _predict(theta, design, fit_interactions) - design.y
    with np.errstate(over="ignore", invalid="ignore"):
        return float(np.mean(res * res))


def objective_gradient(
    params: ScalingParams,
    obs: Sequence[Observation],
    fit_interactions: bool = False,
    floors: SmoothingFloors = DEFAULT_FLOORS,
) -> np.ndarray:
    """Analytic gradient of the mean squared residual with respect to the
    log-reparameterized vector u, in canonical parameter order."""
    design = _Design.from_observations(obs, floors)
    theta = params_to_vector(params, fit_interactions)
    pred, jac = _jacobian_u(theta, design, fit_interactions)
    res = pred - design.y
    return (2.0 / design.n) * (jac.T @ res)


def _gradient_fallback_step(u, f, grad, design, fit_interactions):
    """Backtracking descent along -grad; returns (u_new, f_new) or None."""
    if not np.all(np.isfinite(grad)):
        return None
    step = 1.0 / max(1.0, float(np.linalg.norm(grad)))
    for _ in range(60):
        u_try = np.clip(u - step * grad, -_U_BOUND, _U_BOUND)
        f_try = _objective(np.exp(u_try), design, fit_interactions)
        if np.isfinite(f_try) and f_try < f:
            return u_try, f_try
        step *= 0.5
    return None


def _minimize_from(u0: np.ndarray, design: _Design, cfg: FitConfig):
    """Run one damped Gauss-Newton descent from u0.

    Returns (u, objective, iterations, converged, trace). Only steps that
    strictly decrease the objective are accepted, so the trace is monotone
    by construction.
    """
    fit_interactions = cfg.fit_interactions
    u = np.clip(u0, -_U_BOUND, _U_BOUND)
    f = _objective(np.exp(u), design, fit_interactions)
    if not np.isfinite(f):
        with np.errstate(over="ignore", invalid="ignore"):
            res = _predict(np.exp(u), design, fit_interactions) - design.y
        finite = np.isfinite(res)
        bad = int(np.flatnonzero(~finite)[0]) if not finite.all() else int(np.argmax(np.abs(res)))
        raise NonFiniteObjectiveError(
            f"objective is non-finite at the starting point (observation index {bad})"
        )
    damping = _DAMPING_INIT
    trace = [f]
    iterations = 0
    converged = False
    for _ in range(cfg.max_iterations):
        iterations += 1
        theta = np.exp(u)
        with np.errstate(over="ignore", invalid="ignore"):
            pred, jac = _jacobian_u(theta, design, fit_interactions)
            res = pred - design.y
            normal = jac.T @ jac
            grad_half = jac.T @ res  # (n/2) * gradient of MSE
        if not np.all(np.isfinite(normal)):
            break
        scale = np.maximum(np.diag(normal), 1e-10 * max(1.0, float(np.max(np.diag(normal)))))
        accepted = None
        while damping <= _DAMPING_MAX:
            damped = normal + damping * np.diag(scale)
            if np.linalg.cond(damped) > _COND_LIMIT:
                damping *= _DAMPING_GROW
                continue
            step = np.linalg.solve(damped, -grad_half)
            u_try = np.clip(u + step, -_U_BOUND, _U_BOUND)
            f_try = _objective(np.exp(u_try), design, fit_interactions)
            if np.isfinite(f_try) and f_try < f:
                accepted = (u_try, f_try)
                damping = max(damping * _DAMPING_SHRINK, 1e-14)
                break
            damping *= _DAMPING_GROW
        if accepted is None:
            # Normal equations unusable at every damping level (or no
            # Gauss-Newton descent exists): try plain gradient descent.
            accepted = _gradient_fallback_step(
                u, f, (2.0 / design.n) * grad_half, design, fit_interactions
            )
            damping = _DAMPING_INIT
        if accepted is None:
            break  # no descent step found in any direction: stationary enough
        u_new, f_new = accepted
        rel_drop = (f - f_new) / max(f, 1e-300)
        u, f = u_new, f_new
        trace.append(f)
        if rel_drop < cfg.convergence_tol:
            converged = True
            break
    if not converged and iterations < cfg.max_iterations:
        # Stalled: no further strictly-decreasing step exists at any damping.
        converged = True
    return u, f, iterations, converged, trace


def _heuristic_start(design: _Design, fit_interactions: bool) -> np.ndarray:
    values = {name: 0.1 for name in param_order(fit_interactions)}
    for name in ("beta", "delta", "rho", "pi_exp"):
        values[name] = 0.5
    values["epsilon"] = 0.5 * float(np.min(design.y))
    return np.array([values[name] for name in param_order(fit_interactions)])


def _project_coefficients(theta: np.ndarray, design: _Design, fit_interactions: bool) -> np.ndarray:
    """Rescale the linear parameters of a start point to their least-squares
    values given its exponents. Power-law coefficients span many decades
    depending on the exponent next to them, so a random draw is almost
    always orders of magnitude off; one linear solve fixes the scales and
    leaves the descent with mostly the exponents to refine."""
    beta, delta, rho, pi_exp = theta[1], theta[3], theta[5], theta[7]
    columns = [
        np.exp(-beta * design.log_m),
        np.exp(-delta * design.log_d_eff),
        np.exp(-rho * design.log_r),
        np.exp(-pi_exp * design.log_p_eff),
        np.ones(design.n),
    ]
    if fit_interactions:
        columns.extend([-design.l_dp, -design.l_rp, -design.l_dr])
    phi = np.column_stack(columns)
    coef, *_ = np.linalg.lstsq(phi, design.y, rcond=None)
    floor = 1e-8 * max(1.0, float(np.max(np.abs(coef))))
    coef = np.maximum(coef, floor)  # positivity: clip, this is only a start point
    out = theta.copy()
    out[[0, 2, 4, 6, 8]] = coef[:5]
    if fit_interactions:
        out[[9, 10, 11]] = coef[5:]
    return out


def _random_start(rng: np.random.Generator, design: _Design, fit_interactions: bool) -> np.ndarray:
    def log_uniform(lo, hi):
        return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))

    values = {}
    for name in param_order(fit_interactions):
        if name in ("beta", "delta", "rho", "pi_exp"):
            values[name] = log_uniform(*_RESTART_EXPONENT_RANGE)
        elif name == "epsilon":
            y_min, y_max = float(np.min(design.y)), float(np.max(design.y))
            values[name] = log_uniform(1e-3 * y_min, max(y_max, 2e-3 * y_min))
        else:
            values[name] = log_uniform(*_RESTART_COEFF_RANGE)
    theta = np.array([values[name] for name in param_order(fit_interactions)])
    return _project_coefficients(theta, design, fit_interactions)


def fit_scaling(obs: Sequence[Observation], cfg: FitConfig = FitConfig()) -> FitResult:
    """Fit the loss-law constants to observations by least squares.

    Needs at least as many observations as free parameters (9 for the
    plain form, 12 with couplings). The returned objective is the plain
    MSE on loss values; pre-transform the data if a log-scale fit is
    wanted.
    """
    n_free = len(param_order(cfg.fit_interactions))
    if len(obs) < n_free:
        raise InsufficientDataError(
            f"need at least {n_free} observations to fit {n_free} parameters, got {len(obs)}"
        )
    design = _Design.from_observations(obs, cfg.floors)
    rng = np.random.default_rng(cfg.seed)

    starts = []
    if cfg.initial_params is not None:
        starts.append(params_to_vector(cfg.initial_params, cfg.fit_interactions))
    else:
        starts.append(_heuristic_start(design, cfg.fit_interactions))
    while len(starts) < cfg.restarts:
        starts.append(_random_start(rng, design, cfg.fit_interactions))

    best = None
    restart_objectives = []
    for index, theta0 in enumerate(starts):
        u0 = np.log(theta0)
        u, f, iterations, converged, trace = _minimize_from(u0, design, cfg)
        restart_objectives.append(f)
        candidate = (f, index, u, iterations, converged, trace)
        if best is None or (f, index) < (best[0], best[1]):
            best = candidate

    f, index, u, iterations, converged, trace = best
    return FitResult(
        params=vector_to_params(np.exp(u), cfg.fit_interactions),
        objective=f,
        iterations=iterations,
        converged=converged,
        best_restart=index,
        restart_objectives=tuple(restart_objectives),
        objective_trace=tuple(trace),
    )


def synthesize_observations(
    true_params: ScalingParams,
    n: int,
    noise_sigma: float = 0.0,
    seed: int = 0,
    floors: SmoothingFloors = DEFAULT_FLOORS,
) -> list[Observation]:
    """Generate observations from known constants, for fit verification.

    Inputs are drawn log-uniformly over SAMPLING_RANGES (adapter ranks are
    rounded to integers); losses come from the coupled predictor plus
    optional Gaussian noise. Deterministic for a given seed. Losses are
    computed through the scalar predictor in the scaling module, a
    separate code path from the solver's vectorized one.
    """
    from .scaling import interaction_loss

    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    if noise_sigma < 0:
        raise ValidationError(f"noise_sigma must be >= 0, got {noise_sigma}")
    rng = np.random.default_rng(seed)

    def draw(lo, hi):
        return np.exp(rng.uniform(np.log(lo), np.log(hi), size=n))

    m = draw(*SAMPLING_RANGES["model_capacity"])
    d = draw(*SAMPLING_RANGES["data_tokens"])
    r_lo, r_hi = SAMPLING_RANGES["adapter_capacity"]
    r = np.clip(np.rint(draw(r_lo, r_hi)), r_lo, r_hi)
    p = draw(*SAMPLING_RANGES["pretrain_repr"])
    noise = rng.normal(0.0, noise_sigma, size=n) if noise_sigma > 0 else np.zeros(n)

    observations = []
    for i in range(n):
        inputs = AdaptationInputs(
            model_capacity=float(m[i]),
            data_tokens=float(d[i]),
            adapter_capacity=float(r[i]),
            pretrain_repr=float(p[i]),
        )
        observations.append(
            Observation(inputs, interaction_loss(true_params, inputs, floors) + float(noise[i]))
        )
    return observations
