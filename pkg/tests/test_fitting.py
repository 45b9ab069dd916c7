import dataclasses

import numpy as np
import pytest

from turkicadapt import (
    AdaptationInputs,
    FitConfig,
    InsufficientDataError,
    Observation,
    ScalingParams,
    SmoothingFloors,
    ValidationError,
    fit_scaling,
    interaction_loss,
    objective_gradient,
    residuals,
    synthesize_observations,
)
from turkicadapt.fitting import (
    BASE_PARAM_ORDER,
    INTERACTION_PARAM_ORDER,
    _Design,
    _objective,
    param_order,
    params_to_vector,
    vector_to_params,
)

EPS_ONLY = ScalingParams(alpha=0.0, beta=1.0, gamma=0.0, delta=1.0, eta=0.0, rho=1.0,
                         kappa=0.0, pi_exp=1.0, epsilon=1.0)


def flat_observations(n, loss):
    return [
        Observation(AdaptationInputs(1e9, 1e6, 16, 0.01), loss)
        for _ in range(n)
    ]


class TestResiduals:
    def test_perfect_fit_is_zero(self, demo_params):
        obs = synthesize_observations(demo_params, n=50, noise_sigma=0.0, seed=1)
        res = residuals(demo_params, obs, fit_interactions=False)
        assert np.max(np.abs(res)) < 1e-12

    def test_eps_only_match(self):
        assert np.all(residuals(EPS_ONLY, flat_observations(5, 1.0)) == 0.0)

    def test_eps_only_offset(self):
        res = residuals(EPS_ONLY, flat_observations(5, 2.0))
        assert np.all(res == -1.0)

    def test_base_predictor_ignores_couplings(self):
        p = dataclasses.replace(EPS_ONLY, lambda_dp=5.0)
        obs = flat_observations(3, 1.0)
        assert np.all(residuals(p, obs, fit_interactions=False) == 0.0)
        assert np.all(residuals(p, obs, fit_interactions=True) < 0.0)

    def test_vectorized_path_matches_scalar_predictor(self, demo_params):
        # The solver's array evaluation and the public scalar loss must agree.
        p = dataclasses.replace(demo_params, lambda_dp=0.001, mu_rp=0.2, nu_dr=0.0004)
        obs = synthesize_observations(p, n=40, noise_sigma=0.05, seed=3)
        res = residuals(p, obs, fit_interactions=True)
        for j, o in enumerate(obs):
            expected = interaction_loss(p, o.inputs) - o.measured_loss
            assert res[j] == pytest.approx(expected, abs=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            residuals(EPS_ONLY, [])


class TestGradient:
    def test_zero_at_perfect_fit(self, demo_params):
        obs = synthesize_observations(demo_params, n=50, noise_sigma=0.0, seed=2)
        grad = objective_gradient(demo_params, obs, fit_interactions=False)
        assert np.max(np.abs(grad)) < 1e-12

    def test_epsilon_coordinate_calculus(self):
        # d MSE / d u_eps = 2 * mean(residual) * epsilon for u = log(epsilon).
        obs = flat_observations(1, 2.0)
        grad = objective_gradient(EPS_ONLY, obs, fit_interactions=False)
        r = 1.0 - 2.0
        expected = 2.0 * r * EPS_ONLY.epsilon
        assert grad[BASE_PARAM_ORDER.index("epsilon")] == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("fit_interactions", [False, True])
    def test_matches_central_finite_differences(self, fit_interactions, demo_params):
        rng = np.random.default_rng(0)
        names = param_order(fit_interactions)
        base = dataclasses.replace(demo_params, lambda_dp=0.001, mu_rp=0.1, nu_dr=0.0002)
        floors = SmoothingFloors()
        worst = 0.0
        for _ in range(20):
            theta = params_to_vector(base, fit_interactions) * np.exp(
                rng.uniform(-0.7, 0.7, size=len(names))
            )
            p = vector_to_params(theta, fit_interactions)
            gen = vector_to_params(
                params_to_vector(base, fit_interactions) * np.exp(rng.uniform(-0.3, 0.3, len(names))),
                fit_interactions,
            )
            obs = [
                Observation(o.inputs, max(1e-3, o.measured_loss + rng.normal(0, 0.05)))
                for o in synthesize_observations(gen, n=20, noise_sigma=0.0,
                                                 seed=int(rng.integers(0, 2**31)))
            ]
            grad = objective_gradient(p, obs, fit_interactions)
            design = _Design.from_observations(obs, floors)
            u = np.log(theta)
            h = 1e-6
            fd = np.zeros_like(u)
            for k in range(len(u)):
                up, um = u.copy(), u.copy()
                up[k] += h
                um[k] -= h
                fd[k] = (_objective(np.exp(up), design, fit_interactions)
                         - _objective(np.exp(um), design, fit_interactions)) / (2 * h)
            rel = np.max(np.abs(grad - fd) / np.maximum(np.maximum(np.abs(grad), np.abs(fd)), 1e-10))
            worst = max(worst, rel)
        assert worst < 1e-5


class TestFit:
    def test_noiseless_recovery_single_seed(self, demo_params):
        obs = synthesize_observations(demo_params, n=200, noise_sigma=0.0, seed=0)
        result = fit_scaling(obs, FitConfig(seed=0))
        assert result.objective < 1e-8
        for name in ("beta", "delta", "rho", "pi_exp"):
            fitted = getattr(result.params, name)
            truth = getattr(demo_params, name)
            assert abs(fitted - truth) / truth <= 0.10

    def test_noisy_mse_near_noise_variance(self, demo_params):
        sigma = 0.01
        obs = synthesize_observations(demo_params, n=500, noise_sigma=sigma, seed=11)
        result = fit_scaling(obs, FitConfig(seed=11))
        assert 0.5 * sigma**2 <= result.objective <= 2.0 * sigma**2

    def test_insufficient_data(self):
        with pytest.raises(InsufficientDataError):
            fit_scaling(flat_observations(3, 1.0), FitConfig())
        with pytest.raises(InsufficientDataError):
            fit_scaling(flat_observations(11, 1.0), FitConfig(fit_interactions=True))

    def test_objective_not_above_any_start(self, demo_params):
        obs = synthesize_observations(demo_params, n=60, noise_sigma=0.1, seed=5)
        result = fit_scaling(obs, FitConfig(seed=5))
        assert result.objective <= min(result.restart_objectives)
        assert result.restart_objectives[result.best_restart] == result.objective

    def test_monotone_descent_trace(self, demo_params):
        obs = synthesize_observations(demo_params, n=80, noise_sigma=0.05, seed=6)
        result = fit_scaling(obs, FitConfig(seed=6))
        trace = np.array(result.objective_trace)
        assert np.all(np.diff(trace) <= 0)

    def test_deterministic(self, demo_params):
        obs = synthesize_observations(demo_params, n=60, noise_sigma=0.02, seed=9)
        a = fit_scaling(obs, FitConfig(seed=9))
        b = fit_scaling(obs, FitConfig(seed=9))
        assert a == b  # bit-identical dataclasses

    def test_explicit_initial_params_used(self, demo_params):
        obs = synthesize_observations(demo_params, n=60, noise_sigma=0.0, seed=4)
        result = fit_scaling(obs, FitConfig(seed=4, restarts=1, initial_params=demo_params))
        assert result.objective < 1e-16

    def test_config_validation(self):
        with pytest.raises(ValidationError):
            FitConfig(max_iterations=0)
        with pytest.raises(ValidationError):
            FitConfig(restarts=0)
        with pytest.raises(ValidationError):
            FitConfig(convergence_tol=0.0)


class TestSynthesize:
    def test_noiseless_residuals_zero(self, demo_params):
        obs = synthesize_observations(demo_params, n=100, noise_sigma=0.0, seed=13)
        assert np.max(np.abs(residuals(demo_params, obs, fit_interactions=True))) < 1e-12

    def test_same_seed_identical(self, demo_params):
        a = synthesize_observations(demo_params, n=50, noise_sigma=0.01, seed=21)
        b = synthesize_observations(demo_params, n=50, noise_sigma=0.01, seed=21)
        assert a == b

    def test_different_seed_differs(self, demo_params):
        a = synthesize_observations(demo_params, n=50, noise_sigma=0.01, seed=21)
        b = synthesize_observations(demo_params, n=50, noise_sigma=0.01, seed=22)
        assert a != b

    def test_noise_mean_near_zero(self, demo_params):
        obs = synthesize_observations(demo_params, n=1000, noise_sigma=0.01, seed=17)
        res = residuals(demo_params, obs, fit_interactions=True)
        assert abs(np.mean(-res)) <= 0.002  # measured - predicted

    def test_inputs_within_documented_ranges(self, demo_params):
        from turkicadapt.fitting import SAMPLING_RANGES

        obs = synthesize_observations(demo_params, n=200, noise_sigma=0.0, seed=1)
        for o in obs:
            x = o.inputs
            lo, hi = SAMPLING_RANGES["model_capacity"]
            assert lo <= x.model_capacity <= hi
            lo, hi = SAMPLING_RANGES["adapter_capacity"]
            assert lo <= x.adapter_capacity <= hi
            assert x.adapter_capacity == int(x.adapter_capacity)

    def test_measured_loss_must_be_positive(self):
        with pytest.raises(ValidationError):
            Observation(AdaptationInputs(1e9, 1e6, 16, 0.01), 0.0)

    def test_param_orders(self):
        assert len(BASE_PARAM_ORDER) == 9
        assert len(INTERACTION_PARAM_ORDER) == 12
        assert INTERACTION_PARAM_ORDER[:9] == BASE_PARAM_ORDER
