"""Scikit-learn estimator wrapper around the loss-law fitter, so the model
drops into pipelines, grid searches, and cross-validation like any other
regressor.

Feature matrix layout (one row per observation, columns in this order):

    model_capacity, data_tokens, adapter_capacity, pretrain_repr

Targets are the measured losses.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_array, check_X_y

from .fitting import FitConfig, Observation, fit_scaling, params_to_vector, _Design, _predict
from .scaling import AdaptationInputs, ScalingParams, SmoothingFloors

__all__ = ["ScalingLawModel", "FEATURE_NAMES"]

FEATURE_NAMES = ("model_capacity", "data_tokens", "adapter_capacity", "pretrain_repr")


class ScalingLawModel(RegressorMixin, BaseEstimator):
    """Least-squares loss-law regressor with the scikit-learn estimator API.

    Parameters mirror FitConfig; after fit() the estimated constants are
    available as ``params_`` (a ScalingParams) and the full solver output
    as ``result_``.
    """

    def __init__(
        self,
        fit_interactions: bool = False,
        restarts: int = 8,
        max_iterations: int = 500,
        convergence_tol: float = 1e-10,
        seed: int = 0,
        initial_params: ScalingParams | None = None,
        d_floor: float = 1.0,
        p_floor: float = 1e-6,
    ):
        self.fit_interactions = fit_interactions
        self.restarts = restarts
        self.max_iterations = max_iterations
        self.convergence_tol = convergence_tol
        self.seed = seed
        self.initial_params = initial_params
        self.d_floor = d_floor
        self.p_floor = p_floor

    def _floors(self) -> SmoothingFloors:
        return SmoothingFloors(d_floor=self.d_floor, p_floor=self.p_floor)

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_2d=True, dtype=float)
        if X.shape[1] != 4:
            raise ValueError(
                f"X must have exactly 4 columns {FEATURE_NAMES}, got {X.shape[1]}"
            )
        obs = [
            Observation(AdaptationInputs(*map(float, row)), float(target))
            for row, target in zip(X, y)
        ]
        config = FitConfig(
            max_iterations=self.max_iterations,
            convergence_tol=self.convergence_tol,
            initial_params=self.initial_params,
            fit_interactions=self.fit_interactions,
            seed=self.seed,
            restarts=self.restarts,
            floors=self._floors(),
        )
        result = fit_scaling(obs, config)
        self.result_ = result
        self.params_ = result.params
        self.n_features_in_ = 4
        return self

    def predict(self, X):
        if not hasattr(self, "params_"):
            raise NotFittedError("this ScalingLawModel is not fitted yet; call fit first")
        X = check_array(X, ensure_2d=True, dtype=float)
        if X.shape[1] != 4:
            raise ValueError(
                f"X must have exactly 4 columns {FEATURE_NAMES}, got {X.shape[1]}"
            )
        inputs = [AdaptationInputs(*map(float, row)) for row in X]
        design = _Design(inputs, None, self._floors())
        theta = params_to_vector(self.params_, self.fit_interactions)
        return _predict(theta, design, self.fit_interactions)
