"""turkicadapt: planning toolkit for parameter-efficient LLM adaptation
across related low-resource languages.

Core pieces: the adaptation loss law and its least-squares fitter, the
Turkic Transfer Coefficient and derived linguistic distances, cross-lingual
transfer efficiency, logistic forgetting risk, and a water-filling data
budget planner. A curated five-language Turkic dataset ships in
``turkicadapt.data``.
"""

from .errors import (
    InfeasibleBudgetError,
    InsufficientDataError,
    MissingPairError,
    NonFiniteObjectiveError,
    ParseError,
    TurkicAdaptError,
    UnknownLanguageError,
    ValidationError,
)
from .fitting import (
    FitConfig,
    FitResult,
    Observation,
    fit_scaling,
    objective_gradient,
    residuals,
    synthesize_observations,
)
from .forgetting import (
    ForgettingCoeffs,
    ForgettingInputs,
    derive_transfer_support,
    forgetting_risk,
    logistic,
)
from .planner import AllocationPlan, PlanRequest, allocate_data_budget, select_rank
from .profiles import (
    LanguageProfile,
    ProfileSet,
    Regime,
    RegimeThresholds,
    Script,
    classify_regime,
    load_profiles,
    save_profiles,
)
from .scaling import (
    AdaptationInputs,
    ScalingParams,
    SmoothingFloors,
    apply_low_rank_update,
    base_loss,
    fertility,
    interaction_loss,
    lora_param_count,
    regime_loss,
)
from .transfer import (
    CTEConfig,
    TransferObservation,
    cte_distance_aware,
    cte_measured,
    cte_predicted,
)
from .ttc import (
    DEFAULT_WEIGHTS,
    PairComponents,
    TTCMatrix,
    TTCWeights,
    distance,
    load_pair_components,
    ttc_matrix,
    ttc_pair,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptationInputs",
    "AllocationPlan",
    "CTEConfig",
    "DEFAULT_WEIGHTS",
    "FitConfig",
    "FitResult",
    "ForgettingCoeffs",
    "ForgettingInputs",
    "InfeasibleBudgetError",
    "InsufficientDataError",
    "LanguageProfile",
    "MissingPairError",
    "NonFiniteObjectiveError",
    "Observation",
    "PairComponents",
    "ParseError",
    "PlanRequest",
    "ProfileSet",
    "Regime",
    "RegimeThresholds",
    "ScalingLawModel",
    "ScalingParams",
    "Script",
    "SmoothingFloors",
    "TTCMatrix",
    "TTCWeights",
    "TransferObservation",
    "TurkicAdaptError",
    "UnknownLanguageError",
    "ValidationError",
    "allocate_data_budget",
    "apply_low_rank_update",
    "base_loss",
    "classify_regime",
    "cte_distance_aware",
    "cte_measured",
    "cte_predicted",
    "derive_transfer_support",
    "distance",
    "fertility",
    "fit_scaling",
    "forgetting_risk",
    "interaction_loss",
    "load_pair_components",
    "load_profiles",
    "logistic",
    "lora_param_count",
    "objective_gradient",
    "regime_loss",
    "residuals",
    "save_profiles",
    "select_rank",
    "synthesize_observations",
    "ttc_matrix",
    "ttc_pair",
]


def __getattr__(name):
    # ScalingLawModel pulls in scikit-learn; import it only when asked for
    # so the CLI keeps its fast startup.
    if name == "ScalingLawModel":
        from .estimator import ScalingLawModel

        return ScalingLawModel
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
