"""Shipped datasets: the five-language Turkic demo set.

Files live next to this module; the helpers below return filesystem paths
and parsed objects so callers need not deal with package resources.
"""

from importlib import resources

from ..profiles import ProfileSet, load_profiles
from ..ttc import PairComponents, TTCWeights, load_pair_components

__all__ = [
    "profiles_path",
    "pair_components_path",
    "weights_path",
    "turkic_profiles",
    "turkic_pair_components",
    "turkic_weights",
]


def _path(name: str):
    return resources.files(__package__).joinpath(name)


def profiles_path():
    return _path("turkic_profiles.yaml")


def pair_components_path():
    return _path("turkic_pair_components.yaml")


def weights_path():
    return _path("turkic_weights.yaml")


def turkic_profiles() -> ProfileSet:
    return load_profiles(profiles_path())


def turkic_pair_components() -> dict[tuple[str, str], PairComponents]:
    return load_pair_components(pair_components_path())


def turkic_weights() -> TTCWeights:
    import yaml

    with open(weights_path(), "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    return TTCWeights(**doc["ttc_weights"])
