"""Language resource profiles: the per-language facts the rest of the toolkit
consumes (pretraining representation, adaptation data volume, script,
orthographic stability) plus resource-regime classification.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator

import yaml

from .errors import ParseError, UnknownLanguageError, ValidationError

__all__ = [
    "Script",
    "Regime",
    "LanguageProfile",
    "ProfileSet",
    "RegimeThresholds",
    "classify_regime",
    "load_profiles",
    "save_profiles",
]


class Script(enum.Enum):
    LATIN = "latin"
    CYRILLIC = "cyrillic"
    MIXED = "mixed"


class Regime(enum.Enum):
    """Qualitative tier of a language's digital data availability."""

    MODERATE = "moderate"
    LOW = "low"
    EXTREME_LOW = "extreme-low"


def _as_number(value, field: str, record: str) -> float:
    # YAML 1.1 reads bare "5e8" as a string; accept it anyway.
    if isinstance(value, bool) or value is None:
        raise ValidationError(f"record {record!r}: field {field!r} must be a number")
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ValidationError(
            f"record {record!r}: field {field!r} must be a number, got {value!r}"
        ) from None


@dataclass(frozen=True)
class LanguageProfile:
    """Resource facts for one language.

    pretrain_repr is the fraction of the base model's pretraining corpus in
    this language (0 allowed; downstream consumers floor it before taking
    negative powers). data_tokens counts adaptation tokens available.
    ortho_stability is 1 for a fully standardized orthography.
    """

    id: str
    name: str
    script: Script
    pretrain_repr: float
    data_tokens: float
    ortho_stability: float

    def __post_init__(self):
        if not self.id or not isinstance(self.id, str):
            raise ValidationError(f"profile id must be a nonempty string, got {self.id!r}")
        if not 0.0 <= self.pretrain_repr <= 1.0:
            raise ValidationError(
                f"record {self.id!r}: pretrain_repr must be in [0, 1], got {self.pretrain_repr}"
            )
        if self.data_tokens < 0:
            raise ValidationError(
                f"record {self.id!r}: data_tokens must be >= 0, got {self.data_tokens}"
            )
        if not 0.0 <= self.ortho_stability <= 1.0:
            raise ValidationError(
                f"record {self.id!r}: ortho_stability must be in [0, 1], got {self.ortho_stability}"
            )


@dataclass(frozen=True)
class ProfileSet:
    """Ordered, duplicate-free collection of language profiles."""

    profiles: tuple[LanguageProfile, ...]

    def __post_init__(self):
        object.__setattr__(self, "profiles", tuple(self.profiles))
        if not self.profiles:
            raise ValidationError("a ProfileSet must contain at least one profile")
        seen = set()
        for p in self.profiles:
            if p.id in seen:
                raise ValidationError(f"duplicate profile id {p.id!r}")
            seen.add(p.id)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(p.id for p in self.profiles)

    def get(self, language_id: str) -> LanguageProfile:
        for p in self.profiles:
            if p.id == language_id:
                return p
        raise UnknownLanguageError(f"unknown language id {language_id!r}")

    def __iter__(self) -> Iterator[LanguageProfile]:
        return iter(self.profiles)

    def __len__(self) -> int:
        return len(self.profiles)

    def __contains__(self, language_id: str) -> bool:
        return any(p.id == language_id for p in self.profiles)


@dataclass(frozen=True)
class RegimeThresholds:
    """Token-count boundaries between resource regimes.

    The tiers themselves are qualitative; these defaults are a working
    convention and both bounds are meant to be overridden per study.
    """

    moderate_min_tokens: float = 1e8
    low_min_tokens: float = 1e6

    def __post_init__(self):
        if not self.moderate_min_tokens > self.low_min_tokens > 0:
            raise ValidationError(
                "thresholds must satisfy moderate_min_tokens > low_min_tokens > 0, "
                f"got {self.moderate_min_tokens}, {self.low_min_tokens}"
            )


def classify_regime(
    profile: LanguageProfile, thresholds: RegimeThresholds = RegimeThresholds()
) -> Regime:
    """Bucket a language by adaptation data volume. Boundaries classify upward."""
    if profile.data_tokens >= thresholds.moderate_min_tokens:
        return Regime.MODERATE
    if profile.data_tokens >= thresholds.low_min_tokens:
        return Regime.LOW
    return Regime.EXTREME_LOW


_PROFILE_FIELDS = ("id", "name", "script", "pretrain_repr", "data_tokens", "ortho_stability")


def _profile_from_record(record, index: int) -> LanguageProfile:
    if not isinstance(record, dict):
        raise ParseError(f"language record #{index} is not a mapping: {record!r}")
    label = record.get("id", f"#{index}")
    missing = [k for k in _PROFILE_FIELDS if k not in record]
    if missing:
        raise ValidationError(f"record {label!r}: missing fields {missing}")
    extra = [k for k in record if k not in _PROFILE_FIELDS]
    if extra:
        raise ValidationError(f"record {label!r}: unknown fields {extra}")
    script_raw = str(record["script"]).lower()
    try:
        script = Script(script_raw)
    except ValueError:
        raise ValidationError(
            f"record {label!r}: script must be one of "
            f"{[s.value for s in Script]}, got {record['script']!r}"
        ) from None
    return LanguageProfile(
        id=str(record["id"]),
        name=str(record["name"]),
        script=script,
        pretrain_repr=_as_number(record["pretrain_repr"], "pretrain_repr", str(label)),
        data_tokens=_as_number(record["data_tokens"], "data_tokens", str(label)),
        ortho_stability=_as_number(record["ortho_stability"], "ortho_stability", str(label)),
    )


def load_profiles(path) -> ProfileSet:
    """Read a profile document (YAML, ``languages:`` list of records).

    Raises ParseError for malformed documents and ValidationError for
    records that violate field invariants or duplicate an id; both name
    the offending record.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ParseError(f"{path}: not valid YAML: {exc}") from exc
    if not isinstance(doc, dict) or "languages" not in doc:
        raise ParseError(f"{path}: expected a mapping with a 'languages' list")
    records = doc["languages"]
    if not isinstance(records, list):
        raise ParseError(f"{path}: 'languages' must be a list of records")
    profiles = [_profile_from_record(rec, i) for i, rec in enumerate(records)]
    return ProfileSet(tuple(profiles))


def save_profiles(profile_set: ProfileSet, path) -> None:
    """Write a profile document that load_profiles reads back identically."""
    records = [
        {
            "id": p.id,
            "name": p.name,
            "script": p.script.value,
            "pretrain_repr": p.pretrain_repr,
            "data_tokens": p.data_tokens,
            "ortho_stability": p.ortho_stability,
        }
        for p in profile_set
    ]
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump({"languages": records}, fh, sort_keys=False)
