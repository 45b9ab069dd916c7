"""Turkic Transfer Coefficient: a weighted typological-similarity score for
ordered language pairs, family-level score matrices, and the linguistic
distance derived from them.

The score for a pair combines morphological similarity, lexical overlap,
syntactic similarity, and script compatibility (weights summing to one)
minus a weighted orthographic-instability penalty:

    score = w_m*M + w_l*L + w_s*S + w_r*R - w_o*O

Each component lives in [0, 1]. A self-pair has all similarities 1 and no
penalty, so its score is exactly 1 for any valid weights. Scores can go
negative when the penalty dominates; they are reported as-is, not clamped.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
import yaml

from .errors import MissingPairError, ParseError, UnknownLanguageError, ValidationError

__all__ = [
    "PairComponents",
    "TTCWeights",
    "TTCMatrix",
    "ttc_pair",
    "ttc_matrix",
    "distance",
    "load_pair_components",
    "DEFAULT_WEIGHTS",
]

_WEIGHT_SUM_TOL = 1e-9


@dataclass(frozen=True)
class PairComponents:
    """The five ingredients of a pair score, each in [0, 1]."""

    morph_sim: float
    lex_overlap: float
    syn_sim: float
    script_compat: float
    ortho_penalty: float

    def __post_init__(self):
        for field in ("morph_sim", "lex_overlap", "syn_sim", "script_compat", "ortho_penalty"):
            value = getattr(self, field)
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"{field} must be in [0, 1], got {value}")

    @classmethod
    def self_pair(cls) -> "PairComponents":
        """Components of a language paired with itself."""
        return cls(1.0, 1.0, 1.0, 1.0, 0.0)


@dataclass(frozen=True)
class TTCWeights:
    """Component weights. The four similarity weights must sum to 1; the
    penalty weight w_o is separate so that a self-pair always scores 1."""

    w_m: float
    w_l: float
    w_s: float
    w_r: float
    w_o: float = 0.1

    def __post_init__(self):
        for field in ("w_m", "w_l", "w_s", "w_r", "w_o"):
            if getattr(self, field) < 0:
                raise ValidationError(f"{field} must be nonnegative")
        total = self.w_m + self.w_l + self.w_s + self.w_r
        if abs(total - 1.0) > _WEIGHT_SUM_TOL:
            raise ValidationError(
                f"similarity weights must sum to 1 (got {total!r}); w_o is not included"
            )


DEFAULT_WEIGHTS = TTCWeights(w_m=0.3, w_l=0.25, w_s=0.25, w_r=0.2, w_o=0.1)


def ttc_pair(components: PairComponents, weights: TTCWeights = DEFAULT_WEIGHTS) -> float:
    """Score one ordered pair: weighted similarities minus weighted penalty."""
    c, w = components, weights
    return (
        w.w_m * c.morph_sim
        + w.w_l * c.lex_overlap
        + w.w_s * c.syn_sim
        + w.w_r * c.script_compat
        - w.w_o * c.ortho_penalty
    )


@dataclass(frozen=True)
class TTCMatrix:
    """Square matrix of pair scores over an ordered language list.

    Row index is the source language, column index the target. The
    diagonal is exactly 1 by the self-pair convention.
    """

    languages: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "languages", tuple(self.languages))
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        n = len(self.languages)
        if values.shape != (n, n):
            raise ValidationError(
                f"matrix shape {values.shape} does not match {n} languages"
            )
        if n != len(set(self.languages)):
            raise ValidationError("duplicate language ids in matrix")
        if not np.all(np.diag(values) == 1.0):
            raise ValidationError("matrix diagonal must be exactly 1.0")
        if np.any(values > 1.0 + 1e-12):
            raise ValidationError("matrix entries cannot exceed 1")
        values.setflags(write=False)

    def index(self, language_id: str) -> int:
        try:
            return self.languages.index(language_id)
        except ValueError:
            raise UnknownLanguageError(f"unknown language id {language_id!r}") from None

    def score(self, source: str, target: str) -> float:
        return float(self.values[self.index(source), self.index(target)])

    def to_json_dict(self) -> dict:
        """JSON form: ids plus row-major values."""
        return {
            "languages": list(self.languages),
            "values": [float(v) for v in self.values.ravel(order="C")],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "TTCMatrix":
        try:
            languages = tuple(str(x) for x in doc["languages"])
            flat = [float(v) for v in doc["values"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"not a valid matrix document: {exc}") from exc
        n = len(languages)
        if len(flat) != n * n:
            raise ParseError(f"expected {n * n} values for {n} languages, got {len(flat)}")
        return cls(languages, np.array(flat).reshape(n, n))

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    def to_csv_text(self) -> str:
        """CSV form with a header row and leading id column."""
        lines = ["," + ",".join(self.languages)]
        for lang, row in zip(self.languages, self.values):
            lines.append(lang + "," + ",".join(repr(float(v)) for v in row))
        return "\n".join(lines) + "\n"


def ttc_matrix(
    pairs: Mapping[tuple[str, str], PairComponents],
    weights: TTCWeights,
    languages: Sequence[str],
) -> TTCMatrix:
    """Assemble the full score matrix for a language list.

    Components must be supplied for every ordered pair of distinct
    languages; the diagonal comes from the self-pair convention.
    """
    languages = tuple(languages)
    missing = [
        (s, t)
        for s in languages
        for t in languages
        if s != t and (s, t) not in pairs
    ]
    if missing:
        raise MissingPairError(missing)
    n = len(languages)
    values = np.ones((n, n))
    for i, s in enumerate(languages):
        for j, t in enumerate(languages):
            if i != j:
                values[i, j] = ttc_pair(pairs[(s, t)], weights)
    return TTCMatrix(languages, values)


def distance(matrix: TTCMatrix, source: str, target: str) -> float:
    """Linguistic distance between two languages: one minus the mean of the
    two directed scores. Zero for a self-pair; symmetric by construction."""
    i, j = matrix.index(source), matrix.index(target)
    return 1.0 - (float(matrix.values[i, j]) + float(matrix.values[j, i])) / 2.0


_PAIR_FIELDS = (
    "source",
    "target",
    "morph_sim",
    "lex_overlap",
    "syn_sim",
    "script_compat",
    "ortho_penalty",
)


def load_pair_components(path) -> dict[tuple[str, str], PairComponents]:
    """Read a pairwise-component document (YAML, ``pairs:`` list, one record
    per ordered pair)."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ParseError(f"{path}: not valid YAML: {exc}") from exc
    if not isinstance(doc, dict) or "pairs" not in doc:
        raise ParseError(f"{path}: expected a mapping with a 'pairs' list")
    records = doc["pairs"]
    if not isinstance(records, list):
        raise ParseError(f"{path}: 'pairs' must be a list of records")
    out: dict[tuple[str, str], PairComponents] = {}
    for i, rec in enumerate(records):
        if not isinstance(rec, dict):
            raise ParseError(f"pair record #{i} is not a mapping: {rec!r}")
        label = f"{rec.get('source', '?')}->{rec.get('target', '?')}"
        missing = [k for k in _PAIR_FIELDS if k not in rec]
        if missing:
            raise ValidationError(f"pair record {label}: missing fields {missing}")
        extra = [k for k in rec if k not in _PAIR_FIELDS]
        if extra:
            raise ValidationError(f"pair record {label}: unknown fields {extra}")
        key = (str(rec["source"]), str(rec["target"]))
        if key[0] == key[1]:
            raise ValidationError(f"pair record {label}: source and target must differ")
        if key in out:
            raise ValidationError(f"duplicate pair record {label}")
        try:
            out[key] = PairComponents(
                morph_sim=float(rec["morph_sim"]),
                lex_overlap=float(rec["lex_overlap"]),
                syn_sim=float(rec["syn_sim"]),
                script_compat=float(rec["script_compat"]),
                ortho_penalty=float(rec["ortho_penalty"]),
            )
        except ValidationError as exc:
            raise ValidationError(f"pair record {label}: {exc}") from None
        except (TypeError, ValueError):
            raise ValidationError(f"pair record {label}: component fields must be numbers") from None
    return out
