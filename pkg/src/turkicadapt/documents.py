"""Readers and writers for the on-disk formats: observation CSVs, transfer
CSVs, scaling-parameter files, and the shared YAML config."""

from __future__ import annotations

import csv
import json
from typing import Sequence

import yaml

from .errors import ParseError, ValidationError
from .fitting import FitConfig, FitResult, Observation, param_order
from .scaling import AdaptationInputs, ScalingParams
from .transfer import TransferObservation

__all__ = [
    "OBSERVATION_COLUMNS",
    "TRANSFER_COLUMNS",
    "read_observations_csv",
    "write_observations_csv",
    "read_transfer_csv",
    "scaling_params_to_dict",
    "scaling_params_from_dict",
    "load_scaling_params",
    "fit_result_to_dict",
    "load_config",
]

OBSERVATION_COLUMNS = (
    "model_capacity",
    "data_tokens",
    "adapter_capacity",
    "pretrain_repr",
    "loss",
)
TRANSFER_COLUMNS = (
    "source",
    "target",
    "delta_perf",
    "source_data_tokens",
    "adapter_capacity",
)

_PARAM_FIELDS = (
    "alpha", "beta", "gamma", "delta", "eta", "rho",
    "kappa", "pi_exp", "epsilon", "lambda_dp", "mu_rp", "nu_dr",
)


def _float_cell(row: dict, column: str, line: int) -> float:
    raw = row.get(column)
    if raw is None or raw == "":
        raise ParseError(f"line {line}: missing value for column {column!r}")
    try:
        return float(raw)
    except ValueError:
        raise ParseError(f"line {line}: column {column!r} is not a number: {raw!r}") from None


def read_observations_csv(path) -> list[Observation]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != OBSERVATION_COLUMNS:
            raise ParseError(
                f"{path}: expected header {','.join(OBSERVATION_COLUMNS)}, "
                f"got {reader.fieldnames}"
            )
        out = []
        for line, row in enumerate(reader, start=2):
            inputs = AdaptationInputs(
                model_capacity=_float_cell(row, "model_capacity", line),
                data_tokens=_float_cell(row, "data_tokens", line),
                adapter_capacity=_float_cell(row, "adapter_capacity", line),
                pretrain_repr=_float_cell(row, "pretrain_repr", line),
            )
            out.append(Observation(inputs, _float_cell(row, "loss", line)))
    return out


def write_observations_csv(obs: Sequence[Observation], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(OBSERVATION_COLUMNS)
        for o in obs:
            writer.writerow(
                [
                    repr(o.inputs.model_capacity),
                    repr(o.inputs.data_tokens),
                    repr(o.inputs.adapter_capacity),
                    repr(o.inputs.pretrain_repr),
                    repr(o.measured_loss),
                ]
            )


def read_transfer_csv(path) -> list[TransferObservation]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != TRANSFER_COLUMNS:
            raise ParseError(
                f"{path}: expected header {','.join(TRANSFER_COLUMNS)}, "
                f"got {reader.fieldnames}"
            )
        out = []
        for line, row in enumerate(reader, start=2):
            if not row.get("source") or not row.get("target"):
                raise ParseError(f"line {line}: source and target must be nonempty")
            out.append(
                TransferObservation(
                    source=row["source"],
                    target=row["target"],
                    delta_perf=_float_cell(row, "delta_perf", line),
                    source_data_tokens=_float_cell(row, "source_data_tokens", line),
                    adapter_capacity=_float_cell(row, "adapter_capacity", line),
                )
            )
    return out


def scaling_params_to_dict(params: ScalingParams) -> dict:
    return {name: getattr(params, name) for name in _PARAM_FIELDS}


def scaling_params_from_dict(doc: dict, source: str = "<params>") -> ScalingParams:
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: expected a mapping of parameter names to numbers")
    unknown = [k for k in doc if k not in _PARAM_FIELDS]
    if unknown:
        raise ValidationError(f"{source}: unknown parameter names {unknown}")
    missing = [k for k in _PARAM_FIELDS[:9] if k not in doc]
    if missing:
        raise ValidationError(f"{source}: missing required parameters {missing}")
    values = {}
    for name in _PARAM_FIELDS:
        if name in doc:
            try:
                values[name] = float(doc[name])
            except (TypeError, ValueError):
                raise ParseError(f"{source}: parameter {name!r} is not a number") from None
    return ScalingParams(**values)


def load_scaling_params(path) -> ScalingParams:
    """Read loss-law constants from a YAML mapping or from the JSON this
    tool's own fit command writes (its `params` block is used)."""
    text = open(path, "r", encoding="utf-8").read()
    name = str(path)
    if name.endswith(".json"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: not valid JSON: {exc}") from exc
        if isinstance(doc, dict) and "params" in doc:
            doc = doc["params"]
    else:
        try:
            doc = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ParseError(f"{path}: not valid YAML: {exc}") from exc
    return scaling_params_from_dict(doc, source=str(path))


def fit_result_to_dict(result: FitResult, config: FitConfig) -> dict:
    """JSON-ready fit report: parameter values plus provenance."""
    return {
        "params": scaling_params_to_dict(result.params),
        "objective": result.objective,
        "iterations": result.iterations,
        "converged": result.converged,
        "best_restart": result.best_restart,
        "restart_objectives": list(result.restart_objectives),
        "free_parameters": list(param_order(config.fit_interactions)),
        "config": {
            "max_iterations": config.max_iterations,
            "convergence_tol": config.convergence_tol,
            "fit_interactions": config.fit_interactions,
            "seed": config.seed,
            "restarts": config.restarts,
            "d_floor": config.floors.d_floor,
            "p_floor": config.floors.p_floor,
        },
    }


def load_config(path) -> dict:
    """Read the shared YAML config (weights, floors, coefficients...)."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ParseError(f"{path}: not valid YAML: {exc}") from exc
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: config must be a mapping")
    return doc


def plan_request_from_dict(doc: dict, source: str = "<request>"):
    """Build a PlanRequest from its self-contained JSON document form:
    profile records inline, one shared params mapping, and the budget and
    prediction settings as top-level keys."""
    from .planner import PlanRequest
    from .profiles import ProfileSet, _profile_from_record
    from .scaling import SmoothingFloors

    if not isinstance(doc, dict):
        raise ParseError(f"{source}: plan request must be a mapping")
    required = ("profiles", "params", "total_budget")
    missing = [k for k in required if k not in doc]
    if missing:
        raise ValidationError(f"{source}: missing keys {missing}")
    if not isinstance(doc["profiles"], list):
        raise ParseError(f"{source}: 'profiles' must be a list of records")
    profiles = ProfileSet(
        tuple(_profile_from_record(rec, i) for i, rec in enumerate(doc["profiles"]))
    )
    floors_doc = doc.get("floors", {})
    floors = SmoothingFloors(
        d_floor=float(floors_doc.get("d_floor", 1.0)),
        p_floor=float(floors_doc.get("p_floor", 1e-6)),
    )
    weights = doc.get("weights")
    if weights is not None:
        weights = {str(k): float(v) for k, v in weights.items()}
    return PlanRequest(
        profiles=profiles,
        params=scaling_params_from_dict(doc["params"], source=f"{source}:params"),
        total_budget=float(doc["total_budget"]),
        min_per_language=float(doc.get("min_per_language", 0.0)),
        model_capacity=float(doc.get("model_capacity", 1e9)),
        adapter_capacity=float(doc.get("adapter_capacity", 16.0)),
        weights=weights,
        floors=floors,
    )


def read_matrix_csv(path) -> "np.ndarray":
    """Read a bare numeric matrix from CSV (no header)."""
    import numpy as np

    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                rows.append([float(cell) for cell in row])
            except ValueError:
                raise ParseError(f"{path} line {line_no}: non-numeric matrix entry") from None
    if not rows:
        raise ParseError(f"{path}: empty matrix")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ParseError(f"{path}: ragged rows; every row needs {width} entries")
    return np.array(rows, dtype=float)
