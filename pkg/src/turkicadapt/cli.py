"""Command-line interface.

Subcommands: ttc, predict, fit, cte, forgetting, plan, fertility. Machine
output goes to stdout in the chosen format (table, json or csv);
diagnostics go to stderr. Exit codes: 0 success, 1 I/O failure, 2
validation or domain error, 3 numerical failure (non-convergence under
--strict). A single --config YAML can carry component weights, smoothing
floors, forgetting coefficients and transfer-cost exponents; command-line
flags override config values.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import documents
from .errors import NonFiniteObjectiveError, ParseError, TurkicAdaptError, ValidationError
from .fitting import FitConfig, fit_scaling
from .forgetting import (
    ForgettingCoeffs,
    ForgettingInputs,
    default_novelty,
    derive_transfer_support,
    forgetting_risk,
)
from .planner import PlanRequest, allocate_data_budget
from .profiles import Regime, load_profiles
from .scaling import (
    AdaptationInputs,
    SmoothingFloors,
    fertility,
    interaction_loss,
    regime_loss,
)
from .transfer import CTEConfig, cte_distance_aware, cte_measured, cte_predicted
from .ttc import DEFAULT_WEIGHTS, TTCMatrix, TTCWeights, distance, load_pair_components, ttc_matrix

_SIG = "{:#.6g}"


def _fmt(value) -> str:
    """Six significant digits for table mode."""
    if isinstance(value, float):
        return _SIG.format(value).rstrip(".")
    return str(value)


def _table(rows, header=None) -> str:
    data = [[str(c) for c in row] for row in rows]
    if header:
        data.insert(0, [str(c) for c in header])
    widths = [max(len(r[i]) for r in data) for i in range(len(data[0]))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in data]
    return "\n".join(lines)


def _floors_from(config: dict, args) -> SmoothingFloors:
    section = config.get("floors", {}) if isinstance(config.get("floors", {}), dict) else {}
    d_floor = args.d_floor if getattr(args, "d_floor", None) is not None else section.get("d_floor", 1.0)
    p_floor = args.p_floor if getattr(args, "p_floor", None) is not None else section.get("p_floor", 1e-6)
    return SmoothingFloors(d_floor=float(d_floor), p_floor=float(p_floor))


def _weights_from(config: dict) -> TTCWeights:
    section = config.get("ttc_weights")
    if section is None:
        return DEFAULT_WEIGHTS
    if not isinstance(section, dict):
        raise ParseError("config section 'ttc_weights' must be a mapping")
    try:
        return TTCWeights(**{k: float(v) for k, v in section.items()})
    except TypeError as exc:
        raise ValidationError(f"bad ttc_weights config: {exc}") from None


# --- subcommand handlers -------------------------------------------------


def _cmd_ttc(args, config) -> int:
    pairs = load_pair_components(args.components)
    weights = _weights_from(config)
    if args.languages:
        languages = args.languages.split(",")
    else:
        seen = []
        for source, target in pairs:
            for lang in (source, target):
                if lang not in seen:
                    seen.append(lang)
        languages = seen
    matrix = ttc_matrix(pairs, weights, languages)
    if args.format == "json":
        print(matrix.to_json())
    elif args.format == "csv":
        sys.stdout.write(matrix.to_csv_text())
    else:
        rows = [
            [lang] + [_fmt(float(v)) for v in row]
            for lang, row in zip(matrix.languages, matrix.values)
        ]
        print(_table(rows, header=["source/target"] + list(matrix.languages)))
    return 0


def _cmd_predict(args, config) -> int:
    params = documents.load_scaling_params(args.params)
    floors = _floors_from(config, args)
    inputs = AdaptationInputs(
        model_capacity=args.model_capacity,
        data_tokens=args.data_tokens,
        adapter_capacity=args.rank,
        pretrain_repr=args.pretrain_repr,
    )
    if args.regime is not None:
        loss = regime_loss(params, inputs, floors, Regime(args.regime))
    else:
        loss = interaction_loss(params, inputs, floors)
    if args.format == "json":
        print(json.dumps({"loss": loss}))
    elif args.format == "csv":
        print("loss")
        print(repr(loss))
    else:
        print(_fmt(loss))
    return 0


def _cmd_fit(args, config) -> int:
    obs = documents.read_observations_csv(args.observations)
    cfg = FitConfig(
        max_iterations=args.max_iterations,
        convergence_tol=args.tol,
        fit_interactions=args.interactions,
        seed=args.seed,
        restarts=args.restarts,
        floors=_floors_from(config, args),
    )
    result = fit_scaling(obs, cfg)
    if args.strict and not result.converged:
        print("fit did not converge", file=sys.stderr)
        return 3
    doc = documents.fit_result_to_dict(result, cfg)
    if args.format == "csv":
        print("parameter,value")
        for name, value in doc["params"].items():
            print(f"{name},{value!r}")
    elif args.format == "table":
        rows = [[name, _fmt(value)] for name, value in doc["params"].items()]
        rows.append(["objective (mse)", _fmt(result.objective)])
        rows.append(["iterations", result.iterations])
        rows.append(["converged", result.converged])
        print(_table(rows, header=["parameter", "value"]))
    else:
        print(json.dumps(doc, indent=2))
    return 0


def _cmd_cte(args, config) -> int:
    observations = documents.read_transfer_csv(args.observations)
    section = config.get("cte", {}) if isinstance(config.get("cte", {}), dict) else {}

    def pick(flag_value, key, default):
        if flag_value is not None:
            return flag_value
        return float(section.get(key, default))

    cfg = CTEConfig(
        omega=pick(args.omega, "omega", 0.0),
        chi=pick(args.chi, "chi", 0.0),
        tau=pick(args.tau, "tau", 0.0),
        link_constant=pick(args.link_constant, "link_constant", 1.0),
    )
    matrix = None
    if args.matrix:
        with open(args.matrix, "r", encoding="utf-8") as fh:
            matrix = TTCMatrix.from_json_dict(json.load(fh))
    profiles = load_profiles(args.profiles) if args.profiles else None
    params = documents.load_scaling_params(args.params) if args.params else None
    floors = _floors_from(config, args)

    rows = []
    for obs in observations:
        row = {
            "source": obs.source,
            "target": obs.target,
            "cte_measured": cte_measured(obs, cfg),
        }
        if matrix is not None:
            dist = distance(matrix, obs.source, obs.target)
            row["distance"] = dist
            row["cte_distance_aware"] = cte_distance_aware(obs, dist, cfg)
        if matrix is not None and profiles is not None and params is not None:
            score = matrix.score(obs.source, obs.target)
            row["ttc"] = score
            row["cte_predicted"] = cte_predicted(
                score, profiles.get(obs.target), obs.adapter_capacity, params, floors, cfg
            )
        rows.append(row)

    columns = list(rows[0].keys()) if rows else ["source", "target", "cte_measured"]
    if args.format == "json":
        print(json.dumps(rows))
    elif args.format == "table":
        print(_table([[_fmt(r[c]) for c in columns] for r in rows], header=columns))
    else:
        print(",".join(columns))
        for r in rows:
            print(",".join(repr(r[c]) if isinstance(r[c], float) else str(r[c]) for c in columns))
    return 0


def _coeffs_from(args, config) -> ForgettingCoeffs:
    section = config.get("forgetting", {}) if isinstance(config.get("forgetting", {}), dict) else {}
    values = {}
    for name in ("a", "b", "c", "d", "e"):
        flag = getattr(args, f"coeff_{name}")
        values[name] = float(flag if flag is not None else section.get(name, 0.0))
    return ForgettingCoeffs(**values)


def _cmd_forgetting(args, config) -> int:
    coeffs = _coeffs_from(args, config)
    if args.profiles:
        profiles = load_profiles(args.profiles)
        matrix = None
        if args.matrix:
            with open(args.matrix, "r", encoding="utf-8") as fh:
                matrix = TTCMatrix.from_json_dict(json.load(fh))
        report = {}
        for profile in profiles:
            support = (
                derive_transfer_support(matrix, profiles, profile.id)
                if matrix is not None
                else (args.transfer_support or 0.0)
            )
            inputs = ForgettingInputs(
                adapter_capacity=args.rank,
                data_tokens=profile.data_tokens,
                pretrain_repr=profile.pretrain_repr,
                novelty=default_novelty(profile.pretrain_repr) if args.novelty is None else args.novelty,
                transfer_support=support,
            )
            report[profile.id] = forgetting_risk(coeffs, inputs)
        if args.format == "table":
            print(_table([[k, _fmt(v)] for k, v in report.items()], header=["language", "risk"]))
        elif args.format == "csv":
            print("language,risk")
            for k, v in report.items():
                print(f"{k},{v!r}")
        else:
            print(json.dumps(report))
        return 0
    if args.data_tokens is None or args.pretrain_repr is None:
        raise ValidationError(
            "either --profiles or both --data-tokens and --pretrain-repr are required"
        )
    inputs = ForgettingInputs(
        adapter_capacity=args.rank,
        data_tokens=args.data_tokens,
        pretrain_repr=args.pretrain_repr,
        novelty=default_novelty(args.pretrain_repr) if args.novelty is None else args.novelty,
        transfer_support=args.transfer_support or 0.0,
    )
    risk = forgetting_risk(coeffs, inputs)
    if args.format == "json":
        print(json.dumps({"risk": risk}))
    elif args.format == "csv":
        print("risk")
        print(repr(risk))
    else:
        print(_fmt(risk))
    return 0


def _cmd_plan(args, config) -> int:
    if args.request:
        with open(args.request, "r", encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{args.request}: not valid JSON: {exc}") from exc
        request = documents.plan_request_from_dict(doc, source=args.request)
    else:
        if not args.profiles or not args.params or args.budget is None:
            raise ValidationError("plan needs either --request or --profiles/--params/--budget")
        profiles = load_profiles(args.profiles)
        params = documents.load_scaling_params(args.params)
        weights = None
        if args.weight:
            weights = {}
            for item in args.weight:
                lang, _, value = item.partition("=")
                if not value:
                    raise ValidationError(f"--weight expects LANG=VALUE, got {item!r}")
                weights[lang] = float(value)
        request = PlanRequest(
            profiles=profiles,
            params=params,
            total_budget=args.budget,
            min_per_language=args.min_per_language,
            model_capacity=args.model_capacity,
            adapter_capacity=args.rank,
            weights=weights,
            floors=_floors_from(config, args),
        )
    plan = allocate_data_budget(request)
    doc = plan.as_dict()
    if args.format == "table":
        rows = [
            [lang, _fmt(doc["allocations"][lang]), _fmt(doc["loss_before"][lang]), _fmt(doc["loss_after"][lang])]
            for lang in doc["languages"]
        ]
        rows.append(["(aggregate)", _fmt(args.budget), _fmt(doc["aggregate_before"]), _fmt(doc["aggregate_after"])])
        print(_table(rows, header=["language", "added tokens", "loss before", "loss after"]))
    elif args.format == "csv":
        print("language,added_tokens,loss_before,loss_after")
        for lang in doc["languages"]:
            print(f"{lang},{doc['allocations'][lang]!r},{doc['loss_before'][lang]!r},{doc['loss_after'][lang]!r}")
    else:
        print(json.dumps(doc))
    return 0


def _cmd_lowrank(args, config) -> int:
    from .scaling import apply_low_rank_update

    base = documents.read_matrix_csv(args.weight_matrix)
    left = documents.read_matrix_csv(args.left_factor)
    right = documents.read_matrix_csv(args.right_factor)
    updated = apply_low_rank_update(base, left, right)
    if args.format == "json":
        print(json.dumps({"shape": list(updated.shape),
                          "values": [float(v) for v in updated.ravel(order="C")]}))
    elif args.format == "table":
        print(_table([[_fmt(float(v)) for v in row] for row in updated]))
    else:
        for row in updated:
            print(",".join(repr(float(v)) for v in row))
    return 0


def _cmd_fertility(args, config) -> int:
    counts = list(args.counts or [])
    if args.input:
        with open(args.input, "r", encoding="utf-8") as fh:
            for token in fh.read().split():
                try:
                    counts.append(int(token))
                except ValueError:
                    raise ParseError(f"{args.input}: not an integer count: {token!r}") from None
    value = fertility(counts)
    if args.format == "json":
        print(json.dumps({"fertility": value}))
    elif args.format == "csv":
        print("fertility")
        print(repr(value))
    else:
        print(_fmt(value))
    return 0


# --- parser --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    # Global options are accepted both before and after the subcommand; the
    # SUPPRESS defaults keep the subparser from clobbering values given at
    # the top level.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("table", "json", "csv"),
                        default=argparse.SUPPRESS, help="output format (default: table)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="random seed (default: 0)")
    common.add_argument("--config", default=argparse.SUPPRESS,
                        help="YAML config carrying weights, floors, coefficients")

    parser = argparse.ArgumentParser(
        prog="turkicadapt",
        description="Adaptation planning toolkit: transfer coefficients, loss-law "
        "predictions and fitting, forgetting risk, and data budget allocation.",
    )
    parser.add_argument("--format", choices=("table", "json", "csv"), default="table",
                        help="output format (default: table)")
    parser.add_argument("--seed", type=int, default=0, help="random seed (default: 0)")
    parser.add_argument("--config", default=None,
                        help="YAML config carrying weights, floors, coefficients")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_floors(p):
        p.add_argument("--d-floor", type=float, default=None, help="data floor inside power terms")
        p.add_argument("--p-floor", type=float, default=None, help="pretraining floor inside power terms")

    p = sub.add_parser("ttc", parents=[common], help="compute the transfer-coefficient matrix from pair components")
    p.add_argument("components", help="pair-components YAML file")
    p.add_argument("--languages", help="comma-separated language order (default: file order)")
    p.set_defaults(handler=_cmd_ttc)

    p = sub.add_parser("predict", parents=[common], help="predict adaptation loss from fitted constants")
    p.add_argument("--params", required=True, help="scaling params file (YAML or fit JSON)")
    p.add_argument("--model-capacity", type=float, required=True)
    p.add_argument("--data-tokens", type=float, required=True)
    p.add_argument("--rank", type=float, required=True, help="adapter capacity")
    p.add_argument("--pretrain-repr", type=float, required=True)
    p.add_argument("--regime", choices=[r.value for r in Regime], default=None,
                   help="use the regime-appropriate predictor")
    add_floors(p)
    p.set_defaults(handler=_cmd_predict)

    p = sub.add_parser("fit", parents=[common], help="fit loss-law constants to an observation CSV")
    p.add_argument("observations", help="CSV with columns " + ",".join(documents.OBSERVATION_COLUMNS))
    p.add_argument("--interactions", action="store_true", help="fit the coupling terms too")
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--max-iterations", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-10, help="relative objective-decrease tolerance")
    p.add_argument("--strict", action="store_true", help="exit 3 if the fit did not converge")
    add_floors(p)
    p.set_defaults(handler=_cmd_fit)

    p = sub.add_parser("cte", parents=[common], help="cross-lingual transfer efficiency from a transfer CSV")
    p.add_argument("observations", help="CSV with columns " + ",".join(documents.TRANSFER_COLUMNS))
    p.add_argument("--matrix", help="transfer-coefficient matrix JSON (adds distance-aware values)")
    p.add_argument("--profiles", help="profiles YAML (with --matrix and --params adds predictions)")
    p.add_argument("--params", help="scaling params file for the predictor")
    p.add_argument("--omega", type=float, default=None, help="source-data cost exponent")
    p.add_argument("--chi", type=float, default=None, help="adapter cost exponent")
    p.add_argument("--tau", type=float, default=None, help="distance penalty exponent")
    p.add_argument("--link-constant", type=float, default=None, help="predictor link constant")
    add_floors(p)
    p.set_defaults(handler=_cmd_cte)

    p = sub.add_parser("forgetting", parents=[common], help="logistic forgetting risk")
    p.add_argument("--rank", type=float, required=True, help="adapter capacity")
    p.add_argument("--data-tokens", type=float, default=None)
    p.add_argument("--pretrain-repr", type=float, default=None)
    p.add_argument("--novelty", type=float, default=None, help="default: 1 - pretrain_repr")
    p.add_argument("--transfer-support", type=float, default=None)
    p.add_argument("--profiles", help="profiles YAML for a per-language report")
    p.add_argument("--matrix", help="matrix JSON to derive per-language transfer support")
    for name in ("a", "b", "c", "d", "e"):
        p.add_argument(f"--{name}", dest=f"coeff_{name}", type=float, default=None,
                       help=f"coefficient {name} (overrides config)")
    p.set_defaults(handler=_cmd_forgetting)

    p = sub.add_parser("plan", parents=[common], help="allocate a token budget across languages")
    p.add_argument("--request", help="self-contained plan request JSON (replaces the flags below)")
    p.add_argument("--profiles", help="profiles YAML")
    p.add_argument("--params", help="scaling params file")
    p.add_argument("--budget", type=float, default=None, help="total new tokens to allocate")
    p.add_argument("--min-per-language", type=float, default=0.0)
    p.add_argument("--model-capacity", type=float, default=1e9)
    p.add_argument("--rank", type=float, default=16.0, help="adapter capacity during prediction")
    p.add_argument("--weight", action="append", help="LANG=VALUE importance weight (repeatable)")
    add_floors(p)
    p.set_defaults(handler=_cmd_plan)

    p = sub.add_parser("lowrank", parents=[common],
                       help="apply a low-rank update W + B @ A to CSV matrix literals")
    p.add_argument("weight_matrix", help="CSV literal of the d x k base matrix W")
    p.add_argument("left_factor", help="CSV literal of the d x r factor B")
    p.add_argument("right_factor", help="CSV literal of the r x k factor A")
    p.set_defaults(handler=_cmd_lowrank)

    p = sub.add_parser("fertility", parents=[common], help="mean subword tokens per word")
    p.add_argument("counts", nargs="*", type=int, help="per-word token counts")
    p.add_argument("--input", help="file of whitespace-separated counts")
    p.set_defaults(handler=_cmd_fertility)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.seed < 0:
            raise ValidationError(f"seed must be >= 0, got {args.seed}")
        config = documents.load_config(args.config) if args.config else {}
        return args.handler(args, config)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NonFiniteObjectiveError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TurkicAdaptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
