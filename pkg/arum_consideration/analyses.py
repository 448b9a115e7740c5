"""
Analysis registry for the scenario runner.

Each analysis turns (scenario inputs, settings, parameters) into an
AnalysisResult: CSV rows of pre-formatted strings, a JSON payload, and
optionally plot data. Library errors propagate unchanged.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import pandas as pd

from .core import FLOAT_TOL, ArithmeticMode, Number, UtilityGrid, parse_range, to_number
from .counterfactual import (
    MODEL_CLASSES,
    LpCounterfactualProblem,
    attention_max_change_set,
    family_for_class,
    lp_report_to_dict,
    solve_lp_counterfactual,
)
from .equivalence import (
    as_consideration_model,
    atomwise_choices_agree,
    cs_to_arum,
    cs_to_arum_e,
    verify_equivalence,
)
from .errors import UnsupportedAnalysisError, ValidationError
from .identification import (
    consideration_identified_set,
    consideration_prob_of,
    discontinuity_experiment,
    full_consideration_verdict,
    subset_diagnostics,
    verdict_rows,
)
from .model_io import format_number, format_vector, model_hash, model_to_dict
from .models import GumbelShocks, choice_prob, monte_carlo_choice_prob
from .scenario import AnalysisSpec, RunSettings, ScenarioInputs, parse_point
from .welfare import (
    DEFAULT_PANELS,
    attention_welfare_set,
    path_integrand_samples,
    unbounded_welfare_witness,
    welfare_path_report,
)

logger = logging.getLogger(__name__)

DEFAULT_ATOM_GRID = "-2:2:1"
DEFAULT_DRAWS = 100_000


@dataclass
class AnalysisContext:
    inputs: ScenarioInputs
    settings: RunSettings

    @property
    def mode(self) -> ArithmeticMode:
        return self.settings.arithmetic

    def number(self, raw: Any) -> Number:
        return to_number(raw, self.mode)

    def finite_model(self, analysis: str):
        model = self.inputs.model
        if model is None or isinstance(model, GumbelShocks):
            raise ValidationError(f"{analysis} needs a finite-support model")
        return model


@dataclass
class AnalysisResult:
    """Output of one analysis: a table, a JSON payload and optional plot data."""

    spec: AnalysisSpec
    columns: List[str]
    rows: List[Dict[str, str]]
    payload: Dict[str, Any]
    plot_columns: Optional[List[str]] = None
    plot_rows: List[Dict[str, str]] = field(default_factory=list)

    @property
    def supports_plot(self) -> bool:
        return self.plot_columns is not None and bool(self.plot_rows)


def emit_plot_data(result: AnalysisResult) -> pd.DataFrame:
    """
    Plot data as a DataFrame with documented column headers.

    Raises:
        UnsupportedAnalysisError: the analysis produces no plot data
    """
    if not result.supports_plot:
        raise UnsupportedAnalysisError(f"Analysis '{result.spec.name}' ({result.spec.type}) has no plot data")
    return pd.DataFrame(result.plot_rows, columns=result.plot_columns)


def _alternatives(spec: AnalysisSpec, K: int) -> List[int]:
    raw = spec.get("k")
    if raw is None:
        return list(range(K))
    ks = raw if isinstance(raw, list) else [raw]
    if not all(isinstance(k, int) and not isinstance(k, bool) for k in ks):
        raise ValidationError(f"{spec.name}: 'k' must be an alternative index or a list of them")
    return ks


def _single_alternative(spec: AnalysisSpec) -> int:
    k = spec.get("k")
    if isinstance(k, bool) or not isinstance(k, int):
        raise ValidationError(f"{spec.name}: 'k' must be a single alternative index")
    return k


def run_equivalence(ctx: AnalysisContext, spec: AnalysisSpec) -> AnalysisResult:
    model = ctx.finite_model("equivalence")
    grid = ctx.inputs.grid
    default_tol = 0 if ctx.mode is ArithmeticMode.RATIONAL else FLOAT_TOL
    tol = ctx.number(spec.get("tol")) if spec.get("tol") is not None else default_tol

    nu = as_consideration_model(model)
    images = {"arum_e": cs_to_arum_e(nu), "arum": cs_to_arum(nu, grid)}
    reports = [
        verify_equivalence(model, image, grid, tol, label_a=model.model_class, label_b=f"{name}_image")
        for name, image in images.items()
    ]
    rows = [row for report in reports for row in report.rows()]
    payload = {
        "comparisons": [report.to_dict() for report in reports],
        "atomwise_choices_agree": {
            name: atomwise_choices_agree(model, image, grid) for name, image in images.items()
        },
        "images": {name: model_hash(image) for name, image in images.items()},
        "passed": all(report.passed for report in reports),
    }
    return AnalysisResult(spec, ["model_a", "model_b", "point", "max_abs_discrepancy"], rows, payload)


def run_identify(ctx: AnalysisContext, spec: AnalysisSpec) -> AnalysisResult:
    reports = [consideration_identified_set(ctx.inputs.field, k) for k in _alternatives(spec, ctx.inputs.grid.K)]
    rows = [report.row() for report in reports]
    payload: Dict[str, Any] = {"bounds": rows}
    model = ctx.inputs.model
    if model is not None and not isinstance(model, GumbelShocks):
        payload["model_consideration_prob"] = {
            str(report.k): format_number(consideration_prob_of(model, report.k)) for report in reports
        }
    columns = ["k", "sup_pk", "argmax_point", "lower", "upper", "k_maximal_found", "sharp"]
    return AnalysisResult(spec, columns, rows, payload)


def _symmetric_rectangle(scale: Number, step: Number, K: int, mode: ArithmeticMode) -> UtilityGrid:
    values = parse_range(f"{-scale}:{scale}:{step}", mode)
    return UtilityGrid.rectangle([values] * K)


def run_discontinuity(ctx: AnalysisContext, spec: AnalysisSpec) -> AnalysisResult:
    model = ctx.finite_model("discontinuity")
    k = _single_alternative(spec)
    raw_scales = spec.get("scales")
    if not isinstance(raw_scales, list) or not raw_scales:
        raise ValidationError(f"{spec.name}: 'scales' must be a nonempty list")
    scales = [to_number(s, ArithmeticMode.RATIONAL) for s in raw_scales]
    step = to_number(spec.get("step", 1), ArithmeticMode.RATIONAL)
    rectangles = [_symmetric_rectangle(s, step, model.K, ctx.mode) for s in scales]

    results = discontinuity_experiment(model, rectangles, k, [ctx.number(s) for s in raw_scales])
    rows = [r.row() for r in results]
    columns = ["index", "s", "grid_size", "sup_pk", "lower", "width", "consideration_prob"]
    plot_rows = [{"s": row["s"], "sup_pk": row["sup_pk"], "width": row["width"]} for row in rows]
    payload = {"k": k, "step": format_number(step), "rectangles": rows}
    return AnalysisResult(spec, columns, rows, payload, ["s", "sup_pk", "width"], plot_rows)


def run_counterfactual(ctx: AnalysisContext, spec: AnalysisSpec) -> AnalysisResult:
    grid, prob_field = ctx.inputs.grid, ctx.inputs.field
    k = _single_alternative(spec)
    u_c = parse_point(spec.get("u_c"), ctx.mode)
    classes = spec.get("model_classes", list(MODEL_CLASSES))
    if not isinstance(classes, list) or not classes or any(c not in MODEL_CLASSES for c in classes):
        raise ValidationError(f"{spec.name}: 'model_classes' must list some of {', '.join(MODEL_CLASSES)}")
    atom_grid = ctx.settings.atom_grid or spec.get("atom_grid", DEFAULT_ATOM_GRID)
    values = parse_range(atom_grid, ArithmeticMode.RATIONAL)

    reports = []
    for model_class in classes:
        family = family_for_class(model_class, values, grid.K, [*grid.points, u_c])
        problem = LpCounterfactualProblem(grid, prob_field, u_c, family, model_class)
        reports.append(solve_lp_counterfactual(problem, k))

    intervals = {report.model_class: report.interval for report in reports}
    payload: Dict[str, Any] = {
        "k": k,
        "u_c": format_vector(u_c),
        "atom_grid": atom_grid,
        "reports": [lp_report_to_dict(report) for report in reports],
    }
    if "arum" in intervals and "arum_e" in intervals:
        payload["arum_within_arum_e"] = intervals["arum"].is_subset_of(intervals["arum_e"])
    columns = ["model_class", "k", "lower", "upper", "family_size", "min_support", "max_support"]
    return AnalysisResult(spec, columns, [r.row() for r in reports], payload)


def run_attention(ctx: AnalysisContext, spec: AnalysisSpec) -> AnalysisResult:
    k = _single_alternative(spec)
    model = ctx.inputs.model
    nu = None if model is None or isinstance(model, GumbelShocks) else model
    report = attention_max_change_set(ctx.inputs.field, ctx.inputs.grid, k, nu)
    payload: Dict[str, Any] = {"bounds": report.row()}
    if report.witness is not None:
        payload["witness"] = model_to_dict(report.witness)
        payload["witness_hash"] = model_hash(report.witness)
    columns = ["k", "lower", "upper", "realized_max_change", "k_maximal_point"]
    return AnalysisResult(spec, columns, [report.row()], payload, ["point", "change"], report.point_rows())


def _paths(ctx: AnalysisContext, spec: AnalysisSpec) -> List[Sequence]:
    raw = spec.get("paths")
    if not isinstance(raw, list) or not raw:
        raise ValidationError(f"{spec.name}: 'paths' must be a nonempty list of {{u, u_tilde}} objects")
    paths = []
    for entry in raw:
        if not isinstance(entry, dict) or "u" not in entry or "u_tilde" not in entry:
            raise ValidationError(f"{spec.name}: each path needs 'u' and 'u_tilde'")
        paths.append((parse_point(entry["u"], ctx.mode), parse_point(entry["u_tilde"], ctx.mode)))
    return paths


def run_welfare(ctx: AnalysisContext, spec: AnalysisSpec) -> AnalysisResult:
    model = ctx.inputs.model
    panels = spec.get("panels", DEFAULT_PANELS)
    samples = spec.get("samples", 65)
    paths = _paths(ctx, spec)

    reports = [welfare_path_report(model, u, u_tilde, panels, ctx.settings.workers) for u, u_tilde in paths]
    rows = [report.row() for report in reports]
    u, u_tilde = paths[0]
    plot_rows = [
        {"t": format_number(t), "integrand": format_number(value)}
        for t, value in path_integrand_samples(lambda point: choice_prob(model, point), u, u_tilde, samples)
    ]
    payload: Dict[str, Any] = {"paths": rows}

    if spec.get("k") is not None:
        k = _single_alternative(spec)
        welfare_set = attention_welfare_set(ctx.inputs.field, ctx.inputs.grid, k)
        payload["attention_welfare"] = {"k": k, "set": str(welfare_set)}
        if spec.get("c") is not None and not isinstance(model, GumbelShocks):
            point = parse_point(spec.get("u"), ctx.mode) if spec.get("u") is not None else None
            witness = unbounded_welfare_witness(
                as_consideration_model(model), ctx.inputs.grid, k, ctx.number(spec.get("c")), point
            )
            payload["attention_welfare"]["witness"] = witness.to_dict()

    columns = ["u", "u_tilde", "path_integral", "exact", "discrepancy", "panels", "breakpoints"]
    return AnalysisResult(spec, columns, rows, payload, ["t", "integrand"], plot_rows)


def run_diagnostics(ctx: AnalysisContext, spec: AnalysisSpec) -> AnalysisResult:
    diagnostics = subset_diagnostics(ctx.inputs.field)
    rows = [d.row() for d in diagnostics]
    payload = {
        "subsets": rows,
        "full_consideration": verdict_rows(full_consideration_verdict(ctx.inputs.field)),
    }
    plot_rows = [{"subset": row["subset"], "sup_mass": row["sup_mass"]} for row in rows]
    columns = ["subset", "sup_mass", "max_advantage", "reaches_one"]
    return AnalysisResult(spec, columns, rows, payload, ["subset", "sup_mass"], plot_rows)


def run_simulate(ctx: AnalysisContext, spec: AnalysisSpec) -> AnalysisResult:
    model = ctx.inputs.model
    draws = spec.get("draws", DEFAULT_DRAWS)
    if isinstance(draws, bool) or not isinstance(draws, int):
        raise ValidationError(f"{spec.name}: 'draws' must be an integer")
    raw_points = spec.get("points")
    points = [parse_point(p, ctx.mode) for p in raw_points] if raw_points is not None else list(ctx.inputs.grid)

    rows = []
    all_within = True
    for index, point in enumerate(points):
        seed = (ctx.settings.seed + index) % 2 ** 64
        estimate = monte_carlo_choice_prob(model, point, draws, seed, ctx.settings.workers)
        exact = choice_prob(model, point)
        within = estimate.within(exact)
        all_within = all_within and within
        for k in range(model.K):
            rows.append({
                "point": format_vector(point),
                "k": str(k),
                "exact": format_number(exact[k]),
                "estimate": format_number(estimate.estimate[k]),
                "standard_error": format_number(estimate.standard_error[k]),
                "within_4se": format_number(within),
            })
    if not all_within:
        logger.warning(f"{spec.name}: some Monte Carlo estimates are more than 4 standard errors off")
    payload = {"draws": draws, "seed": ctx.settings.seed, "all_within_4se": all_within}
    columns = ["point", "k", "exact", "estimate", "standard_error", "within_4se"]
    return AnalysisResult(spec, columns, rows, payload)


ANALYSES: Dict[str, Callable[[AnalysisContext, AnalysisSpec], AnalysisResult]] = {
    "equivalence": run_equivalence,
    "identify": run_identify,
    "discontinuity": run_discontinuity,
    "counterfactual": run_counterfactual,
    "attention": run_attention,
    "welfare": run_welfare,
    "diagnostics": run_diagnostics,
    "simulate": run_simulate,
}


def run_analysis(ctx: AnalysisContext, spec: AnalysisSpec) -> AnalysisResult:
    runner = ANALYSES.get(spec.type)
    if runner is None:
        raise UnsupportedAnalysisError(f"Unknown analysis type {spec.type!r}")
    logger.info(f"Running {spec.type} analysis '{spec.name}'...")
    return runner(ctx, spec)
