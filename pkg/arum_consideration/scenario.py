"""
Scenario files: what to load, on which grid, and which analyses to run.

Layout (schema_version 1):

    {"schema_version": 1,
     "name": "reference",
     "model": "model.json",            # path relative to the scenario, or an inline model
     "grid": {"ranges": ["-1:1:2", "-1:1:2"]},   # or {"points": [[-1, -1], ...]}
     "analyses": [{"type": "identify", "k": [0, 1]}, ...],
     "output_dir": "out", "seed": 0, "arithmetic": "rational"}

Instead of "model", a scenario may carry an inline "field"
({"points": [...], "probs": [...]}); analyses that need a model then fail
validation. Inline models may also be {"class": "gumbel", "K": 3, "scale": 1}.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

from .config import Config
from .core import ArithmeticMode, ChoiceProbField, UtilityGrid, UtilityPoint, parse_range, to_number
from .errors import ParseError, ValidationError
from .model_io import SCHEMA_VERSION, load_json, parse_field, parse_model
from .models import GumbelShocks, Model, choice_prob_field

logger = logging.getLogger(__name__)

ANALYSIS_TYPES = (
    "equivalence",
    "identify",
    "discontinuity",
    "counterfactual",
    "attention",
    "welfare",
    "diagnostics",
    "simulate",
)

# Allowed and required parameters per analysis type ("type" and "name" are always allowed).
ANALYSIS_PARAMETERS: Dict[str, Dict[str, bool]] = {
    "equivalence": {"tol": False},
    "identify": {"k": False},
    "discontinuity": {"k": True, "scales": True, "step": False},
    "counterfactual": {"k": True, "u_c": True, "model_classes": False, "atom_grid": False},
    "attention": {"k": True},
    "welfare": {"paths": True, "panels": False, "samples": False, "k": False, "c": False, "u": False},
    "diagnostics": {},
    "simulate": {"points": False, "draws": False},
}

NEEDS_MODEL = {"equivalence", "discontinuity", "welfare", "simulate"}
FINITE_MODEL_ONLY = {"equivalence", "discontinuity"}

SCENARIO_SCHEMA: Dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "arum-consideration scenario",
    "type": "object",
    "required": ["name", "analyses"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string", "minLength": 1},
        "description": {"type": "string"},
        "model": {
            "description": "Model file path relative to the scenario file, or an inline model object",
            "type": ["string", "object"],
        },
        "field": {
            "description": "Inline choice-probability field",
            "type": "object",
            "required": ["points", "probs"],
        },
        "grid": {
            "type": "object",
            "oneOf": [
                {"required": ["points"]},
                {"required": ["ranges"]},
            ],
            "properties": {
                "points": {"type": "array", "items": {"type": "array"}},
                "ranges": {"type": "array", "items": {"type": "string", "pattern": "^[^:]+:[^:]+:[^:]+$"}},
            },
        },
        "analyses": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["type"],
                "properties": {
                    "type": {"enum": list(ANALYSIS_TYPES)},
                    "name": {"type": "string"},
                },
            },
        },
        "output_dir": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
        "arithmetic": {"enum": [mode.value for mode in ArithmeticMode]},
    },
}

TOP_LEVEL_KEYS = set(SCENARIO_SCHEMA["properties"])


@dataclass(frozen=True)
class AnalysisSpec:
    """One requested analysis; `name` also names its output files."""

    type: str
    name: str
    params: Mapping[str, Any] = field(default_factory=dict)

    def get(self, key: str, default: Any = None) -> Any:
        return self.params.get(key, default)


@dataclass
class Scenario:
    """A parsed, structurally valid scenario file."""

    name: str
    path: Path
    analyses: List[AnalysisSpec]
    model_source: Union[Path, Dict[str, Any], None] = None
    field_source: Optional[Dict[str, Any]] = None
    grid_spec: Optional[Dict[str, Any]] = None
    output_dir: Optional[Path] = None
    seed: Optional[int] = None
    arithmetic: Optional[ArithmeticMode] = None
    raw: Dict[str, Any] = field(default_factory=dict)


@dataclass
class RunSettings:
    """Effective settings after merging CLI, scenario and environment."""

    output_dir: Path
    arithmetic: ArithmeticMode
    seed: int
    atom_grid: Optional[str]
    workers: int


@dataclass
class ScenarioInputs:
    """Loaded model (if any), the grid, and the field on it."""

    model: Optional[Model]
    grid: UtilityGrid
    field: ChoiceProbField


def _parse_analysis(raw: Any, index: int) -> AnalysisSpec:
    where = f"analysis {index}"
    if not isinstance(raw, dict):
        raise ParseError(f"{where} must be a JSON object")
    kind = raw.get("type")
    if kind not in ANALYSIS_PARAMETERS:
        raise ValidationError(f"{where}: unknown analysis type {kind!r}; expected one of {', '.join(ANALYSIS_TYPES)}")
    allowed = ANALYSIS_PARAMETERS[kind]
    params = {key: value for key, value in raw.items() if key not in ("type", "name")}
    unknown = sorted(set(params) - set(allowed))
    if unknown:
        raise ValidationError(f"{where} ({kind}): unknown parameter(s) {', '.join(unknown)}")
    missing = sorted(key for key, required in allowed.items() if required and key not in params)
    if missing:
        raise ValidationError(f"{where} ({kind}): missing parameter(s) {', '.join(missing)}")
    name = raw.get("name", kind)
    if not isinstance(name, str) or not name or "/" in name or "\\" in name:
        raise ValidationError(f"{where}: name must be a nonempty file-name-safe string")
    return AnalysisSpec(type=kind, name=name, params=params)


def parse_scenario(data: Any, path: Path) -> Scenario:
    """
    Structural validation of a scenario dictionary.

    Raises:
        ParseError: wrong JSON shapes or an unsupported schema_version
        ValidationError: empty analyses, unknown keys, duplicate names
    """
    where = str(path)
    if not isinstance(data, dict):
        raise ParseError(f"{where}: scenario must be a JSON object")
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ParseError(f"{where}: unsupported schema_version {version}")
    unknown = sorted(set(data) - TOP_LEVEL_KEYS)
    if unknown:
        raise ValidationError(f"{where}: unknown key(s) {', '.join(unknown)}")

    name = data.get("name")
    if not isinstance(name, str) or not name:
        raise ParseError(f"{where}: 'name' must be a nonempty string")

    raw_analyses = data.get("analyses")
    if not isinstance(raw_analyses, list):
        raise ParseError(f"{where}: 'analyses' must be a list")
    if not raw_analyses:
        raise ValidationError(f"{where}: 'analyses' is empty; nothing to run")
    analyses = [_parse_analysis(raw, i) for i, raw in enumerate(raw_analyses)]
    names = [a.name for a in analyses]
    duplicates = sorted({n for n in names if names.count(n) > 1})
    if duplicates:
        raise ValidationError(f"{where}: duplicate analysis name(s) {', '.join(duplicates)}; set 'name'")

    has_model, has_field = "model" in data, "field" in data
    if has_model == has_field:
        raise ValidationError(f"{where}: give exactly one of 'model' and 'field'")

    model_source: Union[Path, Dict[str, Any], None] = None
    if has_model:
        raw_model = data["model"]
        if isinstance(raw_model, str):
            model_source = (path.parent / raw_model).resolve()
            if not model_source.exists():
                raise ValidationError(f"{where}: model file not found: {model_source}")
        elif isinstance(raw_model, dict):
            model_source = raw_model
        else:
            raise ParseError(f"{where}: 'model' must be a file path or an object")
        if "grid" not in data:
            raise ValidationError(f"{where}: scenarios with a model need a 'grid'")
    else:
        if not isinstance(data["field"], dict):
            raise ParseError(f"{where}: 'field' must be an object")
        needy = sorted({a.type for a in analyses} & NEEDS_MODEL)
        if needy:
            raise ValidationError(f"{where}: analyses {', '.join(needy)} need a model, not only a field")

    grid_spec = data.get("grid")
    if grid_spec is not None and not isinstance(grid_spec, dict):
        raise ParseError(f"{where}: 'grid' must be an object")

    seed = data.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2 ** 64):
        raise ValidationError(f"{where}: seed must be an unsigned 64-bit integer")

    arithmetic = data.get("arithmetic")
    if arithmetic is not None:
        try:
            arithmetic = ArithmeticMode(arithmetic)
        except ValueError:
            raise ValidationError(f"{where}: arithmetic must be 'rational' or 'float'")

    output_dir = data.get("output_dir")
    if output_dir is not None:
        if not isinstance(output_dir, str):
            raise ParseError(f"{where}: 'output_dir' must be a string")
        output_dir = path.parent / output_dir

    return Scenario(
        name=name,
        path=path,
        analyses=analyses,
        model_source=model_source,
        field_source=data.get("field"),
        grid_spec=grid_spec,
        output_dir=output_dir,
        seed=seed,
        arithmetic=arithmetic,
        raw=data,
    )


def load_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    scenario = parse_scenario(load_json(path), path)
    logger.debug(f"Loaded scenario '{scenario.name}' with {len(scenario.analyses)} analysis(es)")
    return scenario


def resolve_settings(scenario: Scenario, config: Config) -> RunSettings:
    """CLI flag > scenario value > environment / .env > default."""
    output_dir = config.output_dir or scenario.output_dir or config.default_output_dir
    arithmetic = config.arithmetic or scenario.arithmetic or config.default_arithmetic
    seed = config.seed if config.seed is not None else (scenario.seed if scenario.seed is not None else 0)
    return RunSettings(
        output_dir=Path(output_dir),
        arithmetic=ArithmeticMode(arithmetic),
        seed=seed,
        atom_grid=config.atom_grid,
        workers=config.workers,
    )


def build_grid(spec: Dict[str, Any], mode: ArithmeticMode) -> UtilityGrid:
    """Grid from explicit points or per-coordinate "lo:hi:step" ranges."""
    if ("points" in spec) == ("ranges" in spec):
        raise ValidationError("grid needs exactly one of 'points' and 'ranges'")
    if "ranges" in spec:
        ranges = spec["ranges"]
        if not isinstance(ranges, list) or not all(isinstance(r, str) for r in ranges):
            raise ParseError("grid 'ranges' must be a list of lo:hi:step strings")
        return UtilityGrid.rectangle([parse_range(r, mode) for r in ranges])
    points = spec["points"]
    if not isinstance(points, list) or not all(isinstance(p, list) for p in points):
        raise ParseError("grid 'points' must be a list of coordinate lists")
    return UtilityGrid(tuple(parse_point(p, mode) for p in points))


def parse_point(raw: Any, mode: ArithmeticMode) -> UtilityPoint:
    if not isinstance(raw, list):
        raise ParseError(f"A utility point must be a list of numbers, got {raw!r}")
    return UtilityPoint(tuple(to_number(v, mode) for v in raw))


def _parse_inline_model(data: Dict[str, Any], mode: ArithmeticMode, where: str) -> Model:
    if data.get("class") == "gumbel":
        K = data.get("K")
        if not isinstance(K, int):
            raise ParseError(f"{where}: gumbel model needs an integer K")
        return GumbelShocks(K, float(to_number(data.get("scale", 1), ArithmeticMode.FLOAT)))
    return parse_model(data, mode, where)


def load_inputs(scenario: Scenario, mode: ArithmeticMode) -> ScenarioInputs:
    """Load the model or field and build the grid in the run's arithmetic."""
    if scenario.field_source is not None:
        prob_field = parse_field(scenario.field_source, mode, where=f"{scenario.path} field")
        if scenario.grid_spec is not None and build_grid(scenario.grid_spec, mode) != prob_field.grid:
            raise ValidationError("Scenario grid differs from the grid of the inline field")
        return ScenarioInputs(model=None, grid=prob_field.grid, field=prob_field)

    if isinstance(scenario.model_source, Path):
        model = _parse_inline_model(load_json(scenario.model_source), mode, str(scenario.model_source))
    else:
        model = _parse_inline_model(scenario.model_source, mode, f"{scenario.path} model")
    grid = build_grid(scenario.grid_spec, mode)
    if isinstance(model, GumbelShocks):
        finite_only = sorted({a.type for a in scenario.analyses} & FINITE_MODEL_ONLY)
        if finite_only:
            raise ValidationError(f"Analyses {', '.join(finite_only)} need a finite-support model")
    logger.info(f"Model: {model.model_class}, K={model.K}; grid: {len(grid)} point(s)")
    return ScenarioInputs(model=model, grid=grid, field=choice_prob_field(model, grid))
