"""
JSON codec for model files and probability fields, plus content hashing.

Model file layout (schema_version 1):

    {"schema_version": 1, "class": "arum" | "arum_e" | "arum_cs", "K": 2,
     "atoms": [{"eps": ["0.5", "-inf"], "S": [0, 1], "w": "0.6"}, ...]}

"S" is only allowed for arum_cs atoms. Numbers may be JSON numbers or
decimal strings; both are parsed through Decimal.
"""

import hashlib
import json
import logging
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Union

from .core import (
    ArithmeticMode,
    ChoiceProbField,
    ExtendedReal,
    UtilityGrid,
    UtilityPoint,
    to_number,
)
from .errors import ParseError
from .models import (
    ArumCsDistribution,
    ArumDistribution,
    ArumEDistribution,
    ConsiderationAtom,
    EpsilonAtom,
    FiniteModel,
)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

MODEL_CLASSES = {
    "arum": ArumDistribution,
    "arum_e": ArumEDistribution,
    "arum_cs": ArumCsDistribution,
}


def load_json(path: Union[str, Path]) -> Any:
    """Read a JSON file with floats kept as Decimal."""
    path = Path(path)
    try:
        with path.open(encoding="utf-8") as handle:
            return json.load(handle, parse_float=Decimal)
    except FileNotFoundError:
        raise ParseError(f"File not found: {path}")
    except json.JSONDecodeError as e:
        raise ParseError(f"Invalid JSON in {path}: {e}")


def format_number(value) -> str:
    """
    Deterministic text for a number.

    Rationals with a terminating decimal expansion print as decimals
    ("0.6"), other rationals as "p/q", floats with repr.
    """
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, ExtendedReal):
        return "-inf" if not value.is_finite else format_number(value.value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        rest, twos, fives = value.denominator, 0, 0
        while rest % 2 == 0:
            rest //= 2
            twos += 1
        while rest % 5 == 0:
            rest //= 5
            fives += 1
        if rest != 1:
            return f"{value.numerator}/{value.denominator}"
        digits = max(twos, fives)
        scaled = str(abs(value.numerator) * 10 ** digits // value.denominator).rjust(digits + 1, "0")
        sign = "-" if value < 0 else ""
        return f"{sign}{scaled[:-digits]}.{scaled[-digits:]}"
    return repr(float(value))


def format_vector(values) -> str:
    """Coordinates joined with ';' (keeps CSV cells unquoted)."""
    return ";".join(format_number(v) for v in values)


def _require(data: Dict[str, Any], key: str, where: str) -> Any:
    if key not in data:
        raise ParseError(f"Missing '{key}' in {where}")
    return data[key]


def _check_schema_version(data: Dict[str, Any], where: str) -> None:
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ParseError(f"Unsupported schema_version {version} in {where}")


def parse_model(
    data: Dict[str, Any],
    mode: ArithmeticMode = ArithmeticMode.RATIONAL,
    where: str = "model",
) -> FiniteModel:
    """Build a finite model from its JSON dictionary."""
    if not isinstance(data, dict):
        raise ParseError(f"{where} must be a JSON object")
    _check_schema_version(data, where)

    model_class = _require(data, "class", where)
    if model_class not in MODEL_CLASSES:
        raise ParseError(f"Unknown model class {model_class!r} in {where}")
    K = _require(data, "K", where)
    raw_atoms = _require(data, "atoms", where)
    if not isinstance(K, int) or K < 2:
        raise ParseError(f"K must be an integer >= 2 in {where}")
    if not isinstance(raw_atoms, list):
        raise ParseError(f"'atoms' must be a list in {where}")

    atoms = []
    for index, raw in enumerate(raw_atoms):
        atom_where = f"{where} atom {index}"
        if not isinstance(raw, dict):
            raise ParseError(f"{atom_where} must be a JSON object")
        raw_eps = _require(raw, "eps", atom_where)
        if not isinstance(raw_eps, list) or len(raw_eps) != K:
            raise ParseError(f"{atom_where}: 'eps' must list K={K} values")
        weight = to_number(_require(raw, "w", atom_where), mode)

        if model_class == "arum_cs":
            raw_set = _require(raw, "S", atom_where)
            if not isinstance(raw_set, list) or not all(isinstance(k, int) for k in raw_set):
                raise ParseError(f"{atom_where}: 'S' must be a list of alternative indices")
            eps = tuple(to_number(v, mode) for v in raw_eps)
            atoms.append(ConsiderationAtom(eps, frozenset(raw_set), weight))
        else:
            if "S" in raw:
                raise ParseError(f"{atom_where}: 'S' is only allowed for arum_cs models")
            eps = tuple(ExtendedReal.parse(v, mode) for v in raw_eps)
            atoms.append(EpsilonAtom(eps, weight))

    model = MODEL_CLASSES[model_class](tuple(atoms))
    logger.debug(f"Parsed {model_class} model with {len(atoms)} atom(s), K={K}")
    return model


def load_model(path: Union[str, Path], mode: ArithmeticMode = ArithmeticMode.RATIONAL) -> FiniteModel:
    return parse_model(load_json(path), mode, where=str(path))


def model_to_dict(model: FiniteModel) -> Dict[str, Any]:
    """Canonical JSON dictionary; numbers as strings so rationals survive."""
    atoms: List[Dict[str, Any]] = []
    for atom in model.atoms:
        entry: Dict[str, Any] = {
            "eps": [format_number(e) for e in atom.eps],
            "w": format_number(atom.weight),
        }
        if isinstance(atom, ConsiderationAtom):
            entry["S"] = sorted(atom.consideration_set)
        atoms.append(entry)
    data: Dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "class": model.model_class,
        "K": model.K,
        "atoms": atoms,
    }
    if model.provenance is not None:
        data["provenance"] = {
            "construction": model.provenance.construction,
            "source_hash": model.provenance.source_hash,
        }
    return data


def content_hash(data: Any) -> str:
    """16-character SHA-256 hex digest of canonical JSON."""
    json_str = json.dumps(data, sort_keys=True, ensure_ascii=True, default=str)
    return hashlib.sha256(json_str.encode()).hexdigest()[:16]


def model_hash(model: FiniteModel) -> str:
    """Hash of the model's atoms; provenance is excluded."""
    data = model_to_dict(model)
    data.pop("provenance", None)
    return content_hash(data)


def parse_field(
    data: Dict[str, Any],
    mode: ArithmeticMode = ArithmeticMode.RATIONAL,
    where: str = "field",
) -> ChoiceProbField:
    """Build a ChoiceProbField from {"points": [...], "probs": [...]}."""
    if not isinstance(data, dict):
        raise ParseError(f"{where} must be a JSON object")
    _check_schema_version(data, where)
    raw_points = _require(data, "points", where)
    raw_probs = _require(data, "probs", where)
    if not isinstance(raw_points, list) or not isinstance(raw_probs, list):
        raise ParseError(f"{where}: 'points' and 'probs' must be lists")
    if len(raw_points) != len(raw_probs):
        raise ParseError(f"{where}: 'points' and 'probs' differ in length")

    points = [UtilityPoint(tuple(to_number(v, mode) for v in p)) for p in raw_points]
    probs = {
        point: tuple(to_number(v, mode) for v in row)
        for point, row in zip(points, raw_probs)
    }
    return ChoiceProbField(UtilityGrid(tuple(points)), probs)


def field_to_dict(field: ChoiceProbField) -> Dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "K": field.K,
        "points": [[format_number(v) for v in point] for point in field.grid],
        "probs": [[format_number(v) for v in vector] for _, vector in field.items()],
    }
