"""
Core value types shared by every other module.

Two arithmetic backends are supported: exact rationals (fractions.Fraction)
and floating point. Types accept either; an object whose numbers are all
rationals validates its invariants exactly, otherwise within FLOAT_TOL.
"""

import itertools
import math
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from enum import Enum
from fractions import Fraction
from functools import total_ordering
from types import MappingProxyType
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import ParseError, ValidationError

Number = Union[Fraction, float, int]

FLOAT_TOL = 1e-12
NEG_INF_LITERALS = ("-inf", "−inf", "-infinity", "−infinity")


class ArithmeticMode(str, Enum):
    """Backend used when parsing numbers from files."""

    RATIONAL = "rational"
    FLOAT = "float"


def is_exact(value: Number) -> bool:
    """True for rationals and ints (bools excluded)."""
    return isinstance(value, (Fraction, int)) and not isinstance(value, bool)


def all_exact(values) -> bool:
    return all(is_exact(v) for v in values)


def is_finite_number(value: Number) -> bool:
    if is_exact(value):
        return True
    return isinstance(value, float) and math.isfinite(value)


def to_number(value, mode: ArithmeticMode = ArithmeticMode.RATIONAL) -> Number:
    """
    Convert a JSON scalar, decimal string or number to the backend's type.

    Decimal strings and JSON floats go through Decimal so that "0.6" becomes
    exactly 3/5 in rational mode. Strings of the form "p/q" are accepted too.

    Raises:
        ParseError: value is not numeric
        ValidationError: value is NaN or infinite
    """
    if isinstance(value, bool) or value is None:
        raise ParseError(f"Not a number: {value!r}")

    if isinstance(value, str):
        text = value.strip()
        if text.lower() in NEG_INF_LITERALS:
            raise ValidationError(f"Non-finite value not allowed here: {value!r}")
        try:
            if "/" in text:
                exact = Fraction(text)
            else:
                parsed = Decimal(text)
                if not parsed.is_finite():
                    raise ValidationError(f"Non-finite value not allowed here: {value!r}")
                exact = Fraction(parsed)
        except (InvalidOperation, ValueError, ZeroDivisionError):
            raise ParseError(f"Not a number: {value!r}")
    elif isinstance(value, Decimal):
        if not value.is_finite():
            raise ValidationError(f"Non-finite value not allowed here: {value!r}")
        exact = Fraction(value)
    elif isinstance(value, float):
        if not math.isfinite(value):
            raise ValidationError(f"Non-finite value not allowed here: {value!r}")
        exact = Fraction(Decimal(repr(value)))
    elif isinstance(value, (int, Fraction)):
        exact = Fraction(value)
    else:
        try:
            return to_number(float(value), mode)
        except (TypeError, ValueError):
            raise ParseError(f"Not a number: {value!r}")

    if ArithmeticMode(mode) is ArithmeticMode.FLOAT:
        return float(exact)
    return exact


@total_ordering
@dataclass(frozen=True)
class ExtendedReal:
    """A finite real or negative infinity (value=None)."""

    value: Optional[Number] = None

    def __post_init__(self):
        if self.value is not None and not is_finite_number(self.value):
            raise ValidationError(f"ExtendedReal must be finite or -inf, got {self.value!r}")

    @classmethod
    def finite(cls, value: Number) -> "ExtendedReal":
        if value is None:
            raise ValidationError("Finite ExtendedReal requires a value")
        return cls(value)

    @classmethod
    def neg_inf(cls) -> "ExtendedReal":
        return cls(None)

    @classmethod
    def parse(cls, raw, mode: ArithmeticMode = ArithmeticMode.RATIONAL) -> "ExtendedReal":
        if isinstance(raw, str) and raw.strip().lower() in NEG_INF_LITERALS:
            return cls.neg_inf()
        if isinstance(raw, float) and raw == -math.inf:
            return cls.neg_inf()
        return cls.finite(to_number(raw, mode))

    @property
    def is_finite(self) -> bool:
        return self.value is not None

    def __lt__(self, other: "ExtendedReal") -> bool:
        if not isinstance(other, ExtendedReal):
            return NotImplemented
        if self.value is None:
            return other.value is not None
        if other.value is None:
            return False
        return self.value < other.value

    def __add__(self, other: Number) -> "ExtendedReal":
        return extended_add(self, other)

    def __str__(self) -> str:
        return "-inf" if self.value is None else str(self.value)


NEG_INF = ExtendedReal.neg_inf()


def extended_add(a: ExtendedReal, b: Number) -> ExtendedReal:
    """a + b on the extended reals; -inf absorbs any finite b."""
    if not is_finite_number(b):
        raise ValidationError(f"extended_add requires a finite summand, got {b!r}")
    if not a.is_finite:
        return NEG_INF
    return ExtendedReal(a.value + b)


@dataclass(frozen=True)
class UtilityPoint:
    """A vector of K >= 2 finite utility indices."""

    u: Tuple[Number, ...]

    def __post_init__(self):
        object.__setattr__(self, "u", tuple(self.u))
        if len(self.u) < 2:
            raise ValidationError(f"UtilityPoint needs K >= 2 coordinates, got {len(self.u)}")
        for value in self.u:
            if not is_finite_number(value):
                raise ValidationError(f"UtilityPoint coordinates must be finite, got {value!r}")

    @classmethod
    def of(cls, *values: Number) -> "UtilityPoint":
        return cls(tuple(values))

    @property
    def K(self) -> int:
        return len(self.u)

    def __len__(self) -> int:
        return len(self.u)

    def __getitem__(self, k: int) -> Number:
        return self.u[k]

    def __iter__(self) -> Iterator[Number]:
        return iter(self.u)

    def shifted(self, k: int, h: Number) -> "UtilityPoint":
        """Copy with coordinate k moved by h."""
        values = list(self.u)
        values[k] = values[k] + h
        return UtilityPoint(tuple(values))

    def lerp(self, other: "UtilityPoint", t: Number) -> "UtilityPoint":
        """Point t of the way from self to other."""
        return UtilityPoint(tuple(a + t * (b - a) for a, b in zip(self.u, other.u)))

    def __str__(self) -> str:
        return "(" + ", ".join(str(v) for v in self.u) + ")"


def as_point(values) -> UtilityPoint:
    return values if isinstance(values, UtilityPoint) else UtilityPoint(tuple(values))


@dataclass(frozen=True)
class UtilityGrid:
    """A finite ordered set of utility points; first-match tie-breaks use this order."""

    points: Tuple[UtilityPoint, ...]

    def __post_init__(self):
        points = tuple(as_point(p) for p in self.points)
        object.__setattr__(self, "points", points)
        if not points:
            raise ValidationError("UtilityGrid must be nonempty")
        K = points[0].K
        if any(p.K != K for p in points):
            raise ValidationError("All grid points must share the same dimension K")
        if len(set(points)) != len(points):
            raise ValidationError("UtilityGrid contains duplicate points")

    @classmethod
    def rectangle(cls, coordinates: Sequence[Sequence[Number]]) -> "UtilityGrid":
        """Cartesian product of per-coordinate value lists, in lexicographic order."""
        return cls(tuple(UtilityPoint(tuple(p)) for p in itertools.product(*coordinates)))

    @property
    def K(self) -> int:
        return self.points[0].K

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[UtilityPoint]:
        return iter(self.points)

    def __contains__(self, point) -> bool:
        return as_point(point) in set(self.points)

    def coordinate_values(self) -> List[List[Number]]:
        """Sorted distinct values taken by each coordinate."""
        return [sorted({p[k] for p in self.points}) for k in range(self.K)]

    def is_cartesian_product(self) -> bool:
        sizes = [len(values) for values in self.coordinate_values()]
        return math.prod(sizes) == len(self.points)

    def is_subset_of(self, other: "UtilityGrid") -> bool:
        return set(self.points) <= set(other.points)


def parse_range(spec: str, mode: ArithmeticMode = ArithmeticMode.RATIONAL) -> List[Number]:
    """
    Expand "lo:hi:step" into lo, lo+step, ... up to and including hi.

    Stepping is done in exact arithmetic and converted at the end so float
    mode does not accumulate drift.
    """
    parts = spec.split(":")
    if len(parts) != 3:
        raise ParseError(f"Range must look like lo:hi:step, got {spec!r}")
    lo, hi, step = (to_number(p, ArithmeticMode.RATIONAL) for p in parts)
    if step <= 0:
        raise ValidationError(f"Range step must be positive: {spec!r}")
    if hi < lo:
        raise ValidationError(f"Range upper end below lower end: {spec!r}")
    count = int((hi - lo) // step) + 1
    values = [lo + i * step for i in range(count)]
    if ArithmeticMode(mode) is ArithmeticMode.FLOAT:
        return [float(v) for v in values]
    return values


@dataclass(frozen=True)
class SimplexVector:
    """Choice probabilities: coordinates in [0, 1] summing to 1."""

    p: Tuple[Number, ...]

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(self.p))
        if not self.p:
            raise ValidationError("SimplexVector must be nonempty")
        for value in self.p:
            if not is_finite_number(value) or value < 0 or value > 1:
                raise ValidationError(f"Probability outside [0, 1]: {value!r}")
        total = sum(self.p)
        if all_exact(self.p):
            if total != 1:
                raise ValidationError(f"Probabilities sum to {total}, not 1")
        elif abs(total - 1) > FLOAT_TOL:
            raise ValidationError(f"Probabilities sum to {total!r}, not 1")

    @property
    def K(self) -> int:
        return len(self.p)

    def __len__(self) -> int:
        return len(self.p)

    def __getitem__(self, k: int) -> Number:
        return self.p[k]

    def __iter__(self) -> Iterator[Number]:
        return iter(self.p)

    def max_abs_difference(self, other: "SimplexVector") -> Number:
        return max(abs(a - b) for a, b in zip(self.p, other.p))


@dataclass(frozen=True)
class ChoiceProbField:
    """The map p : U -> simplex, one SimplexVector per grid point."""

    grid: UtilityGrid
    probs: Mapping[UtilityPoint, SimplexVector] = field(compare=False)

    def __post_init__(self):
        probs: Dict[UtilityPoint, SimplexVector] = {}
        for point, vector in self.probs.items():
            vector = vector if isinstance(vector, SimplexVector) else SimplexVector(tuple(vector))
            probs[as_point(point)] = vector
        if set(probs) != set(self.grid.points):
            raise ValidationError("Field must assign exactly one SimplexVector to every grid point")
        if any(v.K != self.grid.K for v in probs.values()):
            raise ValidationError("Field vectors must have dimension K")
        object.__setattr__(self, "probs", MappingProxyType(probs))

    @property
    def K(self) -> int:
        return self.grid.K

    def __getitem__(self, point) -> SimplexVector:
        return self.probs[as_point(point)]

    def items(self) -> Iterator[Tuple[UtilityPoint, SimplexVector]]:
        """(point, vector) pairs in grid order."""
        for point in self.grid.points:
            yield point, self.probs[point]

    def coordinate(self, k: int) -> List[Number]:
        return [self.probs[point][k] for point in self.grid.points]

    def is_exact(self) -> bool:
        return all(all_exact(v.p) for v in self.probs.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChoiceProbField):
            return NotImplemented
        return self.grid == other.grid and dict(self.probs) == dict(other.probs)


@dataclass(frozen=True)
class Interval:
    """An interval [lo, hi] (endpoint closedness recorded)."""

    lo: Number
    hi: Number
    closed_lo: bool = True
    closed_hi: bool = True

    def __post_init__(self):
        if self.hi < self.lo:
            raise ValidationError(f"Interval lower end {self.lo} exceeds upper end {self.hi}")

    @property
    def width(self) -> Number:
        return self.hi - self.lo

    def contains(self, value: Number) -> bool:
        above = value >= self.lo if self.closed_lo else value > self.lo
        below = value <= self.hi if self.closed_hi else value < self.hi
        return above and below

    def is_subset_of(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def __str__(self) -> str:
        left = "[" if self.closed_lo else "("
        right = "]" if self.closed_hi else ")"
        return f"{left}{self.lo}, {self.hi}{right}"


def k_maximal_point(grid: UtilityGrid, k: int) -> Optional[UtilityPoint]:
    """
    First grid point u* with u*_k - u*_j >= w_k - w_j for every w in the grid
    and every alternative j, or None if no grid point qualifies.
    """
    if not 0 <= k < grid.K:
        raise ValidationError(f"Alternative index {k} out of range for K={grid.K}")
    best_gap = [max(w[k] - w[j] for w in grid) for j in range(grid.K)]
    for point in grid:
        if all(point[k] - point[j] >= best_gap[j] for j in range(grid.K)):
            return point
    return None


def utility_difference_bound(grid: UtilityGrid) -> Number:
    """max over grid points and pairs (j, k) of |u_k - u_j|."""
    return max(max(point) - min(point) for point in grid)
