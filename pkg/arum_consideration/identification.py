"""
Identified sets for marginal consideration probabilities.

All set computations here are functions of the choice-probability field
alone; models enter only to build witnesses and to report the consideration
mass of a particular rationalization.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

from .core import (
    FLOAT_TOL,
    NEG_INF,
    ChoiceProbField,
    Interval,
    Number,
    UtilityGrid,
    UtilityPoint,
    as_point,
    is_exact,
    k_maximal_point,
)
from .errors import (
    NoKMaximalPointError,
    NotCartesianProductError,
    ValidationError,
)
from .equivalence import cs_to_arum_e
from .model_io import format_number, format_vector, model_hash
from .models import (
    ArumCsDistribution,
    ArumEDistribution,
    FiniteModel,
    Provenance,
    choice_prob,
    choice_prob_field,
)

logger = logging.getLogger(__name__)


def _check_alternative(k: int, K: int) -> None:
    if not 0 <= k < K:
        raise ValidationError(f"Alternative index {k} out of range for K={K}")


def same_value(a: Number, b: Number) -> bool:
    """Exact equality for rationals, FLOAT_TOL closeness otherwise."""
    if is_exact(a) and is_exact(b):
        return a == b
    return abs(a - b) <= FLOAT_TOL


def is_one(value: Number) -> bool:
    return same_value(value, 1)


def sup_choice_prob(field: ChoiceProbField, k: int) -> Tuple[Number, UtilityPoint]:
    """Largest p_k over the grid and the first grid point attaining it."""
    _check_alternative(k, field.K)
    best_point, best_value = None, None
    for point, vector in field.items():
        if best_value is None or vector[k] > best_value:
            best_point, best_value = point, vector[k]
    return best_value, best_point


def consideration_prob_of(model: FiniteModel, k: int) -> Number:
    """Pr(eps_k > -inf) for ARUM / ARUM-E, Pr(k in S) for ARUM-CS."""
    _check_alternative(k, model.K)
    if isinstance(model, ArumCsDistribution):
        considered = [atom.weight for atom in model.atoms if k in atom.consideration_set]
    else:
        considered = [atom.weight for atom in model.atoms if atom.eps[k].is_finite]
    return sum(considered, model.zero())


@dataclass(frozen=True)
class ConsiderationBoundsReport:
    """Identified set for Pr(k considered)."""

    k: int
    sup_pk: Number
    argmax_point: UtilityPoint
    interval: Interval
    k_maximal_found: bool
    sharp: bool

    def row(self) -> Dict[str, str]:
        return {
            "k": str(self.k),
            "sup_pk": format_number(self.sup_pk),
            "argmax_point": format_vector(self.argmax_point),
            "lower": format_number(self.interval.lo),
            "upper": format_number(self.interval.hi),
            "k_maximal_found": format_number(self.k_maximal_found),
            "sharp": format_number(self.sharp),
        }


def consideration_identified_set(field: ChoiceProbField, k: int) -> ConsiderationBoundsReport:
    """
    [p_k(u*), 1] when the grid has a k-maximal point u* (sharp), otherwise the
    conservative [sup p_k, 1].

    With a k-maximal point, argmax_point is u* itself; p_k(u*) equals the sup
    because p_k rises in u_k and falls in every other coordinate. A field that
    breaks this monotonicity cannot come from any random utility model, so the
    interval falls back to [sup p_k, 1] and is not reported as sharp.
    """
    sup_pk, first_argmax = sup_choice_prob(field, k)
    u_star = k_maximal_point(field.grid, k)
    if u_star is not None:
        lower = field[u_star][k]
        monotone = same_value(lower, sup_pk)
        if not monotone:
            logger.warning(
                f"p_{k} at the {k}-maximal point ({format_number(lower)}) differs from its sup "
                f"({format_number(sup_pk)}); the field is not monotone"
            )
        return ConsiderationBoundsReport(
            k=k,
            sup_pk=sup_pk,
            argmax_point=u_star if monotone else first_argmax,
            interval=Interval(lower if monotone else sup_pk, 1),
            k_maximal_found=True,
            sharp=monotone,
        )
    return ConsiderationBoundsReport(
        k=k,
        sup_pk=sup_pk,
        argmax_point=first_argmax,
        interval=Interval(sup_pk, 1),
        k_maximal_found=False,
        sharp=False,
    )


def witness_lower_endpoint(
    nu: Union[ArumCsDistribution, ArumEDistribution],
    grid: UtilityGrid,
    k: int,
) -> ArumEDistribution:
    """
    ARUM-E rationalization of nu's field that considers k as rarely as the
    data allow: every atom that does not choose k at the k-maximal point u*
    gets eps_k = -inf. Such atoms lose k at every grid point already, so the
    field is unchanged and Pr(eps_k > -inf) = p_k(u*).

    Raises:
        NoKMaximalPointError: grid has no k-maximal point
        ArgmaxTieError: some atom ties at u*
    """
    _check_alternative(k, grid.K)
    u_star = k_maximal_point(grid, k)
    if u_star is None:
        raise NoKMaximalPointError(k)
    mu = cs_to_arum_e(nu) if isinstance(nu, ArumCsDistribution) else nu

    atoms = []
    for index, atom in enumerate(mu.atoms):
        if atom.choose(u_star, index) != k:
            atom = atom.with_shock(k, NEG_INF)
        atoms.append(atom)
    witness = ArumEDistribution(
        tuple(atoms),
        Provenance(construction="witness_lower_endpoint", source_hash=model_hash(nu)),
    )
    logger.debug(f"Lower-endpoint witness for k={k} built at u*={u_star}")
    return witness


@dataclass(frozen=True)
class DiscontinuityRow:
    """One rectangle of the growing-rectangle experiment."""

    index: int
    scale: Number
    grid_size: int
    sup_pk: Number
    interval: Interval
    consideration_prob: Number

    @property
    def width(self) -> Number:
        return self.interval.width

    def row(self) -> Dict[str, str]:
        return {
            "index": str(self.index),
            "s": format_number(self.scale),
            "grid_size": str(self.grid_size),
            "sup_pk": format_number(self.sup_pk),
            "lower": format_number(self.interval.lo),
            "width": format_number(self.width),
            "consideration_prob": format_number(self.consideration_prob),
        }


def discontinuity_experiment(
    model: FiniteModel,
    rectangles: Sequence[UtilityGrid],
    k: int,
    scales: Optional[Sequence[Number]] = None,
) -> List[DiscontinuityRow]:
    """
    Identified interval for Pr(k considered) on each of a nested sequence of
    rectangles. Widths never drop below 1 - Pr_model(k considered), while the
    model's own consideration probability is only approached in the limit.

    Raises:
        NotCartesianProductError: a rectangle is not a product grid
        ValidationError: rectangles are not nested
        NoKMaximalPointError: a rectangle has no k-maximal point
    """
    if not rectangles:
        raise ValidationError("discontinuity_experiment needs at least one rectangle")
    scales = list(scales) if scales is not None else list(range(1, len(rectangles) + 1))
    if len(scales) != len(rectangles):
        raise ValidationError("One scale label is needed per rectangle")

    considered = consideration_prob_of(model, k)
    rows = []
    previous: Optional[UtilityGrid] = None
    for index, (rectangle, scale) in enumerate(zip(rectangles, scales)):
        if not rectangle.is_cartesian_product():
            raise NotCartesianProductError(f"Rectangle {index} is not a Cartesian product grid")
        if previous is not None and not previous.is_subset_of(rectangle):
            raise ValidationError(f"Rectangle {index} does not contain rectangle {index - 1}")
        report = consideration_identified_set(choice_prob_field(model, rectangle), k)
        if not report.k_maximal_found:
            raise NoKMaximalPointError(k, f"rectangle {index} has no {k}-maximal point")
        rows.append(
            DiscontinuityRow(
                index=index,
                scale=scale,
                grid_size=len(rectangle),
                sup_pk=report.sup_pk,
                interval=report.interval,
                consideration_prob=considered,
            )
        )
        logger.debug(f"Rectangle {index} (s={scale}): width {format_number(report.interval.width)}")
        previous = rectangle
    return rows


def _check_subset(B: FrozenSet[int], K: int) -> None:
    if not B:
        raise ValidationError("Subset B must be nonempty")
    if any(not 0 <= k < K for k in B):
        raise ValidationError(f"Subset {sorted(B)} out of range for K={K}")


def subset_attractiveness_diagnostic(field: ChoiceProbField, B) -> Number:
    """max over the grid of sum_{k in B} p_k(u)."""
    B = frozenset(B)
    _check_subset(B, field.K)
    return max(sum(vector[k] for k in sorted(B)) for _, vector in field.items())


def subset_advantage(grid: UtilityGrid, B) -> Optional[Number]:
    """
    Largest simultaneous advantage of B over its complement on the grid,
    max over u of (min_{k in B} u_k - max_{j not in B} u_j). None when B is
    every alternative.
    """
    B = frozenset(B)
    _check_subset(B, grid.K)
    rest = [j for j in range(grid.K) if j not in B]
    if not rest:
        return None
    return max(min(point[k] for k in B) - max(point[j] for j in rest) for point in grid)


@dataclass(frozen=True)
class SubsetDiagnostic:
    subset: Tuple[int, ...]
    sup_mass: Number
    advantage: Optional[Number]

    @property
    def reaches_one(self) -> bool:
        return is_one(self.sup_mass)

    def row(self) -> Dict[str, str]:
        return {
            "subset": format_vector(self.subset),
            "sup_mass": format_number(self.sup_mass),
            "max_advantage": "" if self.advantage is None else format_number(self.advantage),
            "reaches_one": format_number(self.reaches_one),
        }


def subset_diagnostics(field: ChoiceProbField) -> List[SubsetDiagnostic]:
    """The mass diagnostic for each of the 2^K - 2 nonempty proper subsets."""
    results = []
    for size in range(1, field.K):
        for subset in itertools.combinations(range(field.K), size):
            results.append(
                SubsetDiagnostic(
                    subset=subset,
                    sup_mass=subset_attractiveness_diagnostic(field, subset),
                    advantage=subset_advantage(field.grid, subset),
                )
            )
    return results


def full_consideration_verdict(field: ChoiceProbField) -> Dict[int, bool]:
    """
    Per alternative: is the field consistent with k always being considered
    at this grid's scale, i.e. does sup p_k reach 1?
    """
    return {k: is_one(sup_choice_prob(field, k)[0]) for k in range(field.K)}


def covariate_field(
    model: FiniteModel,
    covariates: UtilityGrid,
    index_function: Callable[[UtilityPoint], Sequence[Number]],
) -> ChoiceProbField:
    """p~(x) = p(v(x)) over a covariate grid, for a known index function v."""
    probs = {}
    for x in covariates:
        probs[x] = choice_prob(model, as_point(index_function(x)))
    return ChoiceProbField(covariates, probs)


def covariate_consideration_bounds(ptilde: ChoiceProbField, k: int) -> Interval:
    """
    [max over X of p~_k(x), 1] for a covariate grid X that is a Cartesian
    product of finite coordinate sets.

    Raises:
        NotCartesianProductError: X is not a product grid
    """
    if not ptilde.grid.is_cartesian_product():
        raise NotCartesianProductError("Covariate grid is not a Cartesian product of coordinate sets")
    sup_pk, _ = sup_choice_prob(ptilde, k)
    return Interval(sup_pk, 1)


def verdict_rows(verdict: Dict[int, bool]) -> List[Dict[str, Any]]:
    return [
        {"k": str(k), "consistent_with_full_consideration": "yes" if ok else "no"}
        for k, ok in sorted(verdict.items())
    ]
