"""
Counterfactual bounds.

Attention interventions (forcing alternative k into every consideration set)
are analysed for ARUM-CS with an explicit witness. Utility-index
counterfactuals are bounded by a linear program over the weights of a
declared finite atom family, which is an inner approximation of the
identified set relative to that family.
"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .core import (
    NEG_INF,
    ChoiceProbField,
    ExtendedReal,
    Interval,
    Number,
    UtilityGrid,
    UtilityPoint,
    as_point,
    k_maximal_point,
)
from .equivalence import arum_e_to_cs, as_consideration_model, epsilon_atom_to_consideration
from .errors import (
    ArgmaxTieError,
    InfeasibleError,
    NoKMaximalPointError,
    ValidationError,
)
from .identification import sup_choice_prob, witness_lower_endpoint
from .model_io import format_number, format_vector, model_hash
from .models import (
    ArumCsDistribution,
    ConsiderationAtom,
    EpsilonAtom,
    FiniteModel,
    Provenance,
    choice_prob_field,
)
from .simplex import solve_lp

logger = logging.getLogger(__name__)

MODEL_CLASSES = ("arum", "arum_e", "arum_cs")

FamilyAtom = Union[EpsilonAtom, ConsiderationAtom]


def attention_intervention_apply(nu: ArumCsDistribution, k: int) -> ArumCsDistribution:
    """Add k to every consideration set; shocks and weights unchanged."""
    if not 0 <= k < nu.K:
        raise ValidationError(f"Alternative index {k} out of range for K={nu.K}")
    atoms = tuple(
        ConsiderationAtom(atom.eps, atom.consideration_set | {k}, atom.weight)
        for atom in nu.atoms
    )
    return ArumCsDistribution(atoms, Provenance("attention_intervention", model_hash(nu)))


def attention_inertness_check(nu: ArumCsDistribution, grid: UtilityGrid, k: int) -> bool:
    """True if forcing attention to k leaves the field unchanged on the grid."""
    return choice_prob_field(attention_intervention_apply(nu, k), grid) == choice_prob_field(nu, grid)


@dataclass(frozen=True)
class AttentionChangeReport:
    """Bounds on the change in p_k from a k-attention intervention."""

    k: int
    lower: Number
    upper: Number
    witness: Optional[ArumCsDistribution]
    per_point_change: Mapping[UtilityPoint, Number] = field(compare=False)
    k_maximal: Optional[UtilityPoint] = None

    @property
    def realized_max_change(self) -> Optional[Number]:
        if not self.per_point_change:
            return None
        return max(self.per_point_change.values())

    def row(self) -> Dict[str, str]:
        realized = self.realized_max_change
        return {
            "k": str(self.k),
            "lower": format_number(self.lower),
            "upper": format_number(self.upper),
            "realized_max_change": "" if realized is None else format_number(realized),
            "k_maximal_point": "" if self.k_maximal is None else format_vector(self.k_maximal),
        }

    def point_rows(self) -> List[Dict[str, str]]:
        return [
            {"point": format_vector(point), "change": format_number(change)}
            for point, change in self.per_point_change.items()
        ]


def _always_wins_shock(atom: ConsiderationAtom, grid: UtilityGrid, k: int) -> Number:
    """A shock for k beating every considered alternative at every grid point."""
    return max(
        point[j] + atom.eps[j] - point[k]
        for point in grid
        for j in atom.consideration_set
    ) + 1


def attention_max_change_set(
    field: ChoiceProbField,
    grid: UtilityGrid,
    k: int,
    nu: Optional[FiniteModel] = None,
) -> AttentionChangeReport:
    """
    Identified set [0, 1 - sup p_k] for the largest change in p_k caused by
    forcing attention to k.

    With a rationalization nu, also builds the witness attaining the upper
    end: start from the lower-endpoint witness (Pr(k considered) = sup p_k),
    then give every atom that ignores k a shock for k large enough that k
    wins everywhere once considered.

    Raises:
        NoKMaximalPointError: grid has no k-maximal point
        ValidationError: nu does not rationalize the field
    """
    if field.grid != grid:
        raise ValidationError("Field is defined on a different grid")
    u_star = k_maximal_point(grid, k)
    if u_star is None:
        raise NoKMaximalPointError(k)
    sup_pk, _ = sup_choice_prob(field, k)
    upper = 1 - sup_pk

    if nu is None:
        return AttentionChangeReport(k, 0, upper, None, {}, u_star)

    if choice_prob_field(nu, grid) != field:
        raise ValidationError("Supplied model does not rationalize the field")

    sparse = arum_e_to_cs(witness_lower_endpoint(as_consideration_model(nu), grid, k))
    atoms = []
    for atom in sparse.atoms:
        if k not in atom.consideration_set:
            atom = atom.with_shock(k, _always_wins_shock(atom, grid, k))
        atoms.append(atom)
    witness = ArumCsDistribution(tuple(atoms), Provenance("attention_max_change_witness", model_hash(nu)))

    before = choice_prob_field(witness, grid)
    after = choice_prob_field(attention_intervention_apply(witness, k), grid)
    changes = {point: after[point][k] - before[point][k] for point in grid}
    report = AttentionChangeReport(k, 0, upper, witness, changes, u_star)
    logger.info(
        f"Attention to {k}: change set [0, {format_number(upper)}], "
        f"witness realizes {format_number(report.realized_max_change)}"
    )
    return report


def epsilon_atom_family(
    values: Sequence[Number],
    K: int,
    allow_neg_inf: bool = False,
) -> List[EpsilonAtom]:
    """
    Every eps in values^K (optionally with -inf as an extra value), as unit
    weight atoms. Atoms with no finite coordinate are skipped.
    """
    levels: List[ExtendedReal] = [ExtendedReal.finite(v) for v in values]
    if allow_neg_inf:
        levels.append(NEG_INF)
    family = []
    for eps in itertools.product(levels, repeat=K):
        if any(e.is_finite for e in eps):
            family.append(EpsilonAtom(tuple(eps), 1))
    return family


def consideration_atom_family(family: Iterable[EpsilonAtom]) -> List[ConsiderationAtom]:
    """Image of an epsilon family under the ARUM-E -> ARUM-CS atom map."""
    return [epsilon_atom_to_consideration(atom) for atom in family]


def drop_tied_atoms(family: Iterable[FamilyAtom], points: Iterable) -> List[FamilyAtom]:
    """Atoms with a unique maximizer at every given point."""
    points = [as_point(p) for p in points]
    kept = []
    for atom in family:
        try:
            for point in points:
                atom.choose(point)
        except ArgmaxTieError:
            continue
        kept.append(atom)
    return kept


@dataclass(frozen=True)
class LpCounterfactualProblem:
    """
    Bound p_k at an off-grid point u_c over all mixtures of atom_family that
    reproduce the field on the grid. Atom weights are ignored; the mixing
    weights are the LP variables.
    """

    grid: UtilityGrid
    field: ChoiceProbField
    u_c: UtilityPoint
    atom_family: Tuple[FamilyAtom, ...]
    model_class: str

    def __post_init__(self):
        object.__setattr__(self, "u_c", as_point(self.u_c))
        object.__setattr__(self, "atom_family", tuple(self.atom_family))
        if self.model_class not in MODEL_CLASSES:
            raise ValidationError(f"Unknown model class {self.model_class!r}")
        if not self.atom_family:
            raise ValidationError("Atom family must be nonempty")
        if self.field.grid != self.grid:
            raise ValidationError("Field is defined on a different grid")
        if self.u_c in self.grid:
            raise ValidationError("Counterfactual point must lie outside the grid")
        if not self.field.is_exact():
            raise ValidationError("LP counterfactual bounds need a field in rational arithmetic")
        expected = ConsiderationAtom if self.model_class == "arum_cs" else EpsilonAtom
        for atom in self.atom_family:
            if not isinstance(atom, expected):
                raise ValidationError(f"{self.model_class} families hold {expected.__name__} atoms")
            if atom.K != self.grid.K:
                raise ValidationError("Atom dimension does not match the grid")
            if self.model_class == "arum" and not atom.is_all_finite:
                raise ValidationError("ARUM families cannot contain -inf shocks")
        for index, atom in enumerate(self.atom_family):
            for point in (*self.grid.points, self.u_c):
                atom.choose(point, index)


@dataclass(frozen=True)
class LpCounterfactualReport:
    """Interval for p_k(u_c) plus the weight vectors attaining each end."""

    model_class: str
    k: int
    interval: Interval
    argmin_weights: Tuple[Fraction, ...]
    argmax_weights: Tuple[Fraction, ...]
    family_size: int

    def row(self) -> Dict[str, str]:
        return {
            "model_class": self.model_class,
            "k": str(self.k),
            "lower": format_number(self.interval.lo),
            "upper": format_number(self.interval.hi),
            "family_size": str(self.family_size),
            "min_support": str(sum(1 for w in self.argmin_weights if w > 0)),
            "max_support": str(sum(1 for w in self.argmax_weights if w > 0)),
        }


def _constraint_system(problem: LpCounterfactualProblem, k: int):
    """Rows: weights sum to 1, then one row per (grid point, alternative)."""
    family = problem.atom_family
    A: List[List[int]] = [[1] * len(family)]
    b: List[Number] = [1]
    choices = {point: [atom.choose(point) for atom in family] for point in problem.grid}
    for point, vector in problem.field.items():
        for j in range(problem.grid.K):
            A.append([1 if chosen == j else 0 for chosen in choices[point]])
            b.append(vector[j])
    objective = [1 if atom.choose(problem.u_c) == k else 0 for atom in family]
    return objective, A, b


def solve_lp_counterfactual(problem: LpCounterfactualProblem, k: int) -> LpCounterfactualReport:
    """
    Minimize and maximize p_k(u_c) over family mixtures matching the field.

    Raises:
        InfeasibleError: the family cannot reproduce the field
    """
    if not 0 <= k < problem.grid.K:
        raise ValidationError(f"Alternative index {k} out of range for K={problem.grid.K}")
    objective, A, b = _constraint_system(problem, k)
    try:
        low = solve_lp(objective, A, b)
    except InfeasibleError:
        raise InfeasibleError(
            f"The {len(problem.atom_family)}-atom {problem.model_class} family cannot reproduce "
            "the field; enrich the atom family"
        )
    high = solve_lp([-c for c in objective], A, b)
    interval = Interval(low.objective, -high.objective)
    logger.info(
        f"LP bounds ({problem.model_class}, {len(problem.atom_family)} atoms) for "
        f"p_{k} at {problem.u_c}: {interval}"
    )
    return LpCounterfactualReport(
        model_class=problem.model_class,
        k=k,
        interval=interval,
        argmin_weights=low.x,
        argmax_weights=high.x,
        family_size=len(problem.atom_family),
    )


def lp_counterfactual_bounds(problem: LpCounterfactualProblem, k: int) -> Interval:
    """[min, max] of p_k(u_c) over family mixtures that reproduce the field."""
    return solve_lp_counterfactual(problem, k).interval


def family_for_class(
    model_class: str,
    values: Sequence[Number],
    K: int,
    points: Iterable,
) -> List[FamilyAtom]:
    """
    Rectangular family for a model class, tie-filtered at the given points.
    arum: finite values; arum_e: values plus -inf; arum_cs: image of the
    arum_e family.
    """
    if model_class not in MODEL_CLASSES:
        raise ValidationError(f"Unknown model class {model_class!r}")
    points = list(points)
    family = epsilon_atom_family(values, K, allow_neg_inf=model_class != "arum")
    family = drop_tied_atoms(family, points)
    if model_class == "arum_cs":
        return consideration_atom_family(family)
    return family


def lp_report_to_dict(report: LpCounterfactualReport) -> Dict[str, Any]:
    return {
        "model_class": report.model_class,
        "k": report.k,
        "lower": format_number(report.interval.lo),
        "upper": format_number(report.interval.hi),
        "family_size": report.family_size,
        "argmin_weights": [format_number(w) for w in report.argmin_weights],
        "argmax_weights": [format_number(w) for w in report.argmax_weights],
    }
