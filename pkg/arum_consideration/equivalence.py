"""
Constructive transformations between ARUM, ARUM-E and ARUM-CS, and exact
verification that two models produce the same choice-probability field.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Tuple

from .core import (
    NEG_INF,
    ExtendedReal,
    Number,
    UtilityGrid,
    all_exact,
)
from .errors import ValidationError
from .model_io import format_number, format_vector, model_hash
from .models import (
    ArumCsDistribution,
    ArumDistribution,
    ArumEDistribution,
    ConsiderationAtom,
    EpsilonAtom,
    FiniteModel,
    Provenance,
    choice_prob_field,
)

logger = logging.getLogger(__name__)

# Alternative used as numeraire when bounding never-chosen shocks.
NUMERAIRE = 0


def _provenance(construction: str, source: FiniteModel) -> Provenance:
    return Provenance(construction=construction, source_hash=model_hash(source))


def epsilon_atom_to_consideration(atom: EpsilonAtom) -> ConsiderationAtom:
    """S = finite coordinates; -inf coordinates become 0."""
    eps = tuple(e.value if e.is_finite else 0 for e in atom.eps)
    return ConsiderationAtom(eps, atom.finite_indices(), atom.weight)


def consideration_atom_to_epsilon(atom: ConsiderationAtom) -> EpsilonAtom:
    """Mask shocks outside the consideration set with -inf."""
    eps = tuple(
        ExtendedReal.finite(e) if k in atom.consideration_set else NEG_INF
        for k, e in enumerate(atom.eps)
    )
    return EpsilonAtom(eps, atom.weight)


def arum_e_to_cs(mu: ArumEDistribution) -> ArumCsDistribution:
    """ARUM-E -> ARUM-CS: consider exactly the alternatives with finite shocks."""
    atoms = tuple(epsilon_atom_to_consideration(atom) for atom in mu.atoms)
    return ArumCsDistribution(atoms, _provenance("arum_e_to_cs", mu))


def cs_to_arum_e(nu: ArumCsDistribution) -> ArumEDistribution:
    """ARUM-CS -> ARUM-E: set eps_k = -inf for k outside S."""
    atoms = tuple(consideration_atom_to_epsilon(atom) for atom in nu.atoms)
    return ArumEDistribution(atoms, _provenance("cs_to_arum_e", nu))


def embed_arum_in_cs(model: ArumDistribution) -> ArumCsDistribution:
    """ARUM as the ARUM-CS model whose consideration set is always everything."""
    full = frozenset(range(model.K))
    atoms = tuple(
        ConsiderationAtom(tuple(e.value for e in atom.eps), full, atom.weight)
        for atom in model.atoms
    )
    return ArumCsDistribution(atoms, _provenance("embed_arum_in_cs", model))


def as_consideration_model(model: FiniteModel) -> ArumCsDistribution:
    """Any finite model viewed as ARUM-CS (identity on ARUM-CS input)."""
    if isinstance(model, ArumCsDistribution):
        return model
    if isinstance(model, ArumDistribution):
        return embed_arum_in_cs(model)
    return arum_e_to_cs(model)


def never_chosen_shock(
    atom: ConsiderationAtom,
    grid: UtilityGrid,
    k: int,
) -> Number:
    """
    Shock for an unconsidered alternative k low enough that k loses at every
    point of the grid (and of its convex hull) by a unit margin:

        min over u, l in S of (u_l - u_0 + eps_l) - max over u of (u_k - u_0) - 1
    """
    floor = min(
        point[l] - point[NUMERAIRE] + atom.eps[l]
        for point in grid
        for l in atom.consideration_set
    )
    reach = max(point[k] - point[NUMERAIRE] for point in grid)
    return floor - reach - 1


def cs_to_arum(nu: ArumCsDistribution, grid: UtilityGrid) -> ArumDistribution:
    """
    ARUM-CS -> ARUM on a finite grid.

    Considered shocks are kept; each unconsidered shock is replaced by
    never_chosen_shock, so every atom picks the same alternative as before at
    every grid point while considering everything.
    """
    if grid.K != nu.K:
        raise ValidationError(f"Grid has K={grid.K} but model has K={nu.K}")
    atoms = []
    for atom in nu.atoms:
        eps = [
            atom.eps[k] if k in atom.consideration_set else never_chosen_shock(atom, grid, k)
            for k in range(nu.K)
        ]
        atoms.append(EpsilonAtom(tuple(ExtendedReal.finite(e) for e in eps), atom.weight))
    logger.debug(f"cs_to_arum: rebuilt {len(atoms)} atom(s) on a {len(grid)}-point grid")
    return ArumDistribution(tuple(atoms), _provenance("cs_to_arum", nu))


def atomwise_choices_agree(
    model_a: FiniteModel,
    model_b: FiniteModel,
    grid: UtilityGrid,
) -> bool:
    """True if atom i of each model chooses the same alternative at every grid point."""
    if len(model_a.atoms) != len(model_b.atoms):
        return False
    for point in grid:
        for index, (a, b) in enumerate(zip(model_a.atoms, model_b.atoms)):
            if a.choose(point, index) != b.choose(point, index):
                return False
    return True


@dataclass(frozen=True)
class EquivalenceReport:
    """Per-point discrepancies between the fields of two models."""

    grid: UtilityGrid
    discrepancies: Tuple[Number, ...]
    tol: Number
    label_a: str = "model_a"
    label_b: str = "model_b"

    @property
    def max_discrepancy(self) -> Number:
        return max(self.discrepancies)

    @property
    def passed(self) -> bool:
        return self.max_discrepancy <= self.tol

    def rows(self) -> List[Dict[str, str]]:
        return [
            {
                "model_a": self.label_a,
                "model_b": self.label_b,
                "point": format_vector(point),
                "max_abs_discrepancy": format_number(gap),
            }
            for point, gap in zip(self.grid, self.discrepancies)
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "model_a": self.label_a,
            "model_b": self.label_b,
            "grid_size": len(self.grid),
            "tol": format_number(self.tol),
            "max_discrepancy": format_number(self.max_discrepancy),
            "passed": self.passed,
        }


def verify_equivalence(
    model_a: FiniteModel,
    model_b: FiniteModel,
    grid: UtilityGrid,
    tol: Number = 0,
    label_a: str = "model_a",
    label_b: str = "model_b",
) -> EquivalenceReport:
    """
    Compare the two fields point by point.

    Use tol=0 with rational models; the comparison is then exact.
    """
    if model_a.K != model_b.K:
        raise ValidationError(f"Models differ in K: {model_a.K} vs {model_b.K}")
    field_a = choice_prob_field(model_a, grid)
    field_b = choice_prob_field(model_b, grid)
    gaps = tuple(field_a[point].max_abs_difference(field_b[point]) for point in grid)
    report = EquivalenceReport(grid, gaps, tol, label_a, label_b)
    exactness = "exact" if all_exact(gaps) else "float"
    logger.info(
        f"Equivalence {label_a} vs {label_b}: max discrepancy "
        f"{format_number(report.max_discrepancy)} ({exactness}), "
        f"{'pass' if report.passed else 'FAIL'}"
    )
    return report
