"""
Welfare: envelope-theorem checks, welfare changes along a path of utility
indices, and the attention-welfare identified set with its witness.

Welfare is social surplus V(u) in utils. Path integrals only need choice
probabilities, so they apply to any rationalization of a field.
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from scipy.special import roots_legendre

from .core import (
    ChoiceProbField,
    Number,
    SimplexVector,
    UtilityGrid,
    UtilityPoint,
    all_exact,
    as_point,
    k_maximal_point,
)
from .counterfactual import attention_intervention_apply
from .equivalence import arum_e_to_cs
from .errors import FullConsiderationError, NoKMaximalPointError, ValidationError
from .identification import is_one, sup_choice_prob, witness_lower_endpoint
from .model_io import format_number, format_vector, model_hash
from .models import (
    ArumCsDistribution,
    GumbelShocks,
    Model,
    Provenance,
    choice_prob,
    choice_prob_field,
    social_surplus,
)

logger = logging.getLogger(__name__)

DEFAULT_PANELS = 64
GAUSS_POINTS = 5
DEFAULT_STEP = 1e-4

ProbEvaluator = Callable[[UtilityPoint], SimplexVector]


class WelfareSetKind(str, Enum):
    POINT = "point"
    UNBOUNDED_ABOVE = "unbounded_above"


@dataclass(frozen=True)
class WelfareSet:
    """Identified set for the welfare effect of an attention intervention: {0} or [0, inf)."""

    kind: WelfareSetKind
    lower: Number = 0

    def __post_init__(self):
        if self.lower != 0:
            raise ValidationError("Welfare sets have lower bound 0")

    @classmethod
    def point(cls) -> "WelfareSet":
        return cls(WelfareSetKind.POINT)

    @classmethod
    def unbounded_above(cls) -> "WelfareSet":
        return cls(WelfareSetKind.UNBOUNDED_ABOVE)

    @property
    def upper(self) -> Optional[Number]:
        """0 for the point set, None (no upper bound) otherwise."""
        return 0 if self.kind == WelfareSetKind.POINT else None

    def __str__(self) -> str:
        return "{0}" if self.kind == WelfareSetKind.POINT else "[0, inf)"


def _step_for(model: Model, u: UtilityPoint, h: Number) -> Number:
    """Exact step for exact models at exact points, float otherwise."""
    if isinstance(model, GumbelShocks) or not model.is_exact or not all_exact(u):
        return float(h)
    return Fraction(h)


def envelope_check(model: Model, u, h: Number = DEFAULT_STEP) -> Number:
    """
    max_k |p_k(u) - (V(u + h e_k) - V(u - h e_k)) / 2h|.

    Exact models at exact points are differenced in rationals, so the
    deviation is exactly 0 once h is below every atom's winning margin.

    Raises:
        ArgmaxTieError: a tie at u or at one of the 2K shifted points
    """
    if not h > 0:
        raise ValidationError(f"Finite-difference step must be positive, got {h}")
    u = as_point(u)
    step = _step_for(model, u, h)
    probs = choice_prob(model, u)
    deviations = []
    for k in range(u.K):
        slope = (social_surplus(model, u.shifted(k, step)) - social_surplus(model, u.shifted(k, -step))) / (2 * step)
        deviations.append(abs(probs[k] - slope))
    return max(deviations)


def envelope_convergence_ratio(model: Model, u, h: Number = 1e-3) -> Optional[float]:
    """
    deviation(h) / deviation(h/2); about 4 for smooth V (central differences
    are second order). None when the half-step deviation is exactly 0.
    """
    coarse = envelope_check(model, u, h)
    fine = envelope_check(model, u, h / 2)
    if fine == 0:
        return None
    return float(coarse) / float(fine)


def welfare_change_exact(model: Model, u, u_tilde) -> Number:
    """V(u_tilde) - V(u) from the model's own surplus."""
    return social_surplus(model, as_point(u_tilde)) - social_surplus(model, as_point(u))


def model_path_breakpoints(model: Model, u, u_tilde) -> List[Number]:
    """
    Parameters t in (0, 1) where two considered alternatives of some atom
    have equal utility along u + t (u_tilde - u). Every choice switch on the
    segment is among them. Empty for Gumbel shocks.
    """
    if isinstance(model, GumbelShocks):
        return []
    u, u_tilde = as_point(u), as_point(u_tilde)
    direction = [b - a for a, b in zip(u, u_tilde)]
    found = set()
    for atom in model.atoms:
        scores = atom.scores(u)
        considered = [j for j, s in enumerate(scores) if s is not None]
        for i, j in itertools.combinations(considered, 2):
            slope = direction[j] - direction[i]
            if slope == 0:
                continue
            t = (scores[i] - scores[j]) / slope
            if 0 < t < 1:
                found.add(t)
    return sorted(found)


def _panel_edges(panels: int, breakpoints: Sequence[Number]) -> List[float]:
    edges = {i / panels for i in range(panels + 1)}
    edges.update(float(t) for t in breakpoints if 0 < t < 1)
    return sorted(edges)


def _integrand(prob_evaluator: ProbEvaluator, u: UtilityPoint, u_tilde: UtilityPoint, t: float) -> float:
    probs = prob_evaluator(u.lerp(u_tilde, t))
    return math.fsum(float(p) * float(b - a) for p, a, b in zip(probs, u, u_tilde))


def welfare_change_path_integral(
    prob_evaluator: ProbEvaluator,
    u,
    u_tilde,
    panels: int = DEFAULT_PANELS,
    breakpoints: Sequence[Number] = (),
    workers: int = 1,
) -> float:
    """
    Integral over t in [0, 1] of p(u + t (u_tilde - u)) . (u_tilde - u).

    Composite 5-point Gauss-Legendre on `panels` equal panels, further split
    at `breakpoints`. With the breakpoints of a finite model the integrand is
    constant on each piece and the rule is exact up to rounding.

    Args:
        prob_evaluator: maps a UtilityPoint to choice probabilities
        u: start of the segment
        u_tilde: end of the segment
        panels: number of equal panels (>= 1)
        breakpoints: extra panel edges in (0, 1)
        workers: threads used to evaluate nodes; the sum is order independent

    Raises:
        ArgmaxTieError: the evaluator hits a tie at a node
    """
    if panels < 1:
        raise ValidationError(f"Path integral needs at least one panel, got {panels}")
    u, u_tilde = as_point(u), as_point(u_tilde)
    if u.K != u_tilde.K:
        raise ValidationError("Path endpoints differ in dimension")
    if all(a == b for a, b in zip(u, u_tilde)):
        return 0.0

    nodes, weights = roots_legendre(GAUSS_POINTS)
    edges = _panel_edges(panels, breakpoints)
    abscissae: List[float] = []
    scales: List[float] = []
    for left, right in zip(edges, edges[1:]):
        half, mid = (right - left) / 2, (right + left) / 2
        for x, w in zip(nodes, weights):
            abscissae.append(mid + half * float(x))
            scales.append(half * float(w))

    def evaluate(t: float) -> float:
        return _integrand(prob_evaluator, u, u_tilde, t)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(evaluate, abscissae))
    else:
        values = [evaluate(t) for t in abscissae]

    total = math.fsum(s * v for s, v in zip(scales, values))
    logger.debug(f"Path integral {u} -> {u_tilde}: {len(edges) - 1} panel(s), value {total!r}")
    return total


def path_integrand_samples(
    prob_evaluator: ProbEvaluator,
    u,
    u_tilde,
    samples: int = 65,
) -> List[Tuple[float, float]]:
    """(t, integrand) at evenly spaced t in [0, 1], both ends included."""
    if samples < 2:
        raise ValidationError(f"Need at least 2 samples, got {samples}")
    u, u_tilde = as_point(u), as_point(u_tilde)
    rows = []
    for i in range(samples):
        t = i / (samples - 1)
        rows.append((t, _integrand(prob_evaluator, u, u_tilde, t)))
    return rows


@dataclass(frozen=True)
class WelfarePathReport:
    """Welfare change along one segment, from the field and (if known) the model."""

    u: UtilityPoint
    u_tilde: UtilityPoint
    path_integral: float
    exact: Optional[Number]
    panels: int
    breakpoints: int

    @property
    def discrepancy(self) -> Optional[float]:
        if self.exact is None:
            return None
        return abs(self.path_integral - float(self.exact))

    def row(self) -> Dict[str, str]:
        discrepancy = self.discrepancy
        return {
            "u": format_vector(self.u),
            "u_tilde": format_vector(self.u_tilde),
            "path_integral": format_number(self.path_integral),
            "exact": "" if self.exact is None else format_number(self.exact),
            "discrepancy": "" if discrepancy is None else format_number(discrepancy),
            "panels": str(self.panels),
            "breakpoints": str(self.breakpoints),
        }


def welfare_path_report(
    model: Model,
    u,
    u_tilde,
    panels: int = DEFAULT_PANELS,
    workers: int = 1,
) -> WelfarePathReport:
    """Path integral with the model's breakpoints, next to the exact surplus difference."""
    u, u_tilde = as_point(u), as_point(u_tilde)
    breakpoints = model_path_breakpoints(model, u, u_tilde)
    integral = welfare_change_path_integral(
        lambda point: choice_prob(model, point), u, u_tilde, panels, breakpoints, workers
    )
    exact = welfare_change_exact(model, u, u_tilde)
    logger.info(f"Welfare {u} -> {u_tilde}: path integral {integral!r}, exact {format_number(exact)}")
    return WelfarePathReport(u, u_tilde, integral, exact, panels, len(breakpoints))


def attention_welfare_set(
    field: ChoiceProbField,
    grid: UtilityGrid,
    k: int,
    extremely_attractive: bool = False,
) -> WelfareSet:
    """
    {0} when sup p_k = 1 (k is always considered), [0, inf) otherwise.

    The unbounded answer needs a k-maximal grid point, or the caller's
    assertion that k can be made extremely attractive.

    Raises:
        NoKMaximalPointError: sup p_k < 1 and neither hypothesis holds
    """
    if field.grid != grid:
        raise ValidationError("Field is defined on a different grid")
    sup_pk, _ = sup_choice_prob(field, k)
    if is_one(sup_pk):
        return WelfareSet.point()
    if extremely_attractive or k_maximal_point(grid, k) is not None:
        return WelfareSet.unbounded_above()
    raise NoKMaximalPointError(k, f"grid has no {k}-maximal point and k is not declared extremely attractive")


@dataclass(frozen=True)
class WelfareWitnessReport:
    """A rationalization whose k-attention welfare gain is at least c * gamma."""

    k: int
    target_gain: Number
    shift: Number
    gamma: Number
    evaluation_point: UtilityPoint
    achieved_gain: Number
    field_unchanged: bool
    witness: ArumCsDistribution

    @property
    def gain_lower_bound(self) -> Number:
        return self.target_gain * self.gamma

    def row(self) -> Dict[str, str]:
        return {
            "k": str(self.k),
            "c": format_number(self.target_gain),
            "shift": format_number(self.shift),
            "gamma": format_number(self.gamma),
            "u": format_vector(self.evaluation_point),
            "achieved_gain": format_number(self.achieved_gain),
            "gain_lower_bound": format_number(self.gain_lower_bound),
            "field_unchanged": format_number(self.field_unchanged),
        }

    def to_dict(self) -> Dict[str, Any]:
        return {**self.row(), "witness_hash": model_hash(self.witness)}


def unbounded_welfare_witness(
    nu: ArumCsDistribution,
    grid: UtilityGrid,
    k: int,
    c: Number,
    u=None,
) -> WelfareWitnessReport:
    """
    Raise eps_k by a common shift m on every atom that does not consider k.

    Those shocks never enter choices, so the field on the grid is unchanged.
    m is the smallest shift making k win at u on all those atoms, plus c, so
    forcing attention to k gains at least c per atom and c * gamma overall,
    gamma = Pr(k not in S). With c = 0, nu itself is returned.

    When nu considers k everywhere, it is first replaced by the
    lower-endpoint rationalization of its field, which drops k from every
    atom that loses k at the k-maximal point.

    Args:
        u: evaluation point; defaults to the k-maximal grid point if any,
            else the first grid point

    Raises:
        FullConsiderationError: k is considered with probability 1 by every
            rationalization (sup p_k = 1), or nu considers k everywhere and the
            grid has no k-maximal point
    """
    if not 0 <= k < nu.K:
        raise ValidationError(f"Alternative index {k} out of range for K={nu.K}")
    if c < 0:
        raise ValidationError(f"Target gain must be nonnegative, got {c}")
    if u is None:
        u = k_maximal_point(grid, k) or grid.points[0]
    u = as_point(u)

    source = nu
    unaware = [atom for atom in nu.atoms if k not in atom.consideration_set]
    if not unaware and k_maximal_point(grid, k) is not None:
        nu = arum_e_to_cs(witness_lower_endpoint(nu, grid, k))
        unaware = [atom for atom in nu.atoms if k not in atom.consideration_set]
    if not unaware:
        raise FullConsiderationError(f"Alternative {k} is always considered on this grid; the welfare gain is 0")
    gamma = sum((atom.weight for atom in unaware), nu.zero())

    if c == 0:
        shift = nu.zero()
        witness = nu
    else:
        shortfall = max(atom.best_score(u) - (u[k] + atom.eps[k]) for atom in unaware)
        shift = max(nu.zero(), shortfall) + c
        atoms = tuple(
            atom if k in atom.consideration_set else atom.with_shock(k, atom.eps[k] + shift)
            for atom in nu.atoms
        )
        witness = ArumCsDistribution(atoms, Provenance("unbounded_welfare_witness", model_hash(source)))

    field_unchanged = choice_prob_field(witness, grid) == choice_prob_field(source, grid)
    attended = attention_intervention_apply(witness, k)
    gain = social_surplus(attended, u) - social_surplus(witness, u)
    report = WelfareWitnessReport(k, c, shift, gamma, u, gain, field_unchanged, witness)
    logger.info(
        f"Welfare witness for k={k}, c={format_number(c)}: shift {format_number(shift)}, "
        f"gain {format_number(gain)} >= {format_number(report.gain_lower_bound)}"
    )
    return report
