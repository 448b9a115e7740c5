"""
The three model classes as finite atom mixtures, and their engines.

ARUM and ARUM-E mixtures hold EpsilonAtoms (ARUM requires every coordinate
finite); ARUM-CS mixtures hold ConsiderationAtoms. Choice probabilities and
social surplus are evaluated exactly by enumerating atoms. i.i.d. Gumbel
shocks are the one continuous law, used as a closed-form oracle.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import ClassVar, FrozenSet, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import logsumexp, softmax

from .core import (
    FLOAT_TOL,
    ChoiceProbField,
    ExtendedReal,
    Number,
    SimplexVector,
    UtilityGrid,
    UtilityPoint,
    all_exact,
    as_point,
    is_finite_number,
)
from .errors import ArgmaxTieError, ValidationError

logger = logging.getLogger(__name__)

# Draws per Monte Carlo substream; fixed so the draw-to-stream map only
# depends on (seed, draw index).
MC_BLOCK_SIZE = 65_536


def _unique_argmax(scores: Sequence[Optional[Number]], atom_index: Optional[int], u) -> int:
    """Index of the unique largest non-None score."""
    best: Optional[Number] = None
    best_k: Optional[int] = None
    tied = False
    for j, score in enumerate(scores):
        if score is None:
            continue
        if best is None or score > best:
            best, best_k, tied = score, j, False
        elif score == best:
            tied = True
    if best_k is None:
        raise ValidationError(f"Atom {atom_index} has no feasible alternative")
    if tied:
        raise ArgmaxTieError(atom_index, u)
    return best_k


def _check_weight(weight: Number) -> None:
    if isinstance(weight, bool) or not is_finite_number(weight) or weight <= 0:
        raise ValidationError(f"Atom weight must be positive and finite, got {weight!r}")


class _Atom:
    """Shared choice logic; subclasses define scores() and shock_max()."""

    weight: Number

    def scores(self, u: UtilityPoint) -> List[Optional[Number]]:
        raise NotImplementedError

    def shock_max(self) -> Number:
        raise NotImplementedError

    def choose(self, u: UtilityPoint, atom_index: Optional[int] = None) -> int:
        """Alternative chosen at u; raises ArgmaxTieError on a tie at the max."""
        return _unique_argmax(self.scores(u), atom_index, u)

    def best_score(self, u: UtilityPoint) -> Number:
        return max(s for s in self.scores(u) if s is not None)


@dataclass(frozen=True)
class EpsilonAtom(_Atom):
    """A support point of mu: shocks on the extended reals, with a weight."""

    eps: Tuple[ExtendedReal, ...]
    weight: Number

    def __post_init__(self):
        eps = tuple(e if isinstance(e, ExtendedReal) else ExtendedReal.finite(e) for e in self.eps)
        object.__setattr__(self, "eps", eps)
        if len(eps) < 2:
            raise ValidationError("EpsilonAtom needs K >= 2 shocks")
        if not any(e.is_finite for e in eps):
            raise ValidationError("EpsilonAtom needs at least one finite shock")
        _check_weight(self.weight)

    @property
    def K(self) -> int:
        return len(self.eps)

    @property
    def is_all_finite(self) -> bool:
        return all(e.is_finite for e in self.eps)

    def finite_indices(self) -> FrozenSet[int]:
        return frozenset(k for k, e in enumerate(self.eps) if e.is_finite)

    def scores(self, u: UtilityPoint) -> List[Optional[Number]]:
        return [u[j] + e.value if e.is_finite else None for j, e in enumerate(self.eps)]

    def shock_max(self) -> Number:
        return max(e.value for e in self.eps if e.is_finite)

    def with_shock(self, k: int, value: ExtendedReal) -> "EpsilonAtom":
        eps = list(self.eps)
        eps[k] = value
        return replace(self, eps=tuple(eps))


@dataclass(frozen=True)
class ConsiderationAtom(_Atom):
    """A support point of nu: finite shocks, a consideration set and a weight."""

    eps: Tuple[Number, ...]
    consideration_set: FrozenSet[int]
    weight: Number

    def __post_init__(self):
        object.__setattr__(self, "eps", tuple(self.eps))
        object.__setattr__(self, "consideration_set", frozenset(self.consideration_set))
        if len(self.eps) < 2:
            raise ValidationError("ConsiderationAtom needs K >= 2 shocks")
        for value in self.eps:
            if isinstance(value, ExtendedReal) or not is_finite_number(value):
                raise ValidationError(f"ConsiderationAtom shocks must be finite, got {value!r}")
        if not self.consideration_set:
            raise ValidationError("Consideration set must be nonempty")
        if any(not 0 <= k < len(self.eps) for k in self.consideration_set):
            raise ValidationError(f"Consideration set {sorted(self.consideration_set)} out of range")
        _check_weight(self.weight)

    @property
    def K(self) -> int:
        return len(self.eps)

    def scores(self, u: UtilityPoint) -> List[Optional[Number]]:
        return [u[j] + e if j in self.consideration_set else None for j, e in enumerate(self.eps)]

    def shock_max(self) -> Number:
        # The subtrahend ranges over all alternatives, considered or not.
        return max(self.eps)

    def with_shock(self, k: int, value: Number) -> "ConsiderationAtom":
        eps = list(self.eps)
        eps[k] = value
        return replace(self, eps=tuple(eps))


@dataclass(frozen=True)
class Provenance:
    """Which construction produced a model, and from which source model."""

    construction: str
    source_hash: str


@dataclass(frozen=True)
class _AtomMixture:
    atoms: Tuple
    provenance: Optional[Provenance] = field(default=None, compare=False)

    model_class: ClassVar[str] = ""
    atom_type: ClassVar[type] = _Atom

    def __post_init__(self):
        atoms = tuple(self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise ValidationError(f"{self.model_class} model needs at least one atom")
        for atom in atoms:
            if not isinstance(atom, self.atom_type):
                raise ValidationError(
                    f"{self.model_class} atoms must be {self.atom_type.__name__}, got {type(atom).__name__}"
                )
            self._check_atom(atom)
        K = atoms[0].K
        if any(atom.K != K for atom in atoms):
            raise ValidationError("All atoms must share the same dimension K")
        total = sum(atom.weight for atom in atoms)
        if self.is_exact:
            if total != 1:
                raise ValidationError(f"Atom weights sum to {total}, not 1")
        elif abs(total - 1) > FLOAT_TOL:
            raise ValidationError(f"Atom weights sum to {total!r}, not 1")

    def _check_atom(self, atom) -> None:
        pass

    @property
    def K(self) -> int:
        return self.atoms[0].K

    @property
    def is_exact(self) -> bool:
        """True when every weight is rational (rational-mode evaluation)."""
        return all_exact(atom.weight for atom in self.atoms)

    def zero(self) -> Number:
        return Fraction(0) if self.is_exact else 0.0

    def __len__(self) -> int:
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    def with_atoms(self, atoms, provenance: Optional[Provenance] = None):
        return type(self)(tuple(atoms), provenance)


@dataclass(frozen=True)
class ArumDistribution(_AtomMixture):
    """Classic ARUM: every shock finite."""

    model_class: ClassVar[str] = "arum"
    atom_type: ClassVar[type] = EpsilonAtom

    def _check_atom(self, atom: EpsilonAtom) -> None:
        if not atom.is_all_finite:
            raise ValidationError("ARUM atoms must have every shock finite")


@dataclass(frozen=True)
class ArumEDistribution(_AtomMixture):
    """Extended ARUM: shocks may be -inf."""

    model_class: ClassVar[str] = "arum_e"
    atom_type: ClassVar[type] = EpsilonAtom


@dataclass(frozen=True)
class ArumCsDistribution(_AtomMixture):
    """Consideration-set ARUM."""

    model_class: ClassVar[str] = "arum_cs"
    atom_type: ClassVar[type] = ConsiderationAtom


FiniteModel = Union[ArumDistribution, ArumEDistribution, ArumCsDistribution]


@dataclass(frozen=True)
class GumbelShocks:
    """i.i.d. Gumbel shocks (location 0); multinomial logit choice."""

    K: int
    scale: float = 1.0

    def __post_init__(self):
        if self.K < 2:
            raise ValidationError("GumbelShocks needs K >= 2")
        if not self.scale > 0:
            raise ValidationError("Gumbel scale must be positive")

    model_class: ClassVar[str] = "gumbel"

    def choice_prob(self, u) -> SimplexVector:
        values = np.asarray(as_point(u).u, dtype=float) / self.scale
        return SimplexVector(tuple(float(p) for p in softmax(values)))

    def social_surplus(self, u) -> float:
        values = np.asarray(as_point(u).u, dtype=float) / self.scale
        return float(self.scale * (logsumexp(values) - math.log(self.K)))


Model = Union[FiniteModel, GumbelShocks]


def _check_dimension(model, u: UtilityPoint) -> None:
    if model.K != u.K:
        raise ValidationError(f"Model has K={model.K} but utility point has {u.K} coordinates")


def choice_prob_finite(model: FiniteModel, u) -> SimplexVector:
    """
    Exact choice probabilities: each atom gives its weight to its unique
    argmax of u_j + eps_j (over its consideration set for ARUM-CS atoms).

    Raises:
        ArgmaxTieError: an atom has two alternatives tied at the max
    """
    u = as_point(u)
    _check_dimension(model, u)
    probs = [model.zero()] * model.K
    for index, atom in enumerate(model.atoms):
        probs[atom.choose(u, index)] += atom.weight
    return SimplexVector(tuple(probs))


def choice_prob_gumbel(u) -> SimplexVector:
    """Logit probabilities for standard Gumbel shocks (max-subtracted softmax)."""
    u = as_point(u)
    return GumbelShocks(u.K).choice_prob(u)


def choice_prob(model: Model, u) -> SimplexVector:
    """Dispatch to the Gumbel oracle or the finite engine."""
    if isinstance(model, GumbelShocks):
        return model.choice_prob(u)
    return choice_prob_finite(model, u)


def choice_prob_field(model: Model, grid: UtilityGrid) -> ChoiceProbField:
    """Field of choice probabilities over every grid point."""
    if model.K != grid.K:
        raise ValidationError(f"Model has K={model.K} but grid has K={grid.K}")
    probs = {point: choice_prob(model, point) for point in grid}
    return ChoiceProbField(grid, probs)


def social_surplus(model: Model, u) -> Number:
    """
    V(u) = E[max_k (u_k + eps_k) - max_k eps_k].

    For ARUM-CS atoms the first max runs over the consideration set while the
    subtracted max runs over all alternatives.
    """
    if isinstance(model, GumbelShocks):
        return model.social_surplus(u)
    u = as_point(u)
    _check_dimension(model, u)
    total = model.zero()
    for atom in model.atoms:
        total += atom.weight * (atom.best_score(u) - atom.shock_max())
    return total


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Empirical choice frequencies with per-coordinate standard errors."""

    estimate: SimplexVector
    standard_error: Tuple[float, ...]
    draws: int
    seed: int

    def within(self, exact: SimplexVector, n_se: float = 4.0) -> bool:
        """True if every coordinate is within n_se standard errors of exact."""
        for p_hat, se, p in zip(self.estimate, self.standard_error, exact):
            gap = abs(p_hat - float(p))
            if se == 0:
                if gap > 0:
                    return False
            elif gap > n_se * se:
                return False
        return True


def _finite_sampler(model: FiniteModel, u: UtilityPoint):
    chosen = np.array([atom.choose(u, i) for i, atom in enumerate(model.atoms)])
    weights = np.array([float(atom.weight) for atom in model.atoms])
    weights = weights / weights.sum()

    def sample(rng: np.random.Generator, size: int) -> np.ndarray:
        draws = rng.choice(len(weights), size=size, p=weights)
        return np.bincount(chosen[draws], minlength=model.K)

    return sample


def _gumbel_sampler(model: GumbelShocks, u: UtilityPoint):
    base = np.asarray(u.u, dtype=float)

    def sample(rng: np.random.Generator, size: int) -> np.ndarray:
        values = base + rng.gumbel(loc=0.0, scale=model.scale, size=(size, model.K))
        top_two = np.sort(values, axis=1)[:, -2:]
        if np.any(top_two[:, 0] == top_two[:, 1]):
            raise ArgmaxTieError(None, u, f"exact float tie in a Gumbel draw at u={u}")
        return np.bincount(np.argmax(values, axis=1), minlength=model.K)

    return sample


def monte_carlo_choice_prob(
    model: Model,
    u,
    n: int,
    seed: int,
    workers: int = 1,
) -> MonteCarloEstimate:
    """
    Estimate choice probabilities from n i.i.d. draws.

    Draws are split into fixed-size blocks, each with its own substream from
    numpy.random.SeedSequence(seed).spawn, so the result is identical for any
    worker count.

    Args:
        model: a finite mixture or GumbelShocks
        u: utility point
        n: number of draws (>= 1)
        seed: nonnegative integer seed
        workers: threads used to evaluate blocks

    Returns:
        MonteCarloEstimate with sqrt(p(1-p)/n) standard errors
    """
    if n < 1:
        raise ValidationError(f"Monte Carlo needs n >= 1, got {n}")
    u = as_point(u)
    _check_dimension(model, u)
    sample = _gumbel_sampler(model, u) if isinstance(model, GumbelShocks) else _finite_sampler(model, u)

    sizes = [min(MC_BLOCK_SIZE, n - start) for start in range(0, n, MC_BLOCK_SIZE)]
    streams = np.random.SeedSequence(seed).spawn(len(sizes))

    def run_block(index: int) -> np.ndarray:
        return sample(np.random.default_rng(streams[index]), sizes[index])

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(run_block, range(len(sizes))))
    else:
        counts = [run_block(i) for i in range(len(sizes))]

    totals = np.sum(counts, axis=0)
    p_hat = totals / n
    standard_error = tuple(float(se) for se in np.sqrt(p_hat * (1.0 - p_hat) / n))
    logger.debug(f"Monte Carlo at u={u}: {len(sizes)} block(s), n={n}, seed={seed}")
    return MonteCarloEstimate(
        estimate=SimplexVector(tuple(float(p) for p in p_hat)),
        standard_error=standard_error,
        draws=n,
        seed=seed,
    )
