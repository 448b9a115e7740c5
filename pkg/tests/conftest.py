"""Shared instances and seeded random-instance builders."""

from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from arum_consideration.core import UtilityGrid
from arum_consideration.models import ArumCsDistribution, ConsiderationAtom

F = Fraction

REPO_ROOT = Path(__file__).resolve().parents[1]
REFERENCE_SCENARIO_DIR = REPO_ROOT / "scenarios" / "reference"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"


def reference_model() -> ArumCsDistribution:
    """Two atoms, eps = (0.5, 0): one considers both alternatives (0.6), one only alternative 1 (0.4)."""
    return ArumCsDistribution((
        ConsiderationAtom((F(1, 2), F(0)), {0, 1}, F(3, 5)),
        ConsiderationAtom((F(1, 2), F(0)), {1}, F(2, 5)),
    ))


def reference_grid() -> UtilityGrid:
    return UtilityGrid(((-1, -1), (-1, 1), (1, -1), (1, 1)))


def random_cs_instance(rng: np.random.Generator, K: int, max_atoms: int = 6, max_side: int = 3):
    """
    Random rational ARUM-CS model with a rectangular integer grid.

    Shock j has fractional part (j + 1) / (K + 2), so utilities at integer
    points never tie.
    """
    n_atoms = int(rng.integers(1, max_atoms + 1))
    raw_weights = [int(w) for w in rng.integers(1, 10, size=n_atoms)]
    total = sum(raw_weights)
    atoms = []
    for w in raw_weights:
        eps = tuple(F(int(rng.integers(-3, 4))) + F(j + 1, K + 2) for j in range(K))
        size = int(rng.integers(1, K + 1))
        considered = frozenset(int(k) for k in rng.choice(K, size=size, replace=False))
        atoms.append(ConsiderationAtom(eps, considered, F(w, total)))

    side = max(1, int(round(max_side ** (3 / K)))) if K > 3 else max_side
    coordinates = []
    for _ in range(K):
        values = sorted({int(v) for v in rng.integers(-3, 4, size=side)})
        coordinates.append(values)
    grid = UtilityGrid.rectangle(coordinates)
    return ArumCsDistribution(tuple(atoms)), grid


def random_instances(seed: int, count: int):
    rng = np.random.default_rng(seed)
    for index in range(count):
        K = (2, 3, 4)[index % 3]
        yield random_cs_instance(rng, K)


@pytest.fixture
def reference():
    return reference_model()


@pytest.fixture
def ref_grid():
    return reference_grid()
