"""
Exact-rational two-phase simplex with Bland's rule.

Solves   minimize c.x  subject to  A x = b,  x >= 0
entirely in fractions.Fraction. Bland's rule (lowest-index entering column,
lowest-index leaving basic variable among ratio ties) prevents cycling and
makes every pivot sequence reproducible.

Desk-scale only: the tableau is dense and reduced costs are recomputed on
each iteration.
"""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .errors import InfeasibleError, ValidationError

logger = logging.getLogger(__name__)


class UnboundedError(ValidationError):
    """The objective is unbounded below on the feasible set."""


@dataclass(frozen=True)
class LpSolution:
    """An optimal vertex and its objective value."""

    x: Tuple[Fraction, ...]
    objective: Fraction
    pivots: int


def _as_fractions(rows) -> List[List[Fraction]]:
    return [[Fraction(v) for v in row] for row in rows]


class SimplexTableau:
    """Dense tableau in canonical form for the current basis."""

    def __init__(self, A: Sequence[Sequence], b: Sequence):
        self.m = len(A)
        self.n = len(A[0]) if A else 0
        if any(len(row) != self.n for row in A) or len(b) != self.m:
            raise ValidationError("Constraint matrix and right-hand side have inconsistent shapes")

        rows = _as_fractions(A)
        rhs = [Fraction(v) for v in b]
        # Artificial columns n..n+m-1 start as the basis; rows are sign-flipped so rhs >= 0.
        self.rows: List[List[Fraction]] = []
        for i, (row, value) in enumerate(zip(rows, rhs)):
            sign = -1 if value < 0 else 1
            artificial = [Fraction(1) if j == i else Fraction(0) for j in range(self.m)]
            self.rows.append([sign * v for v in row] + artificial + [sign * value])
        self.basis: List[int] = [self.n + i for i in range(self.m)]
        self.pivots = 0

    @property
    def width(self) -> int:
        return self.n + self.m

    def rhs(self, i: int) -> Fraction:
        return self.rows[i][-1]

    def pivot(self, i: int, j: int) -> None:
        row = self.rows[i]
        factor = row[j]
        self.rows[i] = row = [v / factor for v in row]
        for r, other in enumerate(self.rows):
            if r != i and other[j] != 0:
                scale = other[j]
                self.rows[r] = [a - scale * c for a, c in zip(other, row)]
        self.basis[i] = j
        self.pivots += 1

    def reduced_costs(self, cost: Sequence[Fraction]) -> List[Fraction]:
        duals = [cost[self.basis[i]] for i in range(len(self.rows))]
        return [
            cost[j] - sum(d * row[j] for d, row in zip(duals, self.rows) if d != 0)
            for j in range(self.width)
        ]

    def objective(self, cost: Sequence[Fraction]) -> Fraction:
        return sum((cost[self.basis[i]] * self.rhs(i) for i in range(len(self.rows))), Fraction(0))

    def optimize(self, cost: Sequence[Fraction], allowed: Sequence[int]) -> None:
        """Primal simplex over the allowed columns with Bland's rule."""
        allowed = sorted(allowed)
        while True:
            reduced = self.reduced_costs(cost)
            basic = set(self.basis)
            entering = next((j for j in allowed if j not in basic and reduced[j] < 0), None)
            if entering is None:
                return
            leaving, best_ratio = None, None
            for i, row in enumerate(self.rows):
                if row[entering] > 0:
                    ratio = row[-1] / row[entering]
                    if (
                        best_ratio is None
                        or ratio < best_ratio
                        or (ratio == best_ratio and self.basis[i] < self.basis[leaving])
                    ):
                        leaving, best_ratio = i, ratio
            if leaving is None:
                raise UnboundedError("LP objective is unbounded below")
            self.pivot(leaving, entering)

    def drive_out_artificials(self) -> None:
        """Pivot artificial variables out of the basis; drop redundant rows."""
        i = 0
        while i < len(self.rows):
            if self.basis[i] >= self.n:
                row = self.rows[i]
                column = next((j for j in range(self.n) if row[j] != 0), None)
                if column is None:
                    del self.rows[i]
                    del self.basis[i]
                    continue
                self.pivot(i, column)
            i += 1

    def solution(self) -> Tuple[Fraction, ...]:
        x = [Fraction(0)] * self.n
        for i, var in enumerate(self.basis):
            if var < self.n:
                x[var] = self.rhs(i)
        return tuple(x)


def solve_lp(c: Sequence, A: Sequence[Sequence], b: Sequence) -> LpSolution:
    """
    Minimize c.x subject to A x = b, x >= 0, exactly.

    Raises:
        InfeasibleError: no x >= 0 satisfies A x = b
        UnboundedError: the objective is unbounded below
    """
    cost = [Fraction(v) for v in c]
    tableau = SimplexTableau(A, b)
    if len(cost) != tableau.n:
        raise ValidationError("Objective length does not match the number of variables")

    phase_one = [Fraction(0)] * tableau.n + [Fraction(1)] * tableau.m
    tableau.optimize(phase_one, range(tableau.width))
    if tableau.objective(phase_one) > 0:
        raise InfeasibleError("No nonnegative solution satisfies the equality constraints")
    tableau.drive_out_artificials()

    phase_two = cost + [Fraction(0)] * tableau.m
    tableau.optimize(phase_two, range(tableau.n))
    x = tableau.solution()
    objective = sum((ci * xi for ci, xi in zip(cost, x)), Fraction(0))
    logger.debug(f"LP solved: {tableau.pivots} pivot(s), objective {objective}")
    return LpSolution(x=x, objective=objective, pivots=tableau.pivots)


def _row_reduce(A: List[List[Fraction]], b: List[Fraction]) -> Tuple[List[List[Fraction]], List[Fraction]]:
    """Independent rows of [A | b] (Gauss-Jordan); raises if inconsistent."""
    rows = [list(row) + [value] for row, value in zip(A, b)]
    n = len(A[0]) if A else 0
    rank = 0
    for col in range(n):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        lead = rows[rank][col]
        rows[rank] = [v / lead for v in rows[rank]]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                scale = rows[r][col]
                rows[r] = [a - scale * c for a, c in zip(rows[r], rows[rank])]
        rank += 1
    if any(row[-1] != 0 for row in rows[rank:]):
        raise InfeasibleError("Equality constraints are inconsistent")
    kept = rows[:rank]
    return [row[:-1] for row in kept], [row[-1] for row in kept]


def _solve_square(B: List[List[Fraction]], b: List[Fraction]) -> Optional[List[Fraction]]:
    """Solve B y = b exactly; None if B is singular."""
    size = len(B)
    rows = [list(row) + [value] for row, value in zip(B, b)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if rows[r][col] != 0), None)
        if pivot is None:
            return None
        rows[col], rows[pivot] = rows[pivot], rows[col]
        lead = rows[col][col]
        rows[col] = [v / lead for v in rows[col]]
        for r in range(size):
            if r != col and rows[r][col] != 0:
                scale = rows[r][col]
                rows[r] = [a - scale * c for a, c in zip(rows[r], rows[col])]
    return [row[-1] for row in rows]


def enumerate_vertices(A: Sequence[Sequence], b: Sequence) -> List[Tuple[Fraction, ...]]:
    """
    All basic feasible solutions of {x >= 0 : A x = b} by brute force over
    column subsets. Exponential; meant as an independent check of solve_lp
    on small problems.
    """
    A_exact, b_exact = _row_reduce(_as_fractions(A), [Fraction(v) for v in b])
    n = len(A[0]) if A else 0
    rank = len(A_exact)
    vertices = set()
    for columns in itertools.combinations(range(n), rank):
        B = [[row[j] for j in columns] for row in A_exact]
        y = _solve_square(B, b_exact)
        if y is None or any(v < 0 for v in y):
            continue
        x = [Fraction(0)] * n
        for j, value in zip(columns, y):
            x[j] = value
        vertices.add(tuple(x))
    return sorted(vertices)
