from fractions import Fraction

import numpy as np
import pytest

from arum_consideration.errors import InfeasibleError, ValidationError
from arum_consideration.simplex import UnboundedError, enumerate_vertices, solve_lp

from .conftest import F


def _objective(c, x):
    return sum((Fraction(ci) * xi for ci, xi in zip(c, x)), Fraction(0))


class TestSolveLp:
    def test_small_problem(self):
        # min -x0 - 2 x1  s.t.  x0 + x1 + s = 4,  x1 + t = 3
        solution = solve_lp([-1, -2, 0, 0], [[1, 1, 1, 0], [0, 1, 0, 1]], [4, 3])
        assert solution.objective == -7
        assert solution.x[:2] == (F(1), F(3))

    def test_fractional_optimum(self):
        solution = solve_lp([1, 1], [[2, 1], [1, 3]], [3, 4])
        assert solution.x == (F(1), F(1))
        solution = solve_lp([0, 1], [[3, 1]], [1])
        assert solution.x == (F(1, 3), F(0))

    def test_negative_rhs(self):
        solution = solve_lp([1, 0], [[-1, -1]], [-2])
        assert solution.objective == 0
        assert solution.x == (F(0), F(2))

    def test_redundant_rows(self):
        solution = solve_lp([1, 2], [[1, 1], [2, 2]], [1, 2])
        assert solution.x == (F(1), F(0))

    def test_infeasible(self):
        with pytest.raises(InfeasibleError):
            solve_lp([0, 0], [[1, 1]], [-1])
        with pytest.raises(InfeasibleError):
            solve_lp([0, 0], [[1, 1], [1, 1]], [1, 2])

    def test_unbounded(self):
        with pytest.raises(UnboundedError):
            solve_lp([-1, 0], [[1, -1]], [0])

    def test_shape_checks(self):
        with pytest.raises(ValidationError):
            solve_lp([1, 1], [[1, 1], [1]], [1, 1])
        with pytest.raises(ValidationError):
            solve_lp([1], [[1, 1]], [1])


class TestVertexEnumeration:
    def test_simplex_vertices(self):
        vertices = enumerate_vertices([[1, 1, 1]], [1])
        assert vertices == [(F(0), F(0), F(1)), (F(0), F(1), F(0)), (F(1), F(0), F(0))]

    def test_inconsistent(self):
        with pytest.raises(InfeasibleError):
            enumerate_vertices([[1, 1], [1, 1]], [1, 2])

    def test_agrees_with_simplex_on_random_problems(self):
        """Optimum over a bounded polytope equals the best enumerated vertex."""
        rng = np.random.default_rng(31)
        for _ in range(40):
            m, n = int(rng.integers(1, 4)), int(rng.integers(3, 7))
            A = rng.integers(-3, 4, size=(m, n)).tolist()
            A.append([1] * n)
            x0 = rng.integers(0, 3, size=n)
            x0[0] += 1
            b = (np.array(A) @ x0).tolist()
            c = rng.integers(-5, 6, size=n).tolist()

            solution = solve_lp(c, A, b)
            vertices = enumerate_vertices(A, b)
            assert solution.x in vertices
            assert solution.objective == min(_objective(c, v) for v in vertices)

    def test_deterministic(self):
        A, b, c = [[1, 1, 1, 1], [1, -1, 0, 0]], [2, 0], [0, 0, -1, -1]
        first, second = solve_lp(c, A, b), solve_lp(c, A, b)
        assert first == second
        assert first.objective == -2
