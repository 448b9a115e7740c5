import pytest

from arum_consideration.core import ChoiceProbField, Interval, UtilityGrid, UtilityPoint, k_maximal_point
from arum_consideration.errors import NoKMaximalPointError, NotCartesianProductError, ValidationError
from arum_consideration.identification import (
    consideration_identified_set,
    consideration_prob_of,
    covariate_consideration_bounds,
    covariate_field,
    discontinuity_experiment,
    full_consideration_verdict,
    subset_advantage,
    subset_attractiveness_diagnostic,
    subset_diagnostics,
    sup_choice_prob,
    witness_lower_endpoint,
)
from arum_consideration.models import (
    ArumDistribution,
    EpsilonAtom,
    choice_prob_field,
)

from .conftest import F, random_instances


def _rectangles(scales):
    return [UtilityGrid.rectangle([list(range(-s, s + 1))] * 2) for s in scales]


class TestConsiderationBounds:
    def test_reference_k0(self, reference, ref_grid):
        report = consideration_identified_set(choice_prob_field(reference, ref_grid), 0)
        assert report.interval == Interval(F(3, 5), 1)
        assert report.sup_pk == F(3, 5)
        assert report.argmax_point == UtilityPoint((1, -1))
        assert report.sharp and report.k_maximal_found
        assert report.row()["argmax_point"] == "1;-1"

    def test_reference_k1(self, reference, ref_grid):
        report = consideration_identified_set(choice_prob_field(reference, ref_grid), 1)
        assert report.interval == Interval(1, 1)
        assert report.argmax_point == UtilityPoint((-1, 1))

    def test_sup_returns_first_attaining_point(self, reference, ref_grid):
        value, point = sup_choice_prob(choice_prob_field(reference, ref_grid), 0)
        assert value == F(3, 5)
        assert point == UtilityPoint((-1, -1))

    def test_without_k_maximal_point(self):
        model = ArumDistribution((EpsilonAtom((F(0), F(1, 3), F(2, 3)), F(1)),))
        grid = UtilityGrid(((1, 0, 1), (1, 1, 0)))
        report = consideration_identified_set(choice_prob_field(model, grid), 0)
        assert not report.sharp
        assert report.interval == Interval(0, 1)

    def test_non_monotone_field_uses_sup(self):
        grid = UtilityGrid(((0, 0), (1, 0)))
        field = ChoiceProbField(grid, {(0, 0): (F(3, 4), F(1, 4)), (1, 0): (F(1, 2), F(1, 2))})
        assert k_maximal_point(grid, 0) == UtilityPoint((1, 0))
        report = consideration_identified_set(field, 0)
        assert report.interval == Interval(F(3, 4), 1)
        assert report.argmax_point == UtilityPoint((0, 0))
        assert report.k_maximal_found
        assert not report.sharp

    def test_lower_bound_on_random_instances(self):
        """sup p_k never exceeds the probability that k is considered."""
        for nu, grid in random_instances(seed=99, count=200):
            field = choice_prob_field(nu, grid)
            for k in range(nu.K):
                assert sup_choice_prob(field, k)[0] <= consideration_prob_of(nu, k)

    def test_lower_bound_can_be_strict(self, reference):
        grid = UtilityGrid(((-1, 1),))
        field = choice_prob_field(reference, grid)
        assert sup_choice_prob(field, 0)[0] == 0
        assert consideration_prob_of(reference, 0) == F(3, 5)


class TestLowerEndpointWitness:
    def test_reference(self, reference, ref_grid):
        witness = witness_lower_endpoint(reference, ref_grid, 0)
        assert choice_prob_field(witness, ref_grid) == choice_prob_field(reference, ref_grid)
        assert consideration_prob_of(witness, 0) == F(3, 5)

    def test_attains_sup_on_random_instances(self):
        for nu, grid in random_instances(seed=5, count=90):
            field = choice_prob_field(nu, grid)
            for k in range(nu.K):
                witness = witness_lower_endpoint(nu, grid, k)
                assert choice_prob_field(witness, grid) == field
                u_star = k_maximal_point(grid, k)
                assert consideration_prob_of(witness, k) == field[u_star][k]
                assert consideration_prob_of(witness, k) == sup_choice_prob(field, k)[0]

    def test_needs_k_maximal_point(self):
        model = ArumDistribution((EpsilonAtom((F(0), F(1, 3), F(2, 3)), F(1)),))
        grid = UtilityGrid(((1, 0, 1), (1, 1, 0)))
        with pytest.raises(NoKMaximalPointError):
            witness_lower_endpoint(model, grid, 0)


class TestDiscontinuity:
    def test_reference_width_constant(self, reference):
        rows = discontinuity_experiment(reference, _rectangles([1, 2, 4, 8]), 0, [1, 2, 4, 8])
        assert [r.width for r in rows] == [F(2, 5)] * 4
        assert all(r.consideration_prob == F(3, 5) for r in rows)
        assert [r.grid_size for r in rows] == [9, 25, 81, 289]

    def test_arum_width_shrinks(self):
        model = ArumDistribution(tuple(
            EpsilonAtom((F(0), e), F(1, 4)) for e in (F(1, 2), F(7, 2), F(13, 2), F(25, 2))
        ))
        rows = discontinuity_experiment(model, _rectangles([1, 2, 4, 8]), 0, [1, 2, 4, 8])
        assert [r.width for r in rows] == [F(3, 4), F(1, 2), F(1, 4), 0]
        assert rows[-1].row()["width"] == "0"

    def test_rectangles_must_nest(self, reference):
        rectangles = [UtilityGrid.rectangle([[0, 1], [0, 1]]), UtilityGrid.rectangle([[2, 3], [2, 3]])]
        with pytest.raises(ValidationError):
            discontinuity_experiment(reference, rectangles, 0)

    def test_rectangles_must_be_products(self, reference, ref_grid):
        with pytest.raises(NotCartesianProductError):
            discontinuity_experiment(reference, [UtilityGrid(((0, 0), (1, 1)))], 0)


class TestSubsetDiagnostics:
    def test_reference(self, reference, ref_grid):
        field = choice_prob_field(reference, ref_grid)
        diagnostics = subset_diagnostics(field)
        assert [d.subset for d in diagnostics] == [(0,), (1,)]
        assert diagnostics[0].sup_mass == F(3, 5)
        assert not diagnostics[0].reaches_one
        assert diagnostics[1].reaches_one
        assert diagnostics[0].advantage == 2

    def test_counts_proper_subsets(self):
        model = ArumDistribution((EpsilonAtom((F(0), F(1, 3), F(2, 3)), F(1)),))
        grid = UtilityGrid.rectangle([[0, 1], [0], [0]])
        assert len(subset_diagnostics(choice_prob_field(model, grid))) == 6

    def test_single_subset(self, reference, ref_grid):
        field = choice_prob_field(reference, ref_grid)
        assert subset_attractiveness_diagnostic(field, {0, 1}) == 1
        assert subset_advantage(ref_grid, {0, 1}) is None
        with pytest.raises(ValidationError):
            subset_attractiveness_diagnostic(field, set())

    def test_full_consideration_verdict(self, reference, ref_grid):
        verdict = full_consideration_verdict(choice_prob_field(reference, ref_grid))
        assert verdict == {0: False, 1: True}


class TestCovariates:
    def test_covariate_bounds(self, reference):
        covariates = UtilityGrid.rectangle([[0, 1], [0, 1]])
        ptilde = covariate_field(reference, covariates, lambda x: (2 * x[0] - 1, 2 * x[1] - 1))
        assert covariate_consideration_bounds(ptilde, 0) == Interval(F(3, 5), 1)

    def test_needs_product_grid(self, reference):
        covariates = UtilityGrid(((0, 0), (1, 1)))
        ptilde = covariate_field(reference, covariates, lambda x: (2 * x[0] - 1, 2 * x[1] - 1))
        with pytest.raises(NotCartesianProductError):
            covariate_consideration_bounds(ptilde, 0)
