from decimal import Decimal
from fractions import Fraction

import pytest

from arum_consideration.core import (
    NEG_INF,
    ArithmeticMode,
    ChoiceProbField,
    ExtendedReal,
    Interval,
    SimplexVector,
    UtilityGrid,
    UtilityPoint,
    extended_add,
    k_maximal_point,
    parse_range,
    to_number,
    utility_difference_bound,
)
from arum_consideration.errors import ParseError, ValidationError

from .conftest import F


class TestToNumber:
    def test_decimal_string_is_exact(self):
        assert to_number("0.6") == Fraction(3, 5)
        assert to_number(Decimal("0.6")) == Fraction(3, 5)

    def test_fraction_string(self):
        assert to_number("1/3") == Fraction(1, 3)

    def test_float_mode(self):
        value = to_number("0.6", ArithmeticMode.FLOAT)
        assert isinstance(value, float)
        assert value == 0.6

    def test_json_float_goes_through_repr(self):
        assert to_number(0.1) == Fraction(1, 10)

    def test_infinite_rejected(self):
        with pytest.raises(ValidationError):
            to_number("-inf")
        with pytest.raises(ValidationError):
            to_number("Infinity")

    def test_garbage_rejected(self):
        with pytest.raises(ParseError):
            to_number("abc")
        with pytest.raises(ParseError):
            to_number(True)


class TestExtendedReal:
    def test_neg_inf_below_everything(self):
        assert NEG_INF < ExtendedReal.finite(-10 ** 9)
        assert not ExtendedReal.finite(0) < NEG_INF

    def test_parse(self):
        assert not ExtendedReal.parse("-inf").is_finite
        assert not ExtendedReal.parse("−inf").is_finite
        assert ExtendedReal.parse("0.5").value == F(1, 2)

    def test_addition_absorbs(self):
        assert NEG_INF + 5 == NEG_INF
        assert ExtendedReal.finite(F(1, 2)) + 1 == ExtendedReal.finite(F(3, 2))


class TestGrid:
    def test_point_needs_two_coordinates(self):
        with pytest.raises(ValidationError):
            UtilityPoint((1,))

    def test_duplicates_rejected(self):
        with pytest.raises(ValidationError):
            UtilityGrid(((0, 0), (0, 0)))

    def test_rectangle(self):
        grid = UtilityGrid.rectangle([[0, 1], [0, 1, 2]])
        assert len(grid) == 6
        assert grid.is_cartesian_product()
        assert grid.points[0] == UtilityPoint((0, 0))

    def test_not_cartesian(self):
        assert not UtilityGrid(((0, 0), (1, 1))).is_cartesian_product()

    def test_subset(self):
        small = UtilityGrid.rectangle([[0], [0, 1]])
        big = UtilityGrid.rectangle([[0, 1], [0, 1]])
        assert small.is_subset_of(big)
        assert not big.is_subset_of(small)


class TestParseRange:
    def test_integer_range(self):
        assert parse_range("-1:1:1") == [-1, 0, 1]

    def test_fractional_step(self):
        values = parse_range("0:1:0.25")
        assert values == [F(0), F(1, 4), F(1, 2), F(3, 4), F(1)]

    def test_float_mode(self):
        assert parse_range("0:1:0.1", ArithmeticMode.FLOAT)[-1] == 1.0

    def test_bad_ranges(self):
        with pytest.raises(ParseError):
            parse_range("1:2")
        with pytest.raises(ValidationError):
            parse_range("0:1:0")
        with pytest.raises(ValidationError):
            parse_range("2:1:1")


class TestSimplexAndField:
    def test_exact_sum(self):
        SimplexVector((F(3, 5), F(2, 5)))
        with pytest.raises(ValidationError):
            SimplexVector((F(3, 5), F(1, 2)))

    def test_out_of_range(self):
        with pytest.raises(ValidationError):
            SimplexVector((F(3, 2), F(-1, 2)))

    def test_float_tolerance(self):
        SimplexVector((0.1, 0.2, 0.7))

    def test_field_must_cover_grid(self, ref_grid):
        with pytest.raises(ValidationError):
            ChoiceProbField(ref_grid, {(-1, -1): (F(1), F(0))})

    def test_field_equality(self):
        grid = UtilityGrid(((0, 0), (1, 0)))
        a = ChoiceProbField(grid, {(0, 0): (F(1, 2), F(1, 2)), (1, 0): (F(1), F(0))})
        b = ChoiceProbField(grid, {(1, 0): (F(1), F(0)), (0, 0): (F(1, 2), F(1, 2))})
        assert a == b
        assert list(a.coordinate(0)) == [F(1, 2), F(1)]


class TestInterval:
    def test_invalid(self):
        with pytest.raises(ValidationError):
            Interval(1, 0)

    def test_width_and_contains(self):
        interval = Interval(F(3, 5), 1)
        assert interval.width == F(2, 5)
        assert interval.contains(F(3, 5))
        assert not Interval(F(3, 5), 1, closed_lo=False).contains(F(3, 5))
        assert Interval(F(7, 10), 1).is_subset_of(interval)


class TestKMaximalPoint:
    def test_reference_grid(self, ref_grid):
        assert k_maximal_point(ref_grid, 0) == UtilityPoint((1, -1))
        assert k_maximal_point(ref_grid, 1) == UtilityPoint((-1, 1))

    def test_missing(self):
        grid = UtilityGrid(((1, 0, 1), (1, 1, 0)))
        assert k_maximal_point(grid, 0) is None

    def test_always_exists_on_rectangles(self):
        grid = UtilityGrid.rectangle([[-2, 0, 3], [-1, 4], [0, 1]])
        for k in range(3):
            assert k_maximal_point(grid, k) is not None

    def test_bad_index(self, ref_grid):
        with pytest.raises(ValidationError):
            k_maximal_point(ref_grid, 2)

    def test_utility_difference_bound(self, ref_grid):
        assert utility_difference_bound(ref_grid) == 2

    def test_utility_difference_bound_examples(self):
        assert utility_difference_bound(UtilityGrid(((3, 5),))) == 2
        assert utility_difference_bound(UtilityGrid(((0, 0, 0), (2, -1, 0)))) == 3

    def test_singleton_and_ordered_ties(self):
        assert k_maximal_point(UtilityGrid(((3, 5),)), 1) == UtilityPoint((3, 5))
        assert k_maximal_point(UtilityGrid(((0, 0), (1, 1))), 0) == UtilityPoint((0, 0))

    def test_defining_inequality(self):
        grid = UtilityGrid.rectangle([[-1, 0, 2], [0, 3], [1, 2]])
        for k in range(grid.K):
            u_star = k_maximal_point(grid, k)
            for w in grid:
                for j in range(grid.K):
                    assert u_star[k] - u_star[j] >= w[k] - w[j]


class TestExtendedAdd:
    def test_finite(self):
        assert extended_add(ExtendedReal.finite(2), 3) == ExtendedReal.finite(5)
        assert extended_add(ExtendedReal.finite(F(-3, 2)), 0) == ExtendedReal.finite(F(-3, 2))

    def test_neg_inf_absorbs(self):
        assert extended_add(NEG_INF, 100) == NEG_INF

    def test_summand_must_be_finite(self):
        with pytest.raises(ValidationError):
            extended_add(ExtendedReal.finite(0), float("inf"))

    def test_monotone(self):
        values = [NEG_INF, ExtendedReal.finite(-1), ExtendedReal.finite(F(1, 2))]
        for a in values:
            for b in values:
                if a < b:
                    assert not extended_add(b, 2) < extended_add(a, 2)
