import pytest

from arum_consideration.core import UtilityGrid
from arum_consideration.equivalence import (
    arum_e_to_cs,
    as_consideration_model,
    atomwise_choices_agree,
    cs_to_arum,
    cs_to_arum_e,
    embed_arum_in_cs,
    never_chosen_shock,
    verify_equivalence,
)
from arum_consideration.errors import ValidationError
from arum_consideration.model_io import model_hash
from arum_consideration.models import (
    ArumCsDistribution,
    ArumDistribution,
    ArumEDistribution,
    ConsiderationAtom,
    EpsilonAtom,
    choice_prob_field,
)

from .conftest import F, random_instances


class TestTransforms:
    def test_cs_to_arum_e_masks_unconsidered(self, reference):
        mu = cs_to_arum_e(reference)
        assert isinstance(mu, ArumEDistribution)
        assert not mu.atoms[1].eps[0].is_finite
        assert mu.atoms[1].eps[1].value == 0
        assert mu.provenance.construction == "cs_to_arum_e"
        assert mu.provenance.source_hash == model_hash(reference)

    def test_arum_e_to_cs_sets_consideration(self, reference):
        nu = arum_e_to_cs(cs_to_arum_e(reference))
        assert [a.consideration_set for a in nu.atoms] == [frozenset({0, 1}), frozenset({1})]

    def test_never_chosen_shock_reference(self, reference, ref_grid):
        # min over u of (u_1 - u_0) is -2, max of (u_0 - u_0) is 0.
        assert never_chosen_shock(reference.atoms[1], ref_grid, 0) == -3

    def test_cs_to_arum_reference(self, reference, ref_grid):
        model = cs_to_arum(reference, ref_grid)
        assert isinstance(model, ArumDistribution)
        assert model.atoms[1].eps[0].value == -3
        assert model.atoms[0].eps == cs_to_arum_e(reference).atoms[0].eps

    def test_cs_to_arum_dimension_check(self, reference):
        with pytest.raises(ValidationError):
            cs_to_arum(reference, UtilityGrid(((0, 0, 0),)))

    def test_embed(self, ref_grid):
        model = ArumDistribution((
            EpsilonAtom((F(0), F(1, 2)), F(1, 2)),
            EpsilonAtom((F(1, 3), F(0)), F(1, 2)),
        ))
        nu = embed_arum_in_cs(model)
        assert all(a.consideration_set == frozenset({0, 1}) for a in nu.atoms)
        assert choice_prob_field(nu, ref_grid) == choice_prob_field(model, ref_grid)
        assert as_consideration_model(model) == nu
        assert as_consideration_model(nu) is nu


class TestObservationalEquivalence:
    def test_reference_exact(self, reference, ref_grid):
        for image in (cs_to_arum_e(reference), cs_to_arum(reference, ref_grid)):
            report = verify_equivalence(reference, image, ref_grid)
            assert report.passed
            assert report.max_discrepancy == 0

    def test_random_instances(self):
        """Fields of nu, its ARUM-E image and its ARUM image agree exactly."""
        for nu, grid in random_instances(seed=2024, count=200):
            field = choice_prob_field(nu, grid)
            assert choice_prob_field(cs_to_arum_e(nu), grid) == field
            arum = cs_to_arum(nu, grid)
            assert choice_prob_field(arum, grid) == field
            assert atomwise_choices_agree(nu, arum, grid)

    def test_roundtrip_through_arum_e(self):
        for nu, grid in random_instances(seed=7, count=30):
            back = arum_e_to_cs(cs_to_arum_e(nu))
            assert choice_prob_field(back, grid) == choice_prob_field(nu, grid)
            assert [a.consideration_set for a in back.atoms] == [a.consideration_set for a in nu.atoms]

    def test_detects_difference(self, reference, ref_grid):
        other = ArumCsDistribution((ConsiderationAtom((F(1, 2), F(0)), {0, 1}, F(1)),))
        report = verify_equivalence(reference, other, ref_grid)
        assert not report.passed
        assert report.max_discrepancy == F(2, 5)
        assert len(report.rows()) == len(ref_grid)

    def test_dimension_mismatch(self, reference, ref_grid):
        other = ArumDistribution((EpsilonAtom((F(0), F(1, 3), F(2, 3)), F(1)),))
        with pytest.raises(ValidationError):
            verify_equivalence(reference, other, ref_grid)
