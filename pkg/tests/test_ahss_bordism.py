"""
Tests for the bordism spectral sequence of the ℤ/4 and trivial normal 1-types.
"""

import dataclasses
from itertools import combinations

import pytest

from ahss_bordism import (
    LISTED_ROW, TOPSPIN_ROW, BordismInput, Status, bordism_answer, bordism_input_for, d2_dual, d2_dual_matrix,
    e2_page, e3_page,
)
from exact_linalg import AbelianInvariants, f2_rank
from f2_rings import ring_from_library
from utils import DegreeOverflow

Z = AbelianInvariants(1, ())
Z2 = AbelianInvariants(0, (2,))


@pytest.fixture
def z4():
    return bordism_input_for('Z4')


def nonzero(page):
    return sorted([p, q] for (p, q), e in page.entries.items()
                  if e.invariants is None or not e.invariants.is_zero)


# =============================================================================
# Inputs
# =============================================================================

class TestInputs:

    def test_z4_defaults(self, z4):
        assert str(z4.w1) == 'x'
        assert str(z4.w2) == 'u'
        assert z4.orientation_weight() == (-1,)
        assert z4.coefficient_row == TOPSPIN_ROW

    def test_klein_four_orientation(self):
        inp = bordism_input_for('Z2xZ2')
        assert inp.orientation_weight() == (-1, -1)

    def test_listed_row(self):
        assert bordism_input_for('Z4', coefficients='listed').coefficient_row == LISTED_ROW

    def test_unsupported_group(self):
        with pytest.raises(ValueError):
            bordism_input_for('Z3')

    def test_explicit_ring_and_characters(self):
        inp = bordism_input_for('Z4', ring=ring_from_library('z4'), characters={'x': (1,)})
        assert str(inp.w1) == 'x'
        assert inp.orientation_weight() == (-1,)

    def test_character_length_checked(self):
        with pytest.raises(ValueError):
            bordism_input_for('Z2xZ2', characters={'t': (1,), 'u': (0, 1)})

    def test_ring_must_match_group(self):
        inp = bordism_input_for('Z4', 't', 't*u', ring=ring_from_library('z2xz2'), characters={'t': (1,)})
        with pytest.raises(ValueError):
            e2_page(inp, 4)

    def test_w1_degree_checked(self, z4):
        with pytest.raises(ValueError):
            BordismInput(z4.group, z4.ring, z4.w2, z4.w2)

    def test_row_length_checked(self, z4):
        with pytest.raises(ValueError):
            BordismInput(z4.group, z4.ring, z4.w1, z4.w2, TOPSPIN_ROW[:4])

    def test_classes_from_other_ring_rejected(self, z4):
        other = bordism_input_for('Z4')
        with pytest.raises(ValueError):
            BordismInput(z4.group, z4.ring, other.w1, z4.w2)


# =============================================================================
# d̂ = Sq² + Sq¹·w₁ + ·w₂
# =============================================================================

class TestDualDifferential:

    @pytest.mark.parametrize('cls,degree,expected', [
        ('x', 1, 'x*u'),
        ('u', 2, '0'),
        ('x*u', 3, '0'),
        ('u^2', 4, 'u^3'),
    ])
    def test_values_for_z4(self, z4, cls, degree, expected):
        assert str(d2_dual(z4.ring.class_from_polynomial(cls, degree), z4)) == expected

    def test_matrix_columns(self, z4):
        m = d2_dual_matrix(z4, 1)
        assert (m.rows, m.cols) == (1, 1)
        assert not m.is_zero()

    @pytest.mark.parametrize('group', ['Z4', 'Z2xZ2'])
    @pytest.mark.parametrize('degree', [0, 1, 2, 3, 4])
    def test_linear_over_basis_pairs(self, group, degree):
        inp = bordism_input_for(group)
        basis = inp.ring.basis(degree)
        for a, b in combinations(basis, 2):
            assert (d2_dual(a + b, inp)).bits == (d2_dual(a, inp) + d2_dual(b, inp)).bits
        for a in basis:
            assert d2_dual(a + a, inp).is_zero()

    @pytest.mark.parametrize('group', ['Z4', 'Z2xZ2'])
    @pytest.mark.parametrize('degree', [0, 1, 2, 3, 4])
    def test_rank_survives_dualization(self, group, degree):
        m = d2_dual_matrix(bordism_input_for(group), degree)
        assert f2_rank(m) == f2_rank(m.transpose())

    def test_leaves_ring(self, z4):
        with pytest.raises(DegreeOverflow):
            d2_dual(z4.ring.class_from_polynomial('x*u^2', 5), z4)


# =============================================================================
# Pages
# =============================================================================

class TestPages:

    def test_e2_entries(self, z4):
        page = e2_page(z4, 5)
        assert page.entry(0, 0).invariants == Z2
        assert page.entry(1, 1).dim == 1
        assert page.entry(2, 3).invariants.is_zero
        assert page.entry(0, 4).invariants == Z2

    def test_e2_beyond_ring(self, z4):
        with pytest.raises(ValueError):
            e2_page(z4, 7)

    def test_e3_total_degree_four(self, z4):
        assert nonzero(e3_page(z4, (4,))) == [[0, 4], [2, 2], [4, 0]]

    def test_e3_total_degree_five(self, z4):
        assert nonzero(e3_page(z4, (5,))) == [[3, 2]]

    @pytest.mark.parametrize('group', ['Z4', 'trivial'])
    def test_e3_never_exceeds_e2(self, group):
        inp = bordism_input_for(group)
        e2, e3 = e2_page(inp, 6), e3_page(inp)
        for (p, q), entry in e3.entries.items():
            if entry.invariants is None or entry.invariants.is_zero:
                continue
            before = e2.entry(p, q)
            if entry.dim is not None and before.dim is not None:
                assert entry.dim <= before.dim
            else:
                assert entry.invariants == before.invariants

    def test_differentials_are_recorded(self, z4):
        page = e3_page(z4)
        assert page.differentials
        assert all(d.status == Status.COMPUTED for d in page.differentials if d.rank)

    def test_row_one_differentials_flagged(self, z4):
        page = e3_page(z4)
        for d in page.differentials:
            if d.source[1] == 1 and d.source != (3, 1):
                assert 'unconfirmed' in d.flags


# =============================================================================
# Answer
# =============================================================================

class TestAnswer:

    def test_z4(self, z4):
        answer = bordism_answer(z4)
        assert sorted((s.p, s.q, str(s.invariants)) for s in answer.summands) == \
            [(0, 4, 'Z/2'), (2, 2, 'Z/2'), (4, 0, 'Z/2')]
        assert answer.invariants == AbelianInvariants(0, (2, 2, 2))
        assert not answer.unknown

    def test_e8_term_is_flagged(self, z4):
        answer = bordism_answer(z4)
        flagged = [(s.p, s.q) for s in answer.summands if s.flags]
        assert flagged == [(4, 0)]
        assert any('split' in a for a in answer.assumptions)

    def test_e8_killed(self):
        answer = bordism_answer(bordism_input_for('Z4', e8_survives=False))
        assert answer.invariants == AbelianInvariants(0, (2, 2))
        assert any('killed' in a for a in answer.assumptions)

    def test_zeroed_top_coefficient_drops_that_summand(self, z4):
        row = TOPSPIN_ROW[:4] + (AbelianInvariants.zero(),)
        answer = bordism_answer(dataclasses.replace(z4, coefficient_row=row))
        assert answer.invariants == AbelianInvariants(0, (2, 2))
        assert sorted((s.p, s.q) for s in answer.summands) == [(2, 2), (4, 0)]

    def test_d3_audit(self, z4):
        audit = bordism_answer(z4).d3_audit
        assert audit['source'] == [3, 2]
        assert audit['target'] == [0, 4]

    def test_trivial_group(self):
        answer = bordism_answer(bordism_input_for('trivial'))
        assert answer.invariants == Z
        assert [(s.p, s.q) for s in answer.summands] == [(0, 4)]

    def test_to_dict(self, z4):
        out = bordism_answer(z4).to_dict()
        assert out['invariants'] == {'free_rank': 0, 'torsion': [2, 2, 2]}
        assert len(out['summands']) == 3
