"""
Tests for graded 𝔽₂ algebras: presentations, products, squares, Wu classes.
"""

import pytest

from f2_rings import (
    build_ring, format_polynomial, list_library, load_ring, parse_polynomial, parse_presentation,
    ring_from_library, ring_isomorphic,
)
from utils import DegreeOverflow, InconsistentPresentation, PresentationSyntaxError, SingularPairing

CLOSED_RINGS = ['rp2xrp2', 'rp2xtrp2', 'rp2xtrp2_wx', 's2xrp2', 's2xtrp2', 's4']


# =============================================================================
# Polynomials and presentations
# =============================================================================

class TestPolynomials:

    def test_parse_cancels_mod_two(self):
        assert parse_polynomial('t*u + u*t + u^2', ('t', 'u')) == frozenset([(0, 2)])

    def test_format(self):
        p = parse_polynomial('u^2 + t*u', ('t', 'u'))
        assert format_polynomial(p, ('t', 'u')) == 't*u + u^2'
        assert format_polynomial(frozenset(), ('t', 'u')) == '0'

    def test_unknown_generator(self):
        with pytest.raises(PresentationSyntaxError):
            parse_polynomial('t*v', ('t', 'u'))

    def test_bad_exponent(self):
        with pytest.raises(PresentationSyntaxError):
            parse_polynomial('t^x', ('t',))


class TestPresentations:

    def test_parse_comments_and_directives(self):
        pres = parse_presentation("# comment\nname demo\ngen t 1\nrel t^3  # cube\ntop 2\n")
        assert pres.name == 'demo'
        assert pres.generators == [('t', 1)]
        assert pres.relations == ['t^3']
        assert pres.top_degree == 2

    def test_missing_top(self):
        with pytest.raises(PresentationSyntaxError):
            parse_presentation("gen t 1\n")

    def test_unknown_directive(self):
        with pytest.raises(PresentationSyntaxError):
            parse_presentation("gen t 1\nbogus 3\ntop 2\n")

    def test_malformed_gen_line(self):
        with pytest.raises(PresentationSyntaxError):
            parse_presentation("gen t\ntop 2\n")

    def test_duplicate_generators(self):
        with pytest.raises(PresentationSyntaxError):
            parse_presentation("gen t 1\ngen t 2\ntop 2\n")

    def test_inhomogeneous_relation(self):
        with pytest.raises(PresentationSyntaxError):
            build_ring("gen t 1\ngen u 2\nrel t + u\ntop 3\n")

    def test_unit_relation_is_inconsistent(self):
        with pytest.raises(InconsistentPresentation):
            build_ring("gen t 1\nrel 1\ntop 2\n")

    def test_squares_must_preserve_ideal(self):
        with pytest.raises(InconsistentPresentation):
            build_ring("gen t 1\ngen u 2\nrel u + t^2\nsq1 u t^3\ntop 3\n")

    def test_sq1_on_degree_one_is_forced(self):
        with pytest.raises(InconsistentPresentation):
            build_ring("gen t 1\nsq1 t 0\ntop 3\n")

    def test_degenerate_pairing(self):
        with pytest.raises(SingularPairing):
            build_ring("gen t 1\ngen s 2\nrel t^2\nrel s*t\nrel s^2\ntop 2\nfundamental s\n")


# =============================================================================
# Library rings
# =============================================================================

class TestLibrary:

    def test_listing(self, rings_dir):
        names = list_library(rings_dir)
        assert set(CLOSED_RINGS) <= set(names)
        assert 'z4' in names

    def test_missing_ring(self, rings_dir):
        with pytest.raises(FileNotFoundError):
            ring_from_library('nope', rings_dir)

    def test_load_by_path(self, rings_dir):
        ring = load_ring(rings_dir / 'rp2xrp2.ring')
        assert ring.name == 'rp2xrp2'

    @pytest.mark.parametrize('name,dims', [
        ('rp2xrp2', [1, 2, 3, 2, 1]),
        ('rp2xtrp2', [1, 2, 3, 2, 1]),
        ('s2xrp2', [1, 1, 2, 1, 1]),
        ('s2xtrp2', [1, 1, 2, 1, 1]),
        ('s4', [1, 0, 0, 0, 1]),
    ])
    def test_dims(self, name, dims, rings_dir):
        assert ring_from_library(name, rings_dir).dims() == dims

    def test_z4_is_periodic(self, rings_dir):
        assert ring_from_library('z4', rings_dir).dims() == [1] * 7


# =============================================================================
# Products and squares
# =============================================================================

class TestProducts:

    def test_twisted_relation(self, rings_dir):
        ring = ring_from_library('s2xtrp2', rings_dir)
        u = ring.generator('u')
        assert ring.cup(u, u) == ring.class_from_polynomial('x^2*u')

    def test_cup_above_top_overflows(self, rings_dir):
        ring = ring_from_library('rp2xrp2', rings_dir)
        top = ring.class_from_polynomial('t^2*u^2')
        with pytest.raises(DegreeOverflow):
            ring.cup(top, ring.generator('t'))

    def test_class_above_top_overflows(self, rings_dir):
        with pytest.raises(DegreeOverflow):
            ring_from_library('rp2xrp2', rings_dir).class_from_polynomial('t^5')

    def test_sq_of_degree_one(self, rings_dir):
        ring = ring_from_library('rp2xrp2', rings_dir)
        t = ring.generator('t')
        assert ring.sq(1, t) == ring.cup(t, t)
        assert ring.sq(0, t) == t
        assert ring.sq(2, t).is_zero

    def test_negative_square_index(self, rings_dir):
        ring = ring_from_library('rp2xrp2', rings_dir)
        with pytest.raises(ValueError):
            ring.sq(-1, ring.generator('t'))

    @pytest.mark.parametrize('name', CLOSED_RINGS)
    def test_cartan_formula_on_basis(self, name, rings_dir):
        ring = ring_from_library(name, rings_dir)
        n = ring.top_degree
        for i in range(n + 1):
            for j in range(n + 1 - i):
                for a in ring.basis(i):
                    for b in ring.basis(j):
                        for k in range(n - i - j + 1):
                            total = ring.zero(i + j + k)
                            for l in range(k + 1):
                                total = total + ring.cup(ring.sq(l, a), ring.sq(k - l, b))
                            assert ring.sq(k, ring.cup(a, b)) == total


# =============================================================================
# Wu and Stiefel-Whitney classes
# =============================================================================

class TestWuClasses:

    @pytest.mark.parametrize('name,v1,v2', [
        ('rp2xrp2', 't + u', 't*u'),
        ('rp2xtrp2', 't + u', 't*u + u^2'),
        ('s2xrp2', 'x', '0'),
        ('s2xtrp2', 'x', 'x^2'),
        ('s4', '0', '0'),
    ])
    def test_values(self, name, v1, v2, rings_dir):
        w1, w2 = ring_from_library(name, rings_dir).wu_classes()
        assert str(w1) == v1
        assert str(w2) == v2

    def test_defining_property(self, rings_dir):
        ring = ring_from_library('rp2xtrp2', rings_dir)
        v2 = ring.wu_class(2)
        for y in ring.all_classes(2):
            assert ring.evaluate(ring.cup(v2, y)) == ring.evaluate(ring.sq(2, y))

    def test_above_half_dimension_vanishes(self, rings_dir):
        assert ring_from_library('rp2xrp2', rings_dir).wu_class(3).is_zero

    def test_stiefel_whitney_of_rp2xrp2(self, rings_dir):
        w1, w2 = ring_from_library('rp2xrp2', rings_dir).stiefel_whitney()
        assert str(w1) == 't + u'
        assert str(w2) == 't^2 + t*u + u^2'

    def test_needs_fundamental_class(self, rings_dir):
        with pytest.raises(SingularPairing):
            ring_from_library('z4', rings_dir).wu_class(1)


# =============================================================================
# Isomorphism
# =============================================================================

class TestIsomorphism:

    def test_two_presentations_of_the_twisted_product(self, rings_dir):
        result = ring_isomorphic(ring_from_library('rp2xtrp2', rings_dir),
                                 ring_from_library('rp2xtrp2_wx', rings_dir))
        assert result.isomorphic
        assert set(result.witness) == {'t', 'u'}

    def test_products_differ(self, rings_dir):
        result = ring_isomorphic(ring_from_library('rp2xrp2', rings_dir),
                                 ring_from_library('rp2xtrp2', rings_dir))
        assert not result
        assert result.maps_checked == 16

    def test_dimension_mismatch_short_circuits(self, rings_dir):
        result = ring_isomorphic(ring_from_library('rp2xrp2', rings_dir),
                                 ring_from_library('s2xrp2', rings_dir))
        assert not result.isomorphic
        assert result.maps_checked == 0

    def test_s2_bundles_agree_through_degree_three(self, rings_dir):
        a = ring_from_library('s2xrp2', rings_dir)
        b = ring_from_library('s2xtrp2', rings_dir)
        assert not ring_isomorphic(a, b).isomorphic
        assert ring_isomorphic(a.truncate(3), b.truncate(3)).isomorphic

    def test_rp2_products_differ_through_degree_three(self, rings_dir):
        a = ring_from_library('rp2xrp2', rings_dir).truncate(3)
        b = ring_from_library('rp2xtrp2', rings_dir).truncate(3)
        assert not ring_isomorphic(a, b).isomorphic

    def test_truncation_below_generator_rejected(self, rings_dir):
        with pytest.raises(ValueError):
            ring_from_library('s2xrp2', rings_dir).truncate(1)
