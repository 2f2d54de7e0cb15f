"""
Tests for the quadratic functor, twisted coinvariants and polarization orbits.
"""

import dataclasses

import numpy as np
import pytest

from exact_linalg import AbelianInvariants, IntMatrix
from gamma_quadratic import (
    SWAP, gamma_functor, gamma_labels, gamma_matrix, gamma_preset, torsion_orbit_count, twisted_coinvariants,
)
from group_homalg import module_preset
from utils import SymmetryNotInduced


# =============================================================================
# Γ on matrices
# =============================================================================

class TestGammaMatrix:

    def test_labels(self):
        assert gamma_labels(2) == ['g(e1)', 'g(e2)', '[e1,e2]']

    def test_identity(self):
        assert gamma_matrix(IntMatrix.identity(3)) == IntMatrix.identity(6)

    def test_negation_fixes_gamma(self):
        assert gamma_matrix(IntMatrix.identity(2).scale(-1)) == IntMatrix.identity(3)

    def test_swap(self):
        assert gamma_matrix(SWAP) == IntMatrix.from_rows([[0, 1, 0], [1, 0, 0], [0, 0, 1]])

    def test_rotation_swaps_and_negates_bracket(self):
        rot = IntMatrix.from_rows([[0, 1], [-1, 0]])
        assert gamma_matrix(rot) == IntMatrix.from_rows([[0, 1, 0], [1, 0, 0], [0, 0, -1]])

    def test_functorial(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            a = IntMatrix.from_rows(rng.integers(-3, 4, (3, 3)).tolist())
            b = IntMatrix.from_rows(rng.integers(-3, 4, (3, 3)).tolist())
            assert gamma_matrix(a @ b) == gamma_matrix(a) @ gamma_matrix(b)

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            gamma_matrix(IntMatrix.zeros(2, 3))


# =============================================================================
# Twisted coinvariants
# =============================================================================

class TestCoinvariants:

    @pytest.mark.parametrize('preset,expected', [
        ('RP2xRP2', 'Z + Z/2 + Z/2'),
        ('RP2xtRP2', 'Z + Z/2 + Z/2'),
        ('S2xRP2', 'Z + Z/2 + Z/2'),
        ('Z4', 'Z^2'),
        ('trivial', 'Z^3'),
    ])
    def test_presets(self, preset, expected):
        gm, _ = gamma_preset(preset)
        assert str(twisted_coinvariants(gm)) == expected

    def test_needs_integral_module(self):
        with pytest.raises(ValueError):
            gamma_functor(module_preset('F2-Z2'))

    def test_unknown_preset(self):
        with pytest.raises(ValueError):
            gamma_preset('RP4')


# =============================================================================
# Polarization orbits
# =============================================================================

class TestOrbits:

    def test_swap_identifies_factors(self):
        gm, syms = gamma_preset('RP2xRP2')
        report = torsion_orbit_count(gm, syms)
        assert report.torsion == AbelianInvariants(0, (2, 2))
        assert report.orbit_count == 3
        assert report.symmetries == ['factor-swap']
        assert sorted(len(orbit) for orbit in report.orbits) == [1, 1, 2]

    def test_without_symmetries_every_element_is_alone(self):
        gm, _ = gamma_preset('RP2xRP2')
        report = torsion_orbit_count(gm, {})
        assert report.orbit_count == 4
        assert report.to_dict()['torsion'] == {'free_rank': 0, 'torsion': [2, 2]}

    @pytest.mark.parametrize('preset', ['RP2xRP2', 'RP2xtRP2', 'S2xRP2', 'Z4'])
    @pytest.mark.parametrize('relabel', [
        [[0, 1], [1, 0]],
        [[-1, 0], [0, 1]],
        [[0, -1], [1, 0]],
    ])
    def test_counts_invariant_under_relabeling(self, preset, relabel):
        gm, syms = gamma_preset(preset)
        p = IntMatrix.from_rows(relabel)
        p_inv = p.transpose()
        base = gm.base
        moved = dataclasses.replace(base, actions=tuple(p @ a @ p_inv for a in base.actions))
        moved_syms = {name: p @ s @ p_inv for name, s in syms.items()}
        before = torsion_orbit_count(gm, syms)
        after = torsion_orbit_count(gamma_functor(moved), moved_syms)
        assert after.torsion == before.torsion
        assert after.orbit_count == before.orbit_count
        assert sorted(map(len, after.orbits)) == sorted(map(len, before.orbits))

    def test_s2xrp2_torsion(self):
        gm, syms = gamma_preset('S2xRP2')
        assert torsion_orbit_count(gm, syms).torsion == AbelianInvariants(0, (2, 2))

    def test_torsion_free_has_one_orbit(self):
        gm, _ = gamma_preset('Z4')
        report = torsion_orbit_count(gm)
        assert report.torsion.is_zero
        assert report.orbit_count == 1

    def test_non_invertible_symmetry(self):
        gm, _ = gamma_preset('RP2xRP2')
        with pytest.raises(SymmetryNotInduced):
            torsion_orbit_count(gm, {'double': IntMatrix.diagonal([2, 1])})

    def test_symmetry_must_normalize_action(self):
        gm, _ = gamma_preset('RP2xRP2')
        with pytest.raises(SymmetryNotInduced):
            torsion_orbit_count(gm, {'shear': IntMatrix.from_rows([[1, 1], [0, 1]])})
