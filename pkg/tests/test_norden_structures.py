"""
Unit tests for norden_structures module.
Tests the paracomplex structures, Φ, and the almost-product and conjugate connections.
"""
import pytest
import sys
from pathlib import Path

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

import levi_civita as lc
import norden_structures as ns
from catalog import manifold_spec, scaling_field
from cotangent_frame import CotangentPoint

FLAT = manifold_spec("flat").metric
SPHERE = manifold_spec("sphere").metric
HYPERBOLIC = manifold_spec("hyperbolic").metric
POLYNOMIAL = manifold_spec("polynomial").metric
ONE = scaling_field("one")
EXP = scaling_field("exp")
POLY = scaling_field("poly")

CURVED_CASES = [
    (SPHERE, POLY, [1.2, 0.3], [0.3, -0.2]),
    (HYPERBOLIC, EXP, [0.4, 1.5], [0.8, 0.1]),
    (POLYNOMIAL, POLY, [-0.3, 0.6], [1.0, 0.5]),
]


class TestStructures:
    """Test the structure matrices."""

    @pytest.mark.parametrize("structure", [ns.paracomplex_structure, ns.diagonal_lift_matrix])
    def test_involution(self, structure):
        """Test m² = I, m ≠ ±I and equal-rank eigenspaces."""
        m = structure(3)

        assert_array_equal(m @ m, np.eye(6))
        assert np.trace(m) == 0.0
        assert not np.array_equal(m, np.eye(6))

    def test_signs(self):
        """Test J is -1 on horizontal and +1 on vertical lifts; ᴰI the opposite."""
        assert_array_equal(np.diag(ns.paracomplex_structure(2)), [-1, -1, 1, 1])
        assert_array_equal(ns.diagonal_lift_matrix(2), -ns.paracomplex_structure(2))

    def test_wrong_shape(self):
        """Test a structure of the wrong size is rejected."""
        with pytest.raises(ValueError):
            ns.phi_operator(FLAT, ONE, CotangentPoint.at([0.0, 0.0], [0.0, 0.0]), np.eye(3))


class TestPhi:
    """Test phi_operator, phi_closed_form and quasi_kahler_sum."""

    @pytest.mark.parametrize("scaling, p", [(ONE, [0.5, 0.5]), (EXP, [1.0, -0.3]), (POLY, [0.0, 0.0])])
    def test_flat_base_is_para_kahler(self, scaling, p):
        """Test Φ_J G vanishes on a flat base."""
        phi = ns.phi_operator(FLAT, scaling, CotangentPoint.at([0.3, -0.4], p))
        assert np.max(np.abs(phi)) <= 1e-8

    @pytest.mark.parametrize("metric, scaling, x, p", CURVED_CASES)
    def test_closed_form(self, metric, scaling, x, p):
        """Test the Lie-derivative form against the closed form."""
        pt = CotangentPoint.at(x, p)
        assert_allclose(ns.phi_operator(metric, scaling, pt), ns.phi_closed_form(metric, scaling, pt), atol=1e-7)

    @pytest.mark.parametrize("metric, scaling, x, p", CURVED_CASES)
    def test_curved_base_is_not_para_kahler(self, metric, scaling, x, p):
        """Test Φ_J G is nonzero on a curved base away from the zero section."""
        assert np.max(np.abs(ns.phi_operator(metric, scaling, CotangentPoint.at(x, p)))) >= 1e-3

    def test_vertical_block_vanishes(self):
        """Test the (V, V, V) block of Φ is zero."""
        phi = ns.phi_operator(SPHERE, POLY, CotangentPoint.at([1.0, 0.0], [0.3, -0.2]))
        assert_allclose(phi[2:, 2:, 2:], 0.0, atol=1e-10)

    @pytest.mark.parametrize("metric, scaling, x, p", CURVED_CASES)
    def test_quasi_kahler(self, metric, scaling, x, p):
        """Test the cyclic sum of Φ_J G vanishes on curved bases too."""
        phi = ns.phi_operator(metric, scaling, CotangentPoint.at(x, p))
        assert np.max(np.abs(ns.quasi_kahler_sum(phi))) <= 1e-7

    def test_quasi_kahler_negative_control(self):
        """Test a non-structure matrix breaks the cyclic identity."""
        phi = ns.phi_operator(FLAT, ONE, CotangentPoint.at([0.0, 0.0], [0.5, 0.3]), np.ones((4, 4)))
        assert np.max(np.abs(ns.quasi_kahler_sum(phi))) > 1e-6


class TestDiagonalLift:
    """Test diagonal_lift_structure."""

    def test_flat_base(self):
        """Test ᴰI is paraholomorphic on a flat base."""
        lift = ns.diagonal_lift_structure(FLAT, EXP, CotangentPoint.at([0.1, 0.1], [0.4, 0.8]))

        assert lift.square_defect == 0.0
        assert lift.purity_defect == 0.0
        assert lift.paraholomorphy_defect <= 1e-8

    def test_sphere(self):
        """Test paraholomorphy fails on the sphere at p ≠ 0."""
        lift = ns.diagonal_lift_structure(SPHERE, ONE, CotangentPoint.at([1.0, 0.5], [0.5, 0.5]))
        assert lift.paraholomorphy_defect > 1e-3


class TestAlmostProductConnection:
    """Test the almost-product connection and its torsion."""

    @pytest.mark.parametrize("metric, scaling, x, p", CURVED_CASES)
    def test_explicit_form(self, metric, scaling, x, p):
        """Test ∇̃ - S against the explicit cases."""
        pt = CotangentPoint.at(x, p)
        assert_allclose(ns.almost_product_connection(metric, scaling, pt).gamma,
                        ns.almost_product_explicit(metric, scaling, pt).gamma, atol=1e-7)

    @pytest.mark.parametrize("metric, scaling, x, p", CURVED_CASES)
    def test_structure_is_parallel(self, metric, scaling, x, p):
        """Test ∇̄J = 0."""
        pt = CotangentPoint.at(x, p)
        table = ns.almost_product_connection(metric, scaling, pt).gamma

        assert_allclose(ns.structure_derivative(table, ns.paracomplex_structure(2)), 0.0, atol=1e-7)

    @pytest.mark.parametrize("metric, scaling, x, p", CURVED_CASES)
    def test_torsion_formulas(self, metric, scaling, x, p):
        """Test the torsion against its closed form."""
        pt = CotangentPoint.at(x, p)
        assert_allclose(ns.almost_product_torsion(metric, scaling, pt),
                        ns.almost_product_torsion_formula(metric, scaling, pt), atol=1e-7)

    def test_flat_base_is_symmetric(self):
        """Test the torsion vanishes on a flat base."""
        torsion = ns.almost_product_torsion(FLAT, POLY, CotangentPoint.at([0.5, 0.5], [1.0, -1.0]))
        assert np.max(np.abs(torsion)) <= 1e-8

    def test_horizontal_torsion_on_sphere(self):
        """Test T̄(^HX, ^HY) = -^V(p∘R(X, Y)) is nonzero on the sphere."""
        pt = CotangentPoint.at([1.0, 0.0], [0.6, 0.2])
        torsion = ns.almost_product_torsion(SPHERE, ONE, pt)

        assert np.max(np.abs(torsion[2:, :2, :2])) >= 1e-3


class TestProductConjugate:
    """Test the product conjugate connection."""

    @pytest.mark.parametrize("metric, scaling, x, p", CURVED_CASES)
    def test_closed_form(self, metric, scaling, x, p):
        """Test J∇̃J against the sign-flipped closed form."""
        pt = CotangentPoint.at(x, p)
        assert_allclose(ns.product_conjugate_connection(metric, scaling, pt).gamma,
                        ns.product_conjugate_formula(metric, scaling, pt).gamma, atol=1e-6)

    def test_flat_horizontal_block_unchanged(self):
        """Test the horizontal block is untouched on a flat base with f = 1."""
        pt = CotangentPoint.at([0.0, 0.0], [0.3, 0.3])
        conj = ns.product_conjugate_connection(FLAT, ONE, pt).gamma
        tilde = lc.koszul_oracle(FLAT, ONE, pt).gamma

        assert_allclose(conj[:, :2, :2], tilde[:, :2, :2], atol=1e-12)

    def test_curvature_term_flips(self):
        """Test the ½ p∘R term changes sign on the sphere."""
        pt = CotangentPoint.at([1.1, 0.0], [0.5, -0.5])
        conj = ns.product_conjugate_formula(SPHERE, ONE, pt).gamma
        tilde = lc.connection_formula(SPHERE, ONE, pt).gamma

        assert_allclose(conj[2:, :2, :2], -tilde[2:, :2, :2])
        assert np.max(np.abs(tilde[2:, :2, :2])) > 1e-3

    @pytest.mark.parametrize("metric, scaling, x, p", CURVED_CASES)
    def test_metric_connection(self, metric, scaling, x, p):
        """Test J∇̃J is compatible with G."""
        pt = CotangentPoint.at(x, p)
        table = ns.product_conjugate_connection(metric, scaling, pt).gamma

        assert lc.metric_compatibility_defect(table, metric, scaling, pt) <= 1e-6

    def test_diagonal_lift_variant(self):
        """Test the ᴰI-conjugate connection equals the J-conjugate one."""
        pt = CotangentPoint.at([0.9, 0.2], [0.1, 0.7])
        by_j = ns.product_conjugate_connection(SPHERE, POLY, pt).gamma
        by_di = ns.product_conjugate_connection(SPHERE, POLY, pt, ns.diagonal_lift_matrix(2)).gamma

        assert_allclose(by_di, by_j)


class TestConjugateCurvature:
    """Test conjugate_curvature_check."""

    def test_flat_zero_section(self):
        """Test the relation on the plane at p = 0."""
        assert ns.conjugate_curvature_check(FLAT, ONE, CotangentPoint.at([0.0, 0.0], [0.0, 0.0])) <= 1e-7

    @pytest.mark.parametrize("metric, scaling, x, p", CURVED_CASES)
    def test_curved(self, metric, scaling, x, p):
        """Test R^(J)(X, Y)Z = J R̃(X, Y) JZ."""
        assert ns.conjugate_curvature_check(metric, scaling, CotangentPoint.at(x, p)) <= 1e-5

    def test_identity_structure(self):
        """Test the relation is trivial for the identity."""
        pt = CotangentPoint.at([1.0, 0.3], [0.2, 0.2])
        assert ns.conjugate_curvature_check(SPHERE, POLY, pt, np.eye(4)) <= 1e-12
