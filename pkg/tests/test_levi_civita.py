"""
Unit tests for levi_civita module.
Tests the scaling tensor, the closed-form connection and the Koszul oracle.
"""
import pytest
import sys
from pathlib import Path

import jax.numpy as jnp
import numpy as np
from hypothesis import given, settings
from hypothesis.strategies import floats
from numpy.testing import assert_allclose

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

import cotangent_frame as cf
import levi_civita as lc
from catalog import manifold_spec, scaling_field
from cg_metric import ConditioningError, ScalingField
from cotangent_frame import CotangentPoint
from jet_calculus import DiffEngine, DiffScheme
from levi_civita import LiftedField

FLAT = manifold_spec("flat").metric
SPHERE = manifold_spec("sphere").metric
HYPERBOLIC = manifold_spec("hyperbolic").metric
POLYNOMIAL = manifold_spec("polynomial").metric
ONE = scaling_field("one")
EXP = scaling_field("exp")
POLY = scaling_field("poly")


def exp_first_coordinate(x):
    return jnp.exp(x[0])


EXP_X1 = ScalingField("exp_x1", exp_first_coordinate)


class TestATensor:
    """Test a_tensor and difference_tensor."""

    def test_constant_scaling(self):
        """Test ᶠA vanishes for f = 1."""
        assert_allclose(lc.a_tensor(SPHERE, ONE, [1.0, 0.0]).a, 0.0)

    def test_exponential_scaling(self):
        """Test ᶠA^h_ji = δ^h_i δ¹_j + δ^h_j δ¹_i - δ^{h1} δ_ji for f = exp(x¹) on the plane."""
        a = lc.a_tensor(FLAT, EXP_X1, [0.0, 0.0]).a
        eye = np.eye(2)
        expected = (np.einsum("hi,j->hji", eye, eye[0]) + np.einsum("hj,i->hji", eye, eye[0])
                    - np.einsum("h,ji->hji", eye[0], eye))

        assert_allclose(a, expected, atol=1e-14)
        assert a[0, 0, 0] == pytest.approx(1.0)

    def test_symmetric(self):
        """Test ᶠA^h_ji = ᶠA^h_ij."""
        a = lc.a_tensor(POLYNOMIAL, POLY, [0.3, -0.8]).a
        assert_allclose(a, a.transpose(0, 2, 1), atol=1e-15)

    def test_difference_tensor_is_half(self):
        """Test D = ½ ᶠA."""
        x = [0.5, 0.5]
        assert_allclose(lc.difference_tensor(SPHERE, POLY, x).a, 0.5 * lc.a_tensor(SPHERE, POLY, x).a)

    def test_callable(self):
        """Test ᶠA(X, Y) contracts the lower indices."""
        a = lc.a_tensor(FLAT, EXP_X1, [0.0, 0.0])
        assert_allclose(a([1.0, 0.0], [1.0, 0.0]), [1.0, 0.0], atol=1e-14)


class TestReadings:
    """Test reading resolution."""

    def test_by_name(self):
        """Test readings resolve from their names."""
        assert lc.resolve_reading("corrected") is lc.CORRECTED
        assert lc.resolve_reading(lc.PRINTED) is lc.PRINTED

    def test_unknown(self):
        """Test unknown reading names raise ValueError."""
        with pytest.raises(ValueError):
            lc.resolve_reading("typo")


class TestConnectionFormula:
    """Test connection_formula against worked values and the Koszul oracle."""

    def test_flat_zero_section(self):
        """Test the whole table vanishes on the plane at p = 0."""
        table = lc.connection_formula(FLAT, ONE, CotangentPoint.at([0.1, 0.1], [0.0, 0.0]))
        assert_allclose(table.gamma, 0.0, atol=1e-15)

    def test_flat_fibre_block(self):
        """Test ∇̃_{E_1̄}E_1̄ = Σ_l (-δ^1_l + p_l) E_l̄ at p = (1, 0)."""
        pt = CotangentPoint.at([0.0, 0.0], [1.0, 0.0])
        gamma = lc.connection_formula(FLAT, ONE, pt).gamma

        assert_allclose(gamma[2:, 2, 2], [0.0, 0.0], atol=1e-15)
        assert_allclose(gamma[2:, 3, 3], [0.75, 0.0], atol=1e-15)

    def test_flat_matches_oracle(self):
        """Test formula and oracle agree on the plane at p = (1, 0)."""
        pt = CotangentPoint.at([0.0, 0.0], [1.0, 0.0])
        formula = lc.connection_formula(FLAT, ONE, pt).gamma
        assert_allclose(formula, lc.koszul_oracle(FLAT, ONE, pt).gamma, atol=1e-8)

    @pytest.mark.parametrize("metric, scaling, x, p", [
        (SPHERE, POLY, [1.2, 0.3], [0.3, -0.2]),
        (HYPERBOLIC, EXP, [0.4, 1.5], [0.8, 0.1]),
        (POLYNOMIAL, EXP, [-0.3, 0.6], [1.0, 0.5]),
        (FLAT, POLY, [0.7, -0.1], [-0.6, 0.9]),
    ])
    def test_matches_oracle(self, metric, scaling, x, p):
        """Test the corrected reading agrees with the Koszul oracle."""
        pt = CotangentPoint.at(x, p)
        formula = lc.connection_formula(metric, scaling, pt).gamma
        assert_allclose(formula, lc.koszul_oracle(metric, scaling, pt).gamma, atol=1e-6)

    def test_matches_oracle_with_finite_differences(self):
        """Test agreement survives the fd scheme within the relaxed tolerance."""
        engine = DiffEngine(DiffScheme("fd"))
        pt = CotangentPoint.at([1.0, 0.2], [0.5, 0.5])
        formula = lc.connection_formula(SPHERE, POLY, pt, engine=engine).gamma
        assert_allclose(formula, lc.koszul_oracle(SPHERE, POLY, pt, engine).gamma, atol=1e-4)

    def test_ill_conditioned_metric(self):
        """Test the oracle refuses a fibre point whose metric block is ill conditioned."""
        pt = CotangentPoint.at([0.0, 0.0], [1e10, 0.0])
        with pytest.raises(ConditioningError):
            lc.koszul_oracle(FLAT, ONE, pt)

    def test_printed_reading_rejected(self):
        """Test the unhalved scaling tensor disagrees with the oracle when df ≠ 0."""
        pt = CotangentPoint.at([0.5, 0.0], [0.2, 0.2])
        printed = lc.connection_formula(FLAT, EXP, pt, lc.PRINTED).gamma
        oracle = lc.koszul_oracle(FLAT, EXP, pt).gamma

        assert np.max(np.abs(lc.block_view(printed - oracle, "HH"))) > 1e-3

    def test_readings_agree_for_constant_scaling(self):
        """Test f = 1 makes both readings coincide."""
        pt = CotangentPoint.at([1.0, 1.0], [0.3, 0.4])
        assert_allclose(lc.connection_formula(SPHERE, ONE, pt, "printed").gamma,
                        lc.connection_formula(SPHERE, ONE, pt, "corrected").gamma)

    def test_block_view(self):
        """Test block names select direction and argument ranges."""
        table = np.arange(64.0).reshape(4, 4, 4)

        assert lc.block_view(table, "HV").shape == (4, 2, 2)
        assert lc.block_view(table, "VH")[0, 0, 0] == table[0, 2, 0]


class TestConnectionIdentities:
    """Test metric compatibility and torsion-freeness."""

    @pytest.mark.parametrize("metric, scaling, x, p", [
        (SPHERE, EXP, [0.9, -1.0], [0.2, 0.6]),
        (POLYNOMIAL, POLY, [0.2, 0.2], [-0.7, 0.3]),
    ])
    def test_metric_compatible(self, metric, scaling, x, p):
        """Test ∇̃G = 0 for the closed form."""
        pt = CotangentPoint.at(x, p)
        table = lc.connection_formula(metric, scaling, pt).gamma

        assert lc.metric_compatibility_defect(table, metric, scaling, pt) < 1e-6

    @pytest.mark.parametrize("metric, scaling, x, p", [
        (SPHERE, EXP, [0.9, -1.0], [0.2, 0.6]),
        (HYPERBOLIC, POLY, [-0.5, 0.8], [1.0, -1.0]),
    ])
    def test_torsion_free(self, metric, scaling, x, p):
        """Test the closed form is torsion free on oracle brackets."""
        pt = CotangentPoint.at(x, p)
        table = lc.connection_formula(metric, scaling, pt).gamma
        brackets = cf.bracket_oracle(metric, pt)

        assert_allclose(lc.torsion(table, brackets), 0.0, atol=1e-6)


class TestInvariantConnection:
    """Test invariant_connection."""

    def test_flat_coordinate_fields(self):
        """Test ∇̃ of horizontal coordinate lifts vanishes on the plane with f = 1."""
        pt = CotangentPoint.at([0.0, 0.0], [0.5, 0.5])
        out = lc.invariant_connection(FLAT, ONE, pt, LiftedField("H", [1.0, 0.0]), LiftedField("H", [0.0, 1.0]))
        assert_allclose(out.to_array(), 0.0, atol=1e-15)

    def test_vertical_horizontal_zero_section(self):
        """Test ∇̃_{^Vω} ^HY = 0 at p = 0."""
        pt = CotangentPoint.at([1.0, 0.5], [0.0, 0.0])
        out = lc.invariant_connection(SPHERE, POLY, pt, LiftedField("V", [1.0, 2.0]), LiftedField("H", [0.5, -1.0]))
        assert_allclose(out.to_array(), 0.0, atol=1e-15)

    def test_fibre_case_matches_table(self):
        """Test case (V, V) with ω = θ = dx¹ at p = (1, 0) on the plane."""
        pt = CotangentPoint.at([0.0, 0.0], [1.0, 0.0])
        out = lc.invariant_connection(FLAT, ONE, pt, LiftedField("V", [1.0, 0.0]), LiftedField("V", [1.0, 0.0]))
        table = lc.connection_formula(FLAT, ONE, pt).gamma

        assert_allclose(out.to_array(), table[:, 2, 2], atol=1e-14)

    def test_all_frame_pairs_match_table(self):
        """Test every lifted frame pair against the closed-form table."""
        pt = CotangentPoint.at([0.8, 0.4], [0.6, -0.4])
        table = lc.connection_formula(SPHERE, POLY, pt).gamma
        for a in range(4):
            for b in range(4):
                X = LiftedField("H" if a < 2 else "V", np.eye(2)[a % 2])
                Y = LiftedField("H" if b < 2 else "V", np.eye(2)[b % 2])
                out = lc.invariant_connection(SPHERE, POLY, pt, X, Y)
                assert_allclose(out.to_array(), table[:, a, b], atol=1e-12)

    def test_bad_kind(self):
        """Test lift kinds other than H and V are rejected."""
        with pytest.raises(ValueError):
            LiftedField("C", [1.0, 0.0])


class TestDrawnConnection:
    """Test the closed-form connection against the Koszul oracle at drawn points."""

    @settings(max_examples=10, deadline=None)
    @given(floats(min_value=-1.0, max_value=1.0), floats(min_value=0.5, max_value=2.0),
           floats(min_value=-1.0, max_value=1.0), floats(min_value=-1.0, max_value=1.0))
    def test_hyperbolic_exp(self, u, y, p1, p2):
        """Test the half-plane with f = exp(x¹/2) over u ∈ [-1, 1], y ∈ [0.5, 2]."""
        pt = CotangentPoint.at([u, y], [p1, p2])
        formula = lc.connection_formula(HYPERBOLIC, EXP, pt).gamma

        assert_allclose(formula, lc.koszul_oracle(HYPERBOLIC, EXP, pt).gamma, atol=1e-6)
        assert lc.metric_compatibility_defect(formula, HYPERBOLIC, EXP, pt) < 1e-6

    @settings(max_examples=10, deadline=None)
    @given(floats(min_value=-1.0, max_value=1.0), floats(min_value=-1.0, max_value=1.0),
           floats(min_value=-1.0, max_value=1.0), floats(min_value=-1.0, max_value=1.0))
    def test_polynomial_poly(self, x1, x2, p1, p2):
        """Test the quadratic graph with f = 1 + (x¹)² over [-1, 1]²."""
        pt = CotangentPoint.at([x1, x2], [p1, p2])
        formula = lc.connection_formula(POLYNOMIAL, POLY, pt).gamma

        assert_allclose(formula, lc.koszul_oracle(POLYNOMIAL, POLY, pt).gamma, atol=1e-6)
        assert_allclose(lc.torsion(formula, cf.bracket_oracle(POLYNOMIAL, pt)), 0.0, atol=1e-6)
