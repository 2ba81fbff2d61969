"""
Tests for wild character variety points and their unfolding
"""

from fractions import Fraction

import numpy as np
import pytest

from wcv.assembly import (
    IrregularCurveData, MarkedPoint, RepPoint, burnside_irreducible, class_bookkeeping, commutator,
    complete_relation, conjugate_point, det_condition_check, generated_algebra_dim, local_monodromies,
    moment_relation_residual, on_fiber, relation_scale, stability_check, tame_curve, unfold_wcv,
)
from wcv.core import EXACT, FLOAT, InvalidPointError, Matrix, Partition, Pattern
from wcv.irregular import IrregularType, LeviChain
from wcv.sampling import random_curve_point, random_group_elem
from wcv.unfolding import UnfoldingParams


def M(rows):
    return Matrix.from_rows(rows, EXACT)


I2 = Matrix.identity(2, EXACT)
TORUS = Partition.discrete(2)
WORKED = (I2, Matrix.diag([3, 5], EXACT), M([[1, 1], [0, 1]]), M([[1, 0], [1, 1]]))


def worked_curve(class_rep=None):
    params = UnfoldingParams((Matrix.diag([2, 1], EXACT),), LeviChain.from_partitions([TORUS]))
    pole = MarkedPoint(2, params=params, class_rep=class_rep)
    return IrregularCurveData(0, (pole, MarkedPoint(2)), 2)


def worked_point(curve):
    return complete_relation(RepPoint((), (WORKED,)), curve)


class TestCurveData:
    """Test curve and marked point construction."""

    def test_tame_point(self):
        mp = MarkedPoint(2)
        assert mp.is_tame
        assert mp.r == 0

    def test_chain_from_irregular_type(self):
        """An irregular type should induce its Levi chain."""
        q = IrregularType.from_diagonals(2, [[1, -1]], EXACT)
        mp = MarkedPoint(2, irregular=q)
        assert mp.r == 1
        assert mp.chain.partitions == (TORUS,)

    def test_inconsistent_chain_raises(self):
        q = IrregularType.from_diagonals(2, [[1, -1]], EXACT)
        with pytest.raises(ValueError, match="inconsistent"):
            MarkedPoint(2, irregular=q, chain=LeviChain.from_partitions([Partition.trivial(2)]))

    def test_mixed_sizes_raise(self):
        with pytest.raises(ValueError, match="different sizes"):
            IrregularCurveData(0, (MarkedPoint(2), MarkedPoint(3)))

    def test_negative_genus_raises(self):
        with pytest.raises(ValueError, match="Genus"):
            IrregularCurveData(-1, (MarkedPoint(2),))

    def test_tame_curve_counts(self):
        """A pole of order r should become r + 1 tame points."""
        tame = tame_curve(worked_curve())
        assert len(tame.marked) == 3
        assert all(mp.is_tame for mp in tame.marked)


class TestRelation:
    """Test the moment relation and its completion."""

    def test_single_identity_point(self):
        """g = 0 with one tame point (I, I) should give the identity."""
        curve = IrregularCurveData(0, (MarkedPoint(2),))
        pt = RepPoint((), ((I2, I2),))
        assert moment_relation_residual(pt, curve) == I2
        assert on_fiber(pt, curve)

    def test_commutator_of_equal(self):
        a = M([[2, 1], [1, 1]])
        assert commutator(a, a) == I2

    def test_complete_empty(self):
        """Empty partial data with g = 0 should give a last h = I."""
        curve = IrregularCurveData(0, (MarkedPoint(2),))
        pt = complete_relation(RepPoint((), ()), curve)
        assert pt.locals == ((I2, I2),)

    def test_complete_handles(self):
        """g = 1: the last h should be [A, B]^-1."""
        a, b = M([[1, 1], [0, 1]]), M([[1, 0], [1, 1]])
        curve = IrregularCurveData(1, (MarkedPoint(2),))
        pt = complete_relation(RepPoint(((a, b),), ()), curve)
        assert pt.locals[0][1] == commutator(a, b).inv()
        assert on_fiber(pt, curve)

    def test_complete_needs_reserved_tame_point(self):
        curve = IrregularCurveData(0, worked_curve().marked[:1])
        with pytest.raises(ValueError, match="reserved tame"):
            complete_relation(RepPoint((), ()), curve)

    def test_wrong_slot_count(self):
        curve = IrregularCurveData(0, (MarkedPoint(2),))
        with pytest.raises(InvalidPointError):
            moment_relation_residual(RepPoint((), ((I2,),)), curve)

    def test_random_point_on_fiber(self):
        """Random completed GL_3, genus 1 points should satisfy the relation exactly."""
        rng = np.random.default_rng(7)
        curve, pt = random_curve_point(rng, 3, 1, 2, EXACT)
        assert moment_relation_residual(pt, curve) == Matrix.identity(3, EXACT)


class TestDetCondition:
    """Test the determinant condition on the fiber."""

    def test_identity_slots(self):
        curve = IrregularCurveData(0, (MarkedPoint(2),))
        assert det_condition_check(RepPoint((), ((I2, I2),)), curve)

    def test_two_tame_points(self):
        """h_1 = diag(2,1) with h_2 from complete_relation should have det product 1."""
        curve = IrregularCurveData(0, (MarkedPoint(2), MarkedPoint(2)))
        pt = complete_relation(RepPoint((), ((I2, Matrix.diag([2, 1], EXACT)),)), curve)
        assert pt.locals[1][1] == Matrix.diag([Fraction(1, 2), 1], EXACT)
        assert det_condition_check(pt, curve)

    def test_off_fiber_raises(self):
        """An off-relation point should be flagged as off-fiber."""
        curve = IrregularCurveData(0, (MarkedPoint(2),))
        with pytest.raises(InvalidPointError, match="off-fiber"):
            det_condition_check(RepPoint((), ((I2, Matrix.diag([2, 1], EXACT)),)), curve)


class TestStability:
    """Test Burnside saturation."""

    def test_single_diagonal(self):
        """{diag(1,2)} has the common eigenvector e_1."""
        assert not burnside_irreducible([Matrix.diag([1, 2], EXACT)], 2, EXACT)

    def test_swap_and_sign(self):
        """{[[0,1],[1,0]], diag(1,-1)} should generate all of M_2."""
        mats = [M([[0, 1], [1, 0]]), Matrix.diag([1, -1], EXACT)]
        assert generated_algebra_dim(mats, 2, EXACT) == 4
        assert burnside_irreducible(mats, 2, EXACT)

    def test_upper_triangular_set(self):
        mats = [M([[1, 2, 3], [0, 4, 5], [0, 0, 6]]), M([[0, 1, 0], [0, 0, 1], [0, 0, 0]])]
        assert not burnside_irreducible(mats, 3, EXACT)

    def test_identity_point_unstable(self):
        """Identity slots generate only the scalars plus the torus."""
        curve = IrregularCurveData(0, (MarkedPoint(2),))
        assert not stability_check(RepPoint((), ((I2, I2),)), curve)

    def test_handles_make_stable(self):
        curve = IrregularCurveData(1, (MarkedPoint(2),))
        a, b = M([[0, 1], [1, 0]]), Matrix.diag([1, -1], EXACT)
        pt = complete_relation(RepPoint(((a, b),), ()), curve)
        assert stability_check(pt, curve)


class TestUnfoldWcv:
    """Test point-level unfolding to a tame curve."""

    def test_worked_point(self):
        """The worked pole should unfold to monodromies [[3/2,0],[5,5]] and [[4,2],[-3,-1]]."""
        curve = worked_curve()
        pt = worked_point(curve)
        unfolded, tame = unfold_wcv(pt, curve)
        monos = local_monodromies(unfolded, tame)
        assert len(tame.marked) == 3
        assert monos[0] == M([[Fraction(3, 2), 0], [5, 5]])
        assert monos[1] == M([[4, 2], [-3, -1]])
        assert monos[0] @ monos[1] == M([[6, 3], [5, 5]])
        assert on_fiber(unfolded, tame)
        assert det_condition_check(pt, curve)
        assert det_condition_check(unfolded, tame)

    def test_class_bookkeeping(self):
        """Unfolded monodromies should lie in the announced classes."""
        curve = worked_curve(class_rep=Matrix.diag([3, 5], EXACT))
        assert class_bookkeeping(worked_point(curve), curve) == [True, True]

    def test_tame_curve_unchanged(self):
        """A curve without poles should unfold to itself."""
        curve = IrregularCurveData(0, (MarkedPoint(2), MarkedPoint(2)))
        pt = complete_relation(RepPoint((), ((I2, Matrix.diag([2, 3], EXACT)),)), curve)
        unfolded, tame = unfold_wcv(pt, curve)
        assert unfolded == pt
        assert len(tame.marked) == 2

    def test_random_gl3(self):
        """Random GL_3 genus-1 points should stay on the fiber with the det condition."""
        rng = np.random.default_rng(11)
        curve, pt = random_curve_point(rng, 3, 1, 2, EXACT)
        unfolded, tame = unfold_wcv(pt, curve)
        assert moment_relation_residual(unfolded, tame) == Matrix.identity(3, EXACT)
        assert det_condition_check(unfolded, tame) == det_condition_check(pt, curve)
        assert all(class_bookkeeping(pt, curve))

    def test_missing_params_raises(self):
        q = IrregularType.from_diagonals(2, [[1, -1]], EXACT)
        curve = IrregularCurveData(0, (MarkedPoint(2, irregular=q), MarkedPoint(2)))
        pt = complete_relation(RepPoint((), (WORKED,)), curve)
        with pytest.raises(ValueError, match="no unfolding parameters"):
            unfold_wcv(pt, curve)

    def test_off_fiber_raises(self):
        curve = worked_curve()
        pt = RepPoint((), (WORKED, (I2, I2)))
        with pytest.raises(InvalidPointError, match="off-fiber"):
            unfold_wcv(pt, curve)


class TestConjugation:
    def test_relation_invariant(self):
        """Simultaneous conjugation should keep points on the fiber."""
        rng = np.random.default_rng(12)
        curve, pt = random_curve_point(rng, 2, 1, 1, EXACT)
        g = random_group_elem(rng, Pattern.general(2), EXACT)
        assert on_fiber(conjugate_point(pt, g), curve)


class TestFloatPoints:
    """Test the fiber predicates on float points."""

    def test_random_points_complete(self):
        """Completion should succeed and land on the fiber for every seed."""
        for seed in range(40):
            curve, pt = random_curve_point(np.random.default_rng(seed), 3, 1, 2, FLOAT)
            assert on_fiber(pt, curve), seed

    def test_unfolded_points_on_fiber(self):
        """Unfolded float points should stay on the fiber and keep the det condition."""
        for seed in range(10):
            curve, pt = random_curve_point(np.random.default_rng(seed), 3, 1, 2, FLOAT)
            unfolded, tame = unfold_wcv(pt, curve)
            assert on_fiber(unfolded, tame), seed
            assert det_condition_check(unfolded, tame) == det_condition_check(pt, curve)

    def test_off_fiber_detected(self):
        """The scaled tolerance should still reject a point off the relation."""
        curve = IrregularCurveData(0, (MarkedPoint(2),))
        ident = Matrix.identity(2, FLOAT)
        pt = RepPoint((), ((ident, Matrix.diag([2, 1], FLOAT)),))
        assert not on_fiber(pt, curve)
        with pytest.raises(InvalidPointError, match="off-fiber"):
            det_condition_check(pt, curve)

    def test_relation_scale(self):
        """Letters I, diag(2,1) and I^-1 give a scale of 2."""
        ident = Matrix.identity(2, FLOAT)
        pt = RepPoint((), ((ident, Matrix.diag([2, 1], FLOAT)),))
        assert relation_scale(pt) == pytest.approx(2.0)
