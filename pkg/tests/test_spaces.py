"""
Tests for quasi-Hamiltonian space models

Moment maps, two-forms, fusion and the moment condition on random points.
"""

from fractions import Fraction

import numpy as np
import pytest

from wcv.core import EXACT, FLOAT, ComplexScalar, InvalidPointError, Matrix, Partition, Pattern, ShapeError
from wcv.irregular import IrregularType
from wcv.sampling import random_group_elem, random_lie, random_point, random_tangent
from wcv.spaces import (
    ConjClass, Double, Fission, MSpace, MultiFission, StokesModel, dim_class, dim_multifission, fuse,
    fusion_correction, infinitesimal_action, model_dimension, moment, mspace_equivalent, qh2_residual,
    two_form, validate_point,
)


def M(rows):
    return Matrix.from_rows(rows, EXACT)


def I2():
    return Matrix.identity(2, EXACT)


def Z2():
    return Matrix.zeros(2, 2, EXACT)


def E(i, j):
    return Matrix.unit(2, i, j, EXACT)


class TestMoments:
    """Test moment values on hand-computed points."""

    def test_multifission(self):
        """(I, diag(3,5), u, v) should map to (h u v, h^-1)."""
        model = MultiFission([Partition.discrete(2)])
        point = (I2(), Matrix.diag([3, 5], EXACT), M([[1, 1], [0, 1]]), M([[1, 0], [1, 1]]))
        mu_g, mu_h = moment(model, point)
        assert mu_g == M([[6, 3], [5, 5]])
        assert mu_h == Matrix.diag([Fraction(1, 3), Fraction(1, 5)], EXACT)

    def test_double(self):
        """The double should give (C^-1 h C, h^-1)."""
        c = M([[1, 1], [0, 1]])
        h = Matrix.diag([2, 3], EXACT)
        mu_g, mu_h = moment(Double(2), (c, h))
        assert mu_g == c.inv() @ h @ c
        assert mu_h == h.inv()

    def test_conj_class(self):
        """The class chart should give C^-1 base C."""
        base = Matrix.diag([2, 1], EXACT)
        c = M([[1, 0], [1, 1]])
        (mu,) = moment(ConjClass(base), (c,))
        assert mu == c.inv() @ base @ c

    def test_mspace(self):
        """M-space H-moment should be the inverse of the Levi part of p."""
        p = M([[2, 0], [7, 3]])
        mu_g, mu_h = moment(MSpace(Partition.discrete(2)), (I2(), p))
        assert mu_g == p
        assert mu_h == Matrix.diag([Fraction(1, 2), Fraction(1, 3)], EXACT)


class TestTwoForm:
    """Test two-form values."""

    def test_double_unit_pairing(self):
        """omega((E11, 0), (0, E11)) at (I, I) should be 1."""
        value = two_form(Double(2), (I2(), I2()), (E(0, 0), Z2()), (Z2(), E(0, 0)))
        assert value == ComplexScalar.of(1, EXACT)

    def test_conj_class_value(self):
        """omega(E12, E21) on the class of diag(2,1) at C = I should be -3/4."""
        model = ConjClass(Matrix.diag([2, 1], EXACT))
        value = two_form(model, (I2(),), (E(0, 1),), (E(1, 0),))
        assert value == ComplexScalar.of(Fraction(-3, 4), EXACT)

    def test_alternating(self):
        """omega(X, X) should vanish."""
        rng = np.random.default_rng(2)
        model = Fission(Partition.discrete(2), 2)
        point = random_point(rng, model, EXACT)
        x = random_tangent(rng, model, EXACT)
        assert two_form(model, point, x, x).is_zero()

    def test_tangent_outside_slot_raises(self):
        """Should refuse a tangent outside the unipotent slot algebra."""
        model = Fission(Partition.discrete(2), 1)
        point = (I2(), I2(), I2(), I2())
        bad = (Z2(), Z2(), E(1, 0), Z2())
        with pytest.raises(InvalidPointError):
            two_form(model, point, bad, bad)


class TestQuasiHamiltonian:
    """Test the moment condition omega(xi_M, .) = 1/2 (mu^* theta + mu^* theta-bar, xi)."""

    @pytest.mark.parametrize("model", [
        Double(2),
        ConjClass(Matrix.diag([2, -1], EXACT)),
        Fission(Partition.from_sizes([1, 1]), 1),
        MultiFission([Partition.discrete(3), Partition.from_sizes([2, 1])]),
        MSpace(Partition.from_sizes([1, 1])),
    ])
    def test_exact_residual_vanishes(self, model):
        """Should vanish exactly for every acting factor."""
        rng = np.random.default_rng(17)
        point = random_point(rng, model, EXACT)
        y = random_tangent(rng, model, EXACT)
        for factor, pattern in enumerate(model.factors()):
            xi = random_lie(rng, pattern, EXACT)
            assert qh2_residual(model, point, xi, y, factor).is_zero()

    def test_stokes_model(self):
        """Should vanish for the Stokes-coordinate model of diag(1,-1)/z^2."""
        rng = np.random.default_rng(4)
        model = StokesModel(IrregularType.from_diagonals(2, [[0, 0], [1, -1]], EXACT))
        point = random_point(rng, model, EXACT)
        y = random_tangent(rng, model, EXACT)
        xi = random_tangent(rng, Double(2), EXACT)[0]
        assert qh2_residual(model, point, xi, y).is_zero()

    def test_zero_xi(self):
        """xi = 0 should give a zero residual on a class."""
        rng = np.random.default_rng(1)
        model = ConjClass(Matrix.diag([2, 1], EXACT))
        point = random_point(rng, model, EXACT)
        y = random_tangent(rng, model, EXACT)
        assert qh2_residual(model, point, Z2(), y).is_zero()

    def test_float_fission_worked_point(self):
        """Float residuals at the worked GL_2 fission point should stay below 1e-9."""
        rng = np.random.default_rng(21)
        model = Fission(Partition.discrete(2), 1)
        point = tuple(Matrix.from_rows(rows, FLOAT) for rows in (
            [[1.0, 0.0], [0.0, 1.0]], [[3.0, 0.0], [0.0, 5.0]],
            [[1.0, 1.0], [0.0, 1.0]], [[1.0, 0.0], [1.0, 1.0]],
        ))
        for _ in range(5):
            y = random_tangent(rng, model, FLOAT)
            xi = random_lie(rng, Pattern.general(2), FLOAT)
            assert abs(qh2_residual(model, point, xi, y).to_complex()) <= 1e-9

    def test_float_fusion_is_relative(self):
        """Float residuals on a fused triple are relative to the form terms, even for a huge xi."""
        rng = np.random.default_rng(13)
        for n in (2, 3):
            base = random_group_elem(rng, Pattern.general(n), FLOAT)
            model = fuse([ConjClass(base), Double(n), Fission(Partition.discrete(n), 1)])
            point = random_point(rng, model, FLOAT)
            y = random_tangent(rng, model, FLOAT)
            xi = random_lie(rng, Pattern.general(n), FLOAT)
            assert abs(qh2_residual(model, point, xi, y)) <= 1e-9
            assert abs(qh2_residual(model, point, xi * 1e6, y)) <= 1e-9

    def test_xi_outside_factor_raises(self):
        """Should reject xi outside the factor's Lie algebra."""
        model = MSpace(Partition.from_sizes([1, 1]))
        with pytest.raises(InvalidPointError, match="factor 1"):
            infinitesimal_action(model, (I2(), I2()), E(0, 1), factor=1)


class TestFusion:
    """Test fusion of G-spaces."""

    def test_single_child_is_unchanged(self):
        """fuse([A]) should carry A's moment and form."""
        rng = np.random.default_rng(8)
        child = Double(2)
        fused = fuse([child])
        point = random_point(rng, child, EXACT)
        x, y = random_tangent(rng, child, EXACT), random_tangent(rng, child, EXACT)
        assert moment(fused, point) == moment(child, point)
        assert two_form(fused, point, x, y) == two_form(child, point, x, y)
        assert fusion_correction(fused, point, x, y).is_zero()

    def test_moment_multiplies(self):
        """G-moment of the fusion should be the ordered product."""
        rng = np.random.default_rng(9)
        a, b = Double(2), ConjClass(Matrix.diag([1, 2], EXACT))
        fused = fuse([a, b])
        pa, pb = random_point(rng, a, EXACT), random_point(rng, b, EXACT)
        mu = moment(fused, pa + pb)
        assert mu[0] == moment(a, pa)[0] @ moment(b, pb)[0]
        assert mu[1] == moment(a, pa)[1]

    def test_associative(self):
        """Both nestings of three spaces should give the same two-form."""
        rng = np.random.default_rng(10)
        children = [ConjClass(Matrix.diag([1, 3], EXACT)), Double(2), ConjClass(Matrix.diag([2, 5], EXACT))]
        flat = fuse(children)
        left = fuse([fuse(children[:2]), children[2]])
        right = fuse([children[0], fuse(children[1:])])
        point = random_point(rng, flat, EXACT)
        x, y = random_tangent(rng, flat, EXACT), random_tangent(rng, flat, EXACT)
        expected = two_form(flat, point, x, y)
        assert two_form(left, point, x, y) == expected
        assert two_form(right, point, x, y) == expected

    def test_fused_space_is_quasi_hamiltonian(self):
        """Moment condition should hold on a fusion."""
        rng = np.random.default_rng(12)
        model = fuse([Double(2), Fission(Partition.discrete(2), 1)])
        point = random_point(rng, model, EXACT)
        y = random_tangent(rng, model, EXACT)
        xi = random_tangent(rng, Double(2), EXACT)[0]
        assert qh2_residual(model, point, xi, y).is_zero()

    def test_empty_raises(self):
        with pytest.raises(ValueError, match="at least one"):
            fuse([])

    def test_size_mismatch_raises(self):
        with pytest.raises(ShapeError):
            fuse([Double(2), Double(3)])


class TestValidation:
    """Test point validation messages."""

    def test_wrong_slot_count(self):
        """Should report the expected slot names."""
        with pytest.raises(InvalidPointError, match="expected 2 slots"):
            validate_point(Double(2), (I2(),))

    def test_singular_slot(self):
        """Should flag a non-invertible slot."""
        with pytest.raises(InvalidPointError) as exc:
            validate_point(Double(2), (I2(), M([[1, 2], [2, 4]])))
        assert any("not invertible" in v for v in exc.value.violations)

    def test_pattern_violation(self):
        """Should flag a lower entry in an upper unipotent slot."""
        model = Fission(Partition.discrete(2), 1)
        with pytest.raises(InvalidPointError) as exc:
            validate_point(model, (I2(), I2(), M([[1, 0], [1, 1]]), I2()))
        assert any(v.startswith("u1:") for v in exc.value.violations)

    def test_mspace_upper_entry(self):
        """p must lie in the lower parabolic."""
        with pytest.raises(InvalidPointError):
            validate_point(MSpace(Partition.discrete(2)), (I2(), M([[1, 1], [0, 1]])))

    def test_valid_double(self):
        validate_point(Double(2), (I2(), I2()))


class TestMSpace:
    """Test the U- quotient on M-space representatives."""

    def test_equivalent_under_lower_unipotent(self):
        """(wC, w p w^-1) with w in U- should be the same point."""
        rng = np.random.default_rng(6)
        part = Partition.from_sizes([1, 1])
        c, p = random_point(rng, MSpace(part), EXACT)
        w = random_group_elem(rng, Pattern.lower(part), EXACT)
        assert mspace_equivalent((c, p), (w @ c, w @ p @ w.inv()), part)

    def test_same_representative(self):
        p = M([[2, 0], [1, 3]])
        assert mspace_equivalent((I2(), p), (I2(), p), Partition.discrete(2))

    def test_not_equivalent_under_upper(self):
        part = Partition.from_sizes([1, 1])
        w = M([[1, 1], [0, 1]])
        p = M([[2, 0], [1, 3]])
        assert not mspace_equivalent((I2(), p), (w, w @ p @ w.inv()), part)


class TestDimensions:
    """Test dimension helpers."""

    def test_class_dimension(self):
        assert dim_class(Matrix.diag([1, 2], EXACT)) == 2
        assert dim_class(Matrix.identity(2, EXACT)) == 0

    def test_fission_dimension(self):
        """Slot dimensions should add up to n^2 + dim H + 2 dim U per level."""
        parts = [Partition.discrete(3), Partition.from_sizes([2, 1])]
        assert model_dimension(MultiFission(parts)) == dim_multifission(parts) == 9 + 3 + 6 + 4
