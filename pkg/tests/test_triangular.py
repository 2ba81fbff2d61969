"""
Tests for the triangular decomposition of conjugacy classes
"""

import numpy as np
import pytest

from wcv.core import EXACT, InvalidPointError, Matrix, Partition, Pattern, PreconditionError
from wcv.sampling import random_class_rep, random_group_elem, random_lie
from wcv.triangular import TriangularChart, class_tangent, solve_conj_unip, tau, tau_form_residual
from wcv.unfolding import enriched_chart, enriched_tau


def M(rows):
    return Matrix.from_rows(rows, EXACT)


H0 = Matrix.diag([2, 1], EXACT)
TORUS = Partition.discrete(2)


class TestSolveConjUnip:
    """Test u^-1 h u = h u' solutions."""

    def test_two_by_two(self):
        """h = diag(2,1), u' = [[1,1],[0,1]] should give u = [[1,2],[0,1]]."""
        u = solve_conj_unip(H0, M([[1, 1], [0, 1]]), TORUS)
        assert u == M([[1, 2], [0, 1]])
        assert u.inv() @ H0 @ u == H0 @ M([[1, 1], [0, 1]])

    def test_identity(self):
        """u' = I should give u = I."""
        assert solve_conj_unip(H0, Matrix.identity(2, EXACT), TORUS) == Matrix.identity(2, EXACT)

    def test_round_trip_three_levels(self):
        """Should recover u from u' = h^-1 u^-1 h u over several superdiagonal levels."""
        rng = np.random.default_rng(13)
        part = Partition.from_sizes([1, 2, 1])
        h = random_class_rep(rng, part, EXACT)
        u = random_group_elem(rng, Pattern.upper(part), EXACT)
        u_prime = h.inv() @ u.inv() @ h @ u
        assert solve_conj_unip(h, u_prime, part) == u

    def test_degenerate_h_raises(self):
        """h = I commutes with U+, so the solve is not unique."""
        with pytest.raises(PreconditionError, match="Centralizer condition"):
            solve_conj_unip(Matrix.identity(2, EXACT), M([[1, 1], [0, 1]]), TORUS)

    def test_lower_u_prime_raises(self):
        with pytest.raises(InvalidPointError):
            solve_conj_unip(H0, M([[1, 0], [1, 1]]), TORUS)


class TestTau:
    """Test the chart (h, u, v) -> v^-1 h u v."""

    def test_identity_unipotents(self):
        chart = TriangularChart(TORUS, H0)
        ident = Matrix.identity(2, EXACT)
        assert tau(chart, H0, ident, ident) == H0

    def test_upper_factor(self):
        """u = [[1,1],[0,1]], v = I should give [[2,2],[0,1]]."""
        chart = TriangularChart(TORUS, H0)
        assert tau(chart, H0, M([[1, 1], [0, 1]]), Matrix.identity(2, EXACT)) == M([[2, 2], [0, 1]])

    def test_lower_factor(self):
        """u = I, v = [[1,0],[1,1]] should give [[2,0],[-1,1]]."""
        chart = TriangularChart(TORUS, H0)
        assert tau(chart, H0, Matrix.identity(2, EXACT), M([[1, 0], [1, 1]])) == M([[2, 0], [-1, 1]])

    def test_swapped_unipotents_raise(self):
        chart = TriangularChart(TORUS, H0)
        with pytest.raises(InvalidPointError):
            tau(chart, H0, M([[1, 0], [1, 1]]), M([[1, 1], [0, 1]]))

    def test_chart_needs_small_centralizer(self):
        """A representative commuting outside the Levi should be refused."""
        with pytest.raises(PreconditionError):
            TriangularChart(TORUS, Matrix.identity(2, EXACT))


class TestTauForm:
    """Test the pullback of the class two-form along tau."""

    def _tangent(self, rng, part):
        return (random_lie(rng, Pattern.levi(part), EXACT), random_lie(rng, Pattern.upper(part), EXACT),
                random_lie(rng, Pattern.lower(part), EXACT))

    def test_equal_tangents(self):
        """X = Y should give zero."""
        rng = np.random.default_rng(3)
        chart = TriangularChart(TORUS, H0)
        point = (Matrix.identity(2, EXACT), M([[1, 3], [0, 1]]), M([[1, 0], [-2, 1]]))
        x = self._tangent(rng, TORUS)
        assert tau_form_residual(chart, point, x, x).is_zero()

    def test_trivial_unipotents(self):
        """u = v = I should give an exact zero."""
        rng = np.random.default_rng(4)
        chart = TriangularChart(TORUS, H0)
        ident = Matrix.identity(2, EXACT)
        x, y = self._tangent(rng, TORUS), self._tangent(rng, TORUS)
        assert tau_form_residual(chart, (ident, ident, ident), x, y).is_zero()

    def test_random_exact(self):
        """Random GL_3 points should give an exact zero."""
        rng = np.random.default_rng(5)
        part = Partition.from_sizes([2, 1])
        chart = TriangularChart(part, random_class_rep(rng, part, EXACT))
        point = (random_group_elem(rng, Pattern.levi(part), EXACT),
                 random_group_elem(rng, Pattern.upper(part), EXACT),
                 random_group_elem(rng, Pattern.lower(part), EXACT))
        x, y = self._tangent(rng, part), self._tangent(rng, part)
        assert tau_form_residual(chart, point, x, y).is_zero()

    def test_tangent_outside_levi_raises(self):
        chart = TriangularChart(TORUS, H0)
        ident = Matrix.identity(2, EXACT)
        bad = (Matrix.unit(2, 0, 1, EXACT), Matrix.zeros(2, 2, EXACT), Matrix.zeros(2, 2, EXACT))
        with pytest.raises(InvalidPointError, match="block diagonal"):
            tau_form_residual(chart, (ident, ident, ident), bad, bad)


class TestClassTangent:
    """Test chart tangents of a conjugacy class."""

    def test_solves_commutator(self):
        y = Matrix.diag([1, 2], EXACT)
        dy = Matrix.unit(2, 0, 1, EXACT) * -1
        zeta = class_tangent(y, dy)
        assert y @ zeta - zeta @ y == dy

    def test_non_tangent_raises(self):
        """A diagonal change of a regular diagonal element is not tangent to its class."""
        with pytest.raises(ValueError, match="inconsistent"):
            class_tangent(Matrix.diag([1, 2], EXACT), Matrix.unit(2, 0, 0, EXACT))


class TestEnrichedChart:
    """Test the enriched chart [u, h v] of M-space."""

    def test_moment_matches(self):
        """G-moment of [u, h v] should be u^-1 h v u."""
        u, v = M([[1, 2], [0, 1]]), M([[1, 0], [3, 1]])
        c, p = enriched_chart(H0, u, v, TORUS)
        assert c.inv() @ p @ c == enriched_tau(H0, u, v)
        assert p == H0 @ v
