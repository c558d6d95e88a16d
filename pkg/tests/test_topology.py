import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ringform.errors import InvalidOrder, NotSymmetric
from ringform.geometry import ring_edges
from ringform.topology import (
    bearing_diagonal,
    bearing_diagonal_entries,
    ring_incidence,
    ring_lambda2,
    symmetric_eigenvalues,
    zero_eigenvalue_count,
)

SQ3 = np.sqrt(3.0)


class TestRingIncidence:
    def test_n3_structure(self):
        E = ring_incidence(3)
        assert E.shape == (3, 3)
        expect = np.array([[1, -1, 0], [0, 1, -1], [-1, 0, 1]], dtype=float)
        assert np.array_equal(E, expect)

    def test_row_sums_zero(self):
        for n in (3, 4, 7, 12):
            assert np.array_equal(ring_incidence(n).sum(axis=1), np.zeros(n))

    def test_edge_consistency(self):
        # E @ z = z_i - z_{i+1}, the negated ring edge vectors
        rng = np.random.default_rng(0)
        z = rng.standard_normal((6, 2))
        e, _, _ = ring_edges(z)
        assert np.allclose(ring_incidence(6) @ z, -e, atol=1e-14)

    def test_invalid_order(self):
        with pytest.raises(InvalidOrder):
            ring_incidence(2)


class TestBearingDiagonal:
    def bearings(self, z):
        return ring_edges(np.asarray(z, dtype=float))[2]

    def test_equilateral_clockwise(self):
        # clockwise listing turns the interior angles to 60 deg, sin = +sqrt(3)/2
        z = np.array([[0.0, 0.0], [0.5, SQ3 / 2], [1.0, 0.0]])
        D = bearing_diagonal(self.bearings(z))
        assert np.allclose(np.diag(D), SQ3 / 2, atol=1e-12)
        assert np.allclose(D, np.diag(np.diag(D)))

    def test_equilateral_counterclockwise_negates(self):
        z = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, SQ3 / 2]])
        D = bearing_diagonal(self.bearings(z))
        assert np.allclose(np.diag(D), -SQ3 / 2, atol=1e-12)

    def test_entries_equal_sin_theta(self):
        rng = np.random.default_rng(1)
        z = rng.standard_normal((5, 2)) * 3.0
        from ringform.geometry import ring_angles

        g = self.bearings(z)
        th = ring_angles(g)
        d = bearing_diagonal_entries(g)
        assert np.allclose(d, np.sin(th), atol=1e-10)
        assert np.allclose(np.diag(bearing_diagonal(g)), np.sin(th), atol=1e-10)

    def test_square(self):
        z = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]])
        assert np.allclose(bearing_diagonal_entries(self.bearings(z)), 1.0, atol=1e-14)


class TestSymmetricEigenvalues:
    def test_diag(self):
        vals = symmetric_eigenvalues(np.diag([3.0, -1.0, 2.0]))
        assert np.allclose(vals, [-1.0, 2.0, 3.0])

    def test_2x2(self):
        A = np.array([[2.0, 1.0], [1.0, 2.0]])
        assert np.allclose(symmetric_eigenvalues(A), [1.0, 3.0])

    def test_not_symmetric(self):
        with pytest.raises(NotSymmetric):
            symmetric_eigenvalues(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_zero_matrix(self):
        assert np.allclose(symmetric_eigenvalues(np.zeros((4, 4))), 0.0)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 12), st.integers(0, 2**31 - 1))
    def test_against_lapack(self, n, seed):
        rng = np.random.default_rng(seed)
        B = rng.standard_normal((n, n))
        A = B + B.T
        ours = symmetric_eigenvalues(A)
        ref = np.linalg.eigvalsh(A)
        scale = max(1.0, float(np.max(np.abs(ref))))
        assert np.max(np.abs(ours - ref)) < 1e-10 * scale

    def test_ete_n3(self):
        E = ring_incidence(3)
        vals = symmetric_eigenvalues(E.T @ E)
        assert np.allclose(vals, [0.0, 3.0, 3.0], atol=1e-10)

    def test_ete_n4(self):
        E = ring_incidence(4)
        vals = symmetric_eigenvalues(E.T @ E)
        assert np.allclose(vals, [0.0, 2.0, 2.0, 4.0], atol=1e-10)


class TestRingLambda2:
    @pytest.mark.parametrize("n", list(range(3, 51)))
    def test_closed_form(self, n):
        expect = 2.0 - 2.0 * np.cos(2.0 * np.pi / n)
        assert abs(ring_lambda2(n) - expect) < 1e-10

    @pytest.mark.parametrize("n", [3, 4, 5, 8, 20, 50])
    def test_trace_and_kernel(self, n):
        E = ring_incidence(n)
        M = E.T @ E
        vals = symmetric_eigenvalues(M)
        assert abs(vals.sum() - 2.0 * n) < 1e-9 * n
        assert zero_eigenvalue_count(M) == 1
        # second-smallest eigenvalue matches the closed form
        assert abs(vals[1] - ring_lambda2(n)) < 1e-10

    def test_rank_n_minus_1(self):
        # rank(E) = 3 for n = 4: three nonzero eigenvalues of E^T E
        M = ring_incidence(4).T @ ring_incidence(4)
        assert len(symmetric_eigenvalues(M)) - zero_eigenvalue_count(M) == 3
