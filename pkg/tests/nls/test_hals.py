"""
Tests for the HALS column update and the unconstrained reference solver.

Run tests:
    pytest tests/nls/test_hals.py -v
"""

import numpy as np
import pytest

from parnncp.modules.nls.errors import SingularSystemError
from parnncp.modules.nls.hals import hals_update
from parnncp.modules.nls.unconstrained import ls_unconstrained


def objective(H, M, S):
    return 0.5 * np.sum((H @ S) * H) - np.sum(M * H)


class TestHalsUpdate:
    """Test one HALS cycle."""

    def test_rank_one_is_projection(self):
        """Test R=1, S=[1] -> [M]_+."""
        H = np.array([[2.0], [5.0]])
        hals_update(H, np.array([[-1.0], [3.0]]), np.array([[1.0]]))
        np.testing.assert_array_equal(H, [[0.0], [3.0]])

    def test_single_application(self):
        """Test H=[[1],[1]], M=[[0.5],[2]] -> [[0.5],[2]]."""
        H = np.array([[1.0], [1.0]])
        result = hals_update(H, np.array([[0.5], [2.0]]), np.array([[1.0]]))
        np.testing.assert_array_equal(result, [[0.5], [2.0]])
        assert result is H

    def test_zero_column_guard(self):
        """Test that a column ending all-zero becomes the guard value."""
        H = np.array([[1.0], [1.0]])
        hals_update(H, np.array([[-1.0], [-2.0]]), np.array([[1.0]]))
        np.testing.assert_array_equal(H, [[1e-16], [1e-16]])

    def test_guard_can_be_disabled(self):
        """Test guard_zero_columns=False leaves zeros."""
        H = np.array([[1.0], [1.0]])
        hals_update(H, np.array([[-1.0], [-2.0]]), np.array([[1.0]]), guard_zero_columns=False)
        np.testing.assert_array_equal(H, [[0.0], [0.0]])

    def test_uses_freshest_columns(self):
        """Test that column 2 sees column 1's new value within the cycle."""
        S = np.array([[1.0, 0.5], [0.5, 1.0]])
        H = np.array([[1.0, 1.0]])
        M = np.array([[2.0, 2.0]])
        hals_update(H, M, S)
        # column 1: 1 + 2 - (1 + 0.5) = 1.5; column 2: 1 + 2 - (1.5*0.5 + 1) = 1.25
        np.testing.assert_allclose(H, [[1.5, 1.25]])

    def test_never_increases_objective(self, rng):
        """Test monotonicity of one cycle with unit-diagonal S."""
        for _ in range(200):
            rank = int(rng.integers(1, 6))
            rows = int(rng.integers(1, 10))
            W = rng.random((rank + 4, rank))
            W /= np.linalg.norm(W, axis=0)
            S = W.T @ W
            M = rng.uniform(-1.0, 2.0, (rows, rank))
            H = rng.random((rows, rank))
            before = objective(H, M, S)
            hals_update(H, M, S, guard_zero_columns=False)
            after = objective(H, M, S)
            assert after <= before + 1e-12 * (1.0 + abs(before))
            assert (H >= 0).all()


class TestUnconstrained:
    """Test H = M S^-1."""

    def test_identity(self, rng):
        """Test S = I returns M."""
        M = rng.random((3, 2))
        np.testing.assert_allclose(ls_unconstrained(np.eye(2), M), M)

    def test_two_by_two(self):
        """Test S = [[4,2],[2,3]], m = [10, 9] -> [1.5, 2]."""
        H = ls_unconstrained(np.array([[4.0, 2.0], [2.0, 3.0]]), np.array([[10.0, 9.0]]))
        np.testing.assert_allclose(H, [[1.5, 2.0]], rtol=1e-14)

    def test_scaling(self, rng):
        """Test S = 2I halves M."""
        M = rng.random((4, 3))
        np.testing.assert_allclose(ls_unconstrained(2 * np.eye(3), M), M / 2, rtol=1e-15)

    def test_singular_rejected(self):
        """Test that a singular S raises."""
        with pytest.raises(SingularSystemError):
            ls_unconstrained(np.ones((2, 2)), np.ones((1, 2)))
