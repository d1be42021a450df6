"""
Tests for block principal pivoting NNLS.

Tests:
- Hand-solved 2x2 instances
- Agreement with exhaustive active-set enumeration
- KKT conditions and comparison with clipped least squares
- Singular passive systems and the exchange limit

Run tests:
    pytest tests/nls/test_bpp.py -v
"""

import itertools

import numpy as np
import pytest

from parnncp.modules.nls.bpp import nnls_bpp, solve_bpp
from parnncp.modules.nls.errors import NlsConvergenceError
from parnncp.modules.nls.unconstrained import ls_unconstrained


# Test fixtures

def objective(H, M, S):
    """Row-wise 1/2 h S h - m h, one value per row."""
    return 0.5 * np.einsum("ir,rs,is->i", H, S, H) - np.einsum("ir,ir->i", M, H)


def enumerate_nnls(S, m):
    """Exact NNLS of one row by trying every passive set."""
    rank = S.shape[0]
    best, best_value = None, None
    for mask in itertools.product([False, True], repeat=rank):
        passive = np.array(mask)
        h = np.zeros(rank)
        if passive.any():
            h[passive] = np.linalg.solve(S[np.ix_(passive, passive)], m[passive])
        g = S @ h - m
        if (h < -1e-12).any() or (g[~passive] < -1e-12).any():
            continue
        value = 0.5 * h @ S @ h - m @ h
        if best_value is None or value < best_value:
            best, best_value = h, value
    return np.maximum(best, 0.0)


def random_problem(rng, rank, rows):
    X = rng.standard_normal((rank + 3, rank))
    S = X.T @ X + 0.1 * np.eye(rank)
    M = rng.uniform(-1.0, 1.0, (rows, rank))
    return S, M


class TestHandSolved:
    """Test small instances solved by hand."""

    def test_identity_is_projection(self):
        """Test S = I, m = [3, -1] -> [3, 0]."""
        H = nnls_bpp(np.eye(2), np.array([[3.0, -1.0]]), guard_zero_columns=False)
        np.testing.assert_allclose(H, [[3.0, 0.0]], atol=1e-15)

    def test_interior_solution(self):
        """Test S = [[4,2],[2,3]], m = [10, 9] -> [1.5, 2]."""
        H = nnls_bpp(np.array([[4.0, 2.0], [2.0, 3.0]]), np.array([[10.0, 9.0]]))
        np.testing.assert_allclose(H, [[1.5, 2.0]], rtol=1e-14)

    def test_boundary_solution(self):
        """Test m = [2, 5] -> [0, 5/3] with gradient 4/3 on the active variable."""
        S = np.array([[4.0, 2.0], [2.0, 3.0]])
        m = np.array([[2.0, 5.0]])
        H = nnls_bpp(S, m, guard_zero_columns=False)
        np.testing.assert_allclose(H, [[0.0, 5.0 / 3.0]], rtol=1e-14, atol=1e-15)
        g = H @ S - m
        assert g[0, 0] == pytest.approx(4.0 / 3.0)

    def test_zero_column_guard(self):
        """Test that an all-zero column becomes the guard value by default."""
        H = nnls_bpp(np.eye(2), np.array([[3.0, -1.0], [2.0, -5.0]]))
        np.testing.assert_array_equal(H[:, 1], [1e-16, 1e-16])
        np.testing.assert_array_equal(H[:, 0], [3.0, 2.0])

    def test_many_rows_solved_independently(self):
        """Test rows with different passive sets in one call."""
        S = np.array([[4.0, 2.0], [2.0, 3.0]])
        M = np.array([[10.0, 9.0], [2.0, 5.0], [-1.0, -1.0]])
        H = nnls_bpp(S, M, guard_zero_columns=False)
        np.testing.assert_allclose(H, [[1.5, 2.0], [0.0, 5.0 / 3.0], [0.0, 0.0]], rtol=1e-14, atol=1e-15)


class TestExactness:
    """Test BPP against oracles."""

    @pytest.mark.parametrize("rank", [1, 2, 3, 4])
    def test_matches_exhaustive_enumeration(self, rng, rank):
        """Test per-entry agreement 1e-10 on random PSD instances, k <= 8."""
        for _ in range(25):
            rows = int(rng.integers(1, 9))
            S, M = random_problem(rng, rank, rows)
            H = nnls_bpp(S, M, guard_zero_columns=False)
            expected = np.array([enumerate_nnls(S, m) for m in M])
            np.testing.assert_allclose(H, expected, atol=1e-10, rtol=0)

    def test_kkt_conditions(self, rng):
        """Test h >= 0, g >= 0 on the active set, complementarity."""
        for _ in range(50):
            S, M = random_problem(rng, 4, 8)
            H = nnls_bpp(S, M, guard_zero_columns=False)
            g = H @ S - M
            assert (H >= 0).all()
            assert (g >= -1e-8).all()
            assert (np.abs(H * g) <= 1e-8).all()

    def test_beats_clipped_least_squares(self, rng):
        """Test objective <= that of [M S^-1]_+ on every row."""
        for _ in range(50):
            S, M = random_problem(rng, 3, 6)
            H = nnls_bpp(S, M, guard_zero_columns=False)
            clipped = np.maximum(ls_unconstrained(S, M), 0.0)
            assert (objective(H, M, S) <= objective(clipped, M, S) + 1e-12).all()


class TestDegenerateCases:
    """Test singular systems and the exchange limit."""

    def test_singular_passive_system_flagged(self):
        """Test the minimum-norm fallback on S = ones(2, 2)."""
        solution = solve_bpp(np.ones((2, 2)), np.array([[1.0, 1.0]]))
        np.testing.assert_allclose(solution.H, [[0.5, 0.5]], rtol=1e-12)
        assert solution.flagged_rows == [0]

    def test_exchange_limit_raises_with_diagnostics(self, mocker):
        """Test NlsConvergenceError names the rows still infeasible."""
        mock_settings = mocker.patch("parnncp.modules.nls.bpp.settings")
        mock_settings.KKT_ZERO_TOL = 1e-12
        mock_settings.ZERO_COLUMN_GUARD = 1e-16
        mock_settings.bpp_iteration_limit.return_value = 0

        with pytest.raises(NlsConvergenceError) as exc_info:
            solve_bpp(np.eye(2), np.array([[-1.0, -1.0], [1.0, 2.0]]))
        assert exc_info.value.rows == [1]
        assert exc_info.value.infeasible == [2]
        assert exc_info.value.iterations == 0

    def test_already_optimal_zero_needs_no_exchange(self):
        """Test m <= 0 is solved by the empty passive set."""
        solution = solve_bpp(np.eye(3), -np.ones((2, 3)), guard_zero_columns=False)
        assert solution.iterations == 0
        np.testing.assert_array_equal(solution.H, np.zeros((2, 3)))
