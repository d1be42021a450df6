"""
Tests for dimension-tree MTTKRP.

Tests:
- Tree shapes (root balance, left-leaning chains)
- Partial MTTKRP and multi-TTV kernels against brute force
- Lazy sweeps against the naive oracle with matching factor snapshots
- Flop and allocation accounting

Run tests:
    pytest tests/mttkrp/test_dimtree.py -v
"""

import numpy as np
import pytest

from parnncp.modules.mttkrp.dimtree import (
    DimTreeMttkrp,
    TreeShapeError,
    as_temporary_tensor,
    build_tree,
    multi_ttv,
    partial_mttkrp,
    root_split,
    tree_mttkrp_sweep,
)
from parnncp.modules.mttkrp.flops import (
    KRP,
    MULTI_TTV,
    PARTIAL_MTTKRP,
    FlopLedger,
    naive_sweep_flops,
    sweep_flop_model,
)
from parnncp.modules.mttkrp.naive import mttkrp_naive
from parnncp.modules.tensor.dense import DenseTensor, TensorShapeError
from parnncp.modules.tensor.kernels import khatri_rao


# Test fixtures

def random_tensor(rng, dims):
    return DenseTensor(dims, rng.random(int(np.prod(dims))))


def relative_error(actual, expected):
    return np.linalg.norm(actual - expected) / np.linalg.norm(expected)


def payload_of(T):
    """R x prod(dims) payload of a dims + (R,) tensor."""
    rank = T.shape[-1]
    return np.stack([T[..., r].reshape(-1, order="F") for r in range(rank)])


class TestBuildTree:
    """Test tree shapes."""

    def test_cubical_five_way(self):
        """Test {1,2}|{3,4,5}, then {3}|{4,5}, then {4}|{5}."""
        tree = build_tree((64, 64, 64, 64, 64), 4)
        assert tree.describe() == (
            (1, 2, 3, 4, 5),
            [((1, 2), [(1,), (2,)]), ((3, 4, 5), [(3,), ((4, 5), [(4,), (5,)])])],
        )

    def test_unbalanced_three_way(self):
        """Test (1024, 1344, 33) splits after mode 1."""
        assert root_split((1024, 1344, 33)) == 1
        tree = build_tree((1024, 1344, 33), 2)
        assert tree.describe() == ((1, 2, 3), [(1,), ((2, 3), [(2,), (3,)])])

    def test_two_way(self):
        """Test N=2 has two leaves and no deeper temporaries."""
        tree = build_tree((5, 7), 3)
        assert tree.describe() == ((1, 2), [(1,), (2,)])
        assert len(tree.nodes) == 3

    def test_ties_go_to_smaller_split(self):
        """Test cubical N=3: |32 - 1024| == |1024 - 32| -> s=1."""
        assert root_split((32, 32, 32)) == 1

    def test_every_mode_has_a_leaf(self):
        """Test leaves are the singletons 1..N."""
        tree = build_tree((3, 4, 5, 6), 2)
        assert sorted(tree.leaves) == [1, 2, 3, 4]
        assert all(tree.leaves[n].modes == (n,) for n in tree.leaves)

    def test_one_mode_rejected(self):
        """Test N < 2 raises."""
        with pytest.raises(TreeShapeError):
            build_tree((5,), 2)


class TestPartialMttkrp:
    """Test the single-GEMM contraction."""

    def test_three_way_keep_prefix(self, rng):
        """Test T_ijr = sum_k X_ijk W_kr."""
        array = rng.random((3, 4, 5))
        W = rng.random((5, 2))
        payload = partial_mttkrp(DenseTensor.from_array(array), W, (1, 2))
        T = as_temporary_tensor(payload, (3, 4))
        np.testing.assert_allclose(T, np.einsum("ijk,kr->ijr", array, W), rtol=1e-13)

    def test_all_ones(self, ones_222):
        """Test ones 2x2x2 with ones W -> 2x2x1 of 2's."""
        payload = partial_mttkrp(ones_222, np.ones((2, 1)), (1, 2))
        np.testing.assert_array_equal(as_temporary_tensor(payload, (2, 2)), np.full((2, 2, 1), 2.0))

    def test_singleton_suffix_equals_naive(self, rng):
        """Test keep {3} with KRP(H1, H2) equals M(3)."""
        tensor = random_tensor(rng, (3, 4, 5))
        H1, H2 = rng.random((3, 3)), rng.random((4, 3))
        payload = partial_mttkrp(tensor, khatri_rao([H1, H2]), (3,))
        expected = mttkrp_naive(tensor, [H1, H2, None], 3)
        assert relative_error(payload.T, expected) <= 1e-13

    def test_singleton_prefix_equals_naive(self, rng):
        """Test keep {1} with KRP(H2, H3) equals M(1)."""
        tensor = random_tensor(rng, (3, 4, 5))
        H2, H3 = rng.random((4, 2)), rng.random((5, 2))
        payload = partial_mttkrp(tensor, khatri_rao([H2, H3]), (1,))
        expected = mttkrp_naive(tensor, [None, H2, H3], 1)
        assert relative_error(payload.T, expected) <= 1e-13

    def test_charges_two_i_r(self, rng):
        """Test 2 * I * R flops per call."""
        ledger = FlopLedger()
        partial_mttkrp(random_tensor(rng, (3, 4, 5)), rng.random((5, 2)), (1, 2), ledger=ledger)
        assert ledger.flops[PARTIAL_MTTKRP] == 2 * 60 * 2

    def test_non_contiguous_split_rejected(self, rng):
        """Test that {2} of a 3-way tensor is not a root split."""
        with pytest.raises(TreeShapeError):
            partial_mttkrp(random_tensor(rng, (3, 4, 5)), rng.random((15, 2)), (2,))

    def test_wrong_krp_rows(self, rng):
        """Test that the KRP must cover the other side."""
        with pytest.raises(TensorShapeError):
            partial_mttkrp(random_tensor(rng, (3, 4, 5)), rng.random((4, 2)), (1, 2))


class TestMultiTtv:
    """Test the per-rank-slice contraction."""

    def test_three_way_example(self, rng):
        """Test M_ir = sum_j V_jr T_ijr."""
        T = rng.random((3, 4, 2))
        V = rng.random((4, 2))
        out = multi_ttv(payload_of(T), (3, 4), V, "prefix", 1)
        np.testing.assert_allclose(out.T, np.einsum("ijr,jr->ir", T, V), rtol=1e-13)

    def test_all_ones(self):
        """Test ones 2x3x1 with ones V -> [3, 3]."""
        out = multi_ttv(np.ones((1, 6)), (2, 3), np.ones((3, 1)), "prefix", 1)
        np.testing.assert_array_equal(out, [[3.0, 3.0]])

    def test_two_eliminated_modes_prefix(self, rng):
        """Test a 2x2x2x2 temporary (rank last) against a loop nest."""
        T = rng.random((2, 2, 2, 2))
        V2, V3 = rng.random((2, 2)), rng.random((2, 2))
        out = multi_ttv(payload_of(T), (2, 2, 2), khatri_rao([V2, V3]), "prefix", 1)
        expected = np.zeros((2, 2))
        for r in range(2):
            for i in range(2):
                for j in range(2):
                    for k in range(2):
                        expected[r, i] += T[i, j, k, r] * V2[j, r] * V3[k, r]
        np.testing.assert_allclose(out, expected, rtol=1e-13)

    def test_two_eliminated_modes_suffix(self, rng):
        """Test keeping the last mode of the temporary."""
        T = rng.random((2, 3, 2, 2))
        V1, V2 = rng.random((2, 2)), rng.random((3, 2))
        out = multi_ttv(payload_of(T), (2, 3, 2), khatri_rao([V1, V2]), "suffix", 1)
        expected = np.einsum("ijkr,ir,jr->rk", T, V1, V2)
        np.testing.assert_allclose(out, expected, rtol=1e-13)

    def test_charges_parent_size(self, rng):
        """Test 2 * prod(parent dims) * R flops."""
        ledger = FlopLedger()
        multi_ttv(rng.random((2, 12)), (3, 4), rng.random((4, 2)), "prefix", 1, ledger=ledger)
        assert ledger.flops[MULTI_TTV] == 2 * 12 * 2

    def test_krp_shape_mismatch(self, rng):
        """Test that the KRP must cover the eliminated modes."""
        with pytest.raises(TensorShapeError):
            multi_ttv(rng.random((2, 12)), (3, 4), rng.random((3, 2)), "prefix", 1)


class TestTreeSweep:
    """Test lazy sweeps against the naive oracle."""

    @pytest.mark.parametrize("dims,rank", [
        ((3, 4, 5), 2),
        ((4, 4, 4), 3),
        ((2, 3, 4, 5), 4),
        ((3, 2, 2, 3, 2), 2),
        ((6, 5), 3),
    ])
    def test_every_mode_matches_naive(self, rng, dims, rank):
        """Test two sweeps with factor updates after every mode."""
        tensor = random_tensor(rng, dims)
        factors = [None] + [rng.random((d, rank)) for d in dims[1:]]
        engine = DimTreeMttkrp(tensor, rank)
        for n in range(2, len(dims) + 1):
            engine.set_factor(n, factors[n - 1])

        def visitor(n, M):
            expected = mttkrp_naive(tensor, factors, n)
            assert relative_error(M, expected) <= 1e-12
            factors[n - 1] = rng.random((dims[n - 1], rank))
            return factors[n - 1]

        for _ in range(2):
            delivered = tree_mttkrp_sweep(tensor, factors, visitor, engine=engine)
            assert [M.shape for M in delivered] == [(d, rank) for d in dims]

    def test_builds_engine_when_missing(self, rng):
        """Test that a sweep can start from bare factors."""
        tensor = random_tensor(rng, (3, 4, 5))
        factors = [None, rng.random((4, 2)), rng.random((5, 2))]
        delivered = tree_mttkrp_sweep(tensor, factors, lambda n, M: np.ones((tensor.dims[n - 1], 2)))
        assert relative_error(delivered[0], mttkrp_naive(tensor, factors, 1)) <= 1e-12

    def test_all_ones_gives_fiber_sums(self):
        """Test R=1 ones factors -> mode-n fiber sums."""
        array = np.arange(1.0, 25.0).reshape(2, 3, 4)
        tensor = DenseTensor.from_array(array)
        engine = DimTreeMttkrp(tensor, 1)
        for n, d in enumerate(tensor.dims, start=1):
            engine.set_factor(n, np.ones((d, 1)))
        np.testing.assert_allclose(engine.mttkrp(1)[:, 0], array.sum(axis=(1, 2)))
        np.testing.assert_allclose(engine.mttkrp(2)[:, 0], array.sum(axis=(0, 2)))
        np.testing.assert_allclose(engine.mttkrp(3)[:, 0], array.sum(axis=(0, 1)))

    def test_unchanged_factors_are_not_recomputed(self, rng):
        """Test that asking again without updates costs nothing."""
        tensor = random_tensor(rng, (3, 4, 5))
        engine = DimTreeMttkrp(tensor, 2)
        for n, d in enumerate(tensor.dims, start=1):
            engine.set_factor(n, rng.random((d, 2)))
        first = engine.mttkrp(2)
        before = dict(engine.ledger.flops)
        second = engine.mttkrp(2)
        assert engine.ledger.flops == before
        np.testing.assert_array_equal(first, second)

    def test_missing_factor_reported(self, rng):
        """Test that a needed factor must be installed."""
        engine = DimTreeMttkrp(random_tensor(rng, (3, 4, 5)), 2)
        with pytest.raises(TensorShapeError):
            engine.mttkrp(1)


class TestFlopAccounting:
    """Test the FlopLedger against the sweep model."""

    @pytest.mark.parametrize("dims", [(4, 5, 6), (3, 3, 3, 3), (2, 3, 2, 3, 2)])
    def test_measured_sweeps_equal_model(self, rng, dims):
        """Test that each full sweep charges exactly the model's flops."""
        rank = 3
        tensor = random_tensor(rng, dims)
        engine = DimTreeMttkrp(tensor, rank)
        for n in range(2, len(dims) + 1):
            engine.set_factor(n, rng.random((dims[n - 1], rank)))
        model = sweep_flop_model(engine.tree, rank)

        def visitor(n, M):
            return rng.random((dims[n - 1], rank))

        for sweep in range(1, 3):
            tree_mttkrp_sweep(tensor, [None] * len(dims), visitor, engine=engine)
            assert engine.ledger.flops[PARTIAL_MTTKRP] == sweep * model[PARTIAL_MTTKRP]
            assert engine.ledger.flops[MULTI_TTV] == sweep * model[MULTI_TTV]
            assert engine.ledger.flops[KRP] == sweep * model[KRP]

    def test_root_gemms_charge_four_i_r(self):
        """Test that the two root children cost 2 * 2IR per sweep."""
        dims, rank = (8, 8, 8, 8), 4
        model = sweep_flop_model(build_tree(dims, rank), rank)
        assert model[PARTIAL_MTTKRP] == 4 * 8 ** 4 * rank

    @pytest.mark.parametrize("ndims", [3, 4, 5])
    def test_saving_is_about_n_over_two(self, ndims):
        """Test naive / tree flops within 25% of N/2 for cubical dims 32, R=16."""
        dims, rank = (32,) * ndims, 16
        model = sweep_flop_model(build_tree(dims, rank), rank)
        ratio = naive_sweep_flops(dims, rank) / sum(model.values())
        assert abs(ratio - ndims / 2) <= 0.25 * ndims / 2

    def test_allocations_are_node_temporaries_only(self, rng):
        """Test that only prod(node dims) * R buffers are allocated, once."""
        dims, rank = (3, 4, 2, 5), 2
        tensor = random_tensor(rng, dims)
        engine = DimTreeMttkrp(tensor, rank)
        expected = sorted(node.size(dims) * rank for node in engine.tree.nodes if node.parent is not None)
        assert sorted(engine.ledger.temporary_allocations) == expected
        assert sum(expected) == engine.tree.temporary_words()

        for n, d in enumerate(dims, start=1):
            engine.set_factor(n, rng.random((d, rank)))
        for n in range(1, len(dims) + 1):
            engine.mttkrp(n)
        assert len(engine.ledger.temporary_allocations) == len(expected)

    def test_ledger_is_monotone_until_reset(self):
        """Test add() rejects negative counts and reset() zeroes."""
        ledger = FlopLedger()
        ledger.add(KRP, 10)
        with pytest.raises(ValueError):
            ledger.add(KRP, -1)
        assert ledger.flops[KRP] == 10
        ledger.reset()
        assert ledger.flops[KRP] == 0
