"""
Tests for dense tensor storage and layout.

Tests:
- Generalized column-major offsets and their inverse
- Contiguous split matricization views (no copy)
- Mode-n matricization reference path
- Norms and equality

Run tests:
    pytest tests/tensor/test_dense.py -v
"""

import itertools

import numpy as np
import pytest

from parnncp.modules.tensor.dense import (
    DenseTensor,
    TensorShapeError,
    decode_offset,
    entry_offset,
    mode_n_matricize,
)
from parnncp.modules.tensor.kernels import norm_squared


class TestEntryOffset:
    """Test the index <-> offset bijection."""

    def test_first_entry_is_offset_zero(self):
        """Test that (1,1,1) maps to offset 0."""
        assert entry_offset((2, 3, 4), (1, 1, 1)) == 0

    def test_mode_one_varies_fastest(self):
        """Test that stepping mode 1 moves one slot."""
        assert entry_offset((2, 3, 4), (2, 1, 1)) == 1

    def test_mixed_index(self):
        """Test 0 + 1*2 + 2*6 = 14."""
        assert entry_offset((2, 3, 4), (1, 2, 3)) == 14

    def test_out_of_range_index_rejected(self):
        """Test that an index past the extent raises."""
        with pytest.raises(TensorShapeError):
            entry_offset((2, 3, 4), (3, 1, 1))

    def test_zero_index_rejected(self):
        """Test that indices are 1-based."""
        with pytest.raises(TensorShapeError):
            entry_offset((2, 3, 4), (0, 1, 1))

    def test_wrong_index_length_rejected(self):
        """Test that the index must have N components."""
        with pytest.raises(TensorShapeError):
            entry_offset((2, 3, 4), (1, 1))

    @pytest.mark.parametrize("dims", [(3,), (2, 3), (2, 3, 2), (2, 1, 3, 2)])
    def test_round_trip_is_exhaustive_bijection(self, dims):
        """Test decode(entry_offset(idx)) == idx for every index."""
        seen = set()
        for idx in itertools.product(*[range(1, d + 1) for d in dims]):
            offset = entry_offset(dims, idx)
            assert decode_offset(dims, offset) == idx
            seen.add(offset)
        assert seen == set(range(int(np.prod(dims))))

    def test_matches_numpy_fortran_order(self):
        """Test that offsets agree with numpy's Fortran ravel."""
        dims = (3, 4, 2)
        for idx in itertools.product(*[range(1, d + 1) for d in dims]):
            expected = np.ravel_multi_index(tuple(i - 1 for i in idx), dims, order="F")
            assert entry_offset(dims, idx) == expected


class TestDenseTensor:
    """Test DenseTensor construction and accessors."""

    def test_data_length_must_match_dims(self):
        """Test that a short buffer is rejected."""
        with pytest.raises(TensorShapeError):
            DenseTensor((2, 2), np.zeros(3))

    def test_zero_extent_rejected(self):
        """Test that every extent must be positive."""
        with pytest.raises(TensorShapeError):
            DenseTensor((2, 0), np.zeros(0))

    def test_overflowing_extents_rejected(self):
        """Test that dims whose product wraps in int64 do not match an empty buffer."""
        with pytest.raises(TensorShapeError):
            DenseTensor((2**32, 2**32), np.zeros(0))

    def test_from_array_uses_column_major_storage(self):
        """Test that from_array stores mode 1 fastest."""
        array = np.arange(24.0).reshape(2, 3, 4)
        tensor = DenseTensor.from_array(array)
        assert tensor.dims == (2, 3, 4)
        assert tensor.entry((2, 3, 4)) == array[1, 2, 3]
        assert tensor.entry((1, 2, 3)) == array[0, 1, 2]
        np.testing.assert_array_equal(tensor.to_array(), array)

    def test_entry_reads_storage_offset(self, counting_222):
        """Test entry lookup on 1..8 stored in layout order."""
        assert counting_222.entry((1, 1, 1)) == 1.0
        assert counting_222.entry((2, 1, 1)) == 2.0
        assert counting_222.entry((1, 2, 1)) == 3.0
        assert counting_222.entry((1, 1, 2)) == 5.0

    def test_copy_is_independent(self, counting_222):
        """Test that copy() does not alias data."""
        clone = counting_222.copy()
        clone.data[0] = 100.0
        assert counting_222.entry((1, 1, 1)) == 1.0
        assert clone != counting_222

    def test_equality_is_bitwise(self, counting_222):
        """Test equality on dims and data."""
        assert counting_222 == DenseTensor((2, 2, 2), np.arange(1.0, 9.0))
        assert counting_222 != DenseTensor((2, 4), np.arange(1.0, 9.0))


class TestNormSquared:
    """Test squared Frobenius norm."""

    def test_all_zeros(self):
        """Test that the zero tensor has norm 0."""
        assert norm_squared(DenseTensor.zeros((2, 3))) == 0.0

    def test_all_ones(self, ones_222):
        """Test 2x2x2 ones -> 8."""
        assert norm_squared(ones_222) == 8.0

    def test_counting(self, counting_222):
        """Test sum of k^2 for k = 1..8 = 204."""
        assert norm_squared(counting_222) == 204.0


class TestSplitMatricization:
    """Test contiguous split views."""

    def test_view_aliases_tensor_data(self, counting_222):
        """Test that the view shares memory with the tensor."""
        view = counting_222.split_matricization(1).matrix
        assert view.shape == (2, 4)
        assert np.shares_memory(view, counting_222.data)

    def test_invalid_split_rejected(self, counting_222):
        """Test that s must be in 1..N-1."""
        with pytest.raises(TensorShapeError):
            counting_222.split_matricization(3)

    def test_view_matches_decoded_entries(self, rng):
        """Test element (r, c) equals the entry its multi-index decodes to, up to 4x4x4x4."""
        dims = (4, 3, 4, 2)
        tensor = DenseTensor(dims, rng.random(int(np.prod(dims))))
        for s in range(1, len(dims)):
            split = tensor.split_matricization(s)
            matrix = split.matrix
            assert matrix.shape == (split.rows, split.cols)
            for r in range(split.rows):
                for c in range(split.cols):
                    assert matrix[r, c] == tensor.entry(split.multi_index(r, c))


class TestModeNMatricize:
    """Test the explicit unfolding (reference path)."""

    def test_matrix_is_its_own_mode_one_unfolding(self):
        """Test that a 2x2 tensor unfolds to itself in mode 1."""
        array = np.array([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_array_equal(mode_n_matricize(DenseTensor.from_array(array), 1), array)

    def test_mode_two_of_counting_tensor(self, counting_222):
        """Test mode-2 fibers of 1..8: [[1,2,5,6],[3,4,7,8]]."""
        expected = np.array([[1.0, 2.0, 5.0, 6.0], [3.0, 4.0, 7.0, 8.0]])
        np.testing.assert_array_equal(mode_n_matricize(counting_222, 2), expected)

    def test_all_ones_shape(self):
        """Test that ones 3x4x5 unfolds in mode 3 to 5x12 ones."""
        result = mode_n_matricize(DenseTensor.from_array(np.ones((3, 4, 5))), 3)
        np.testing.assert_array_equal(result, np.ones((5, 12)))

    def test_invalid_mode_rejected(self, counting_222):
        """Test that mode 0 and N+1 raise."""
        with pytest.raises(TensorShapeError):
            mode_n_matricize(counting_222, 0)
        with pytest.raises(TensorShapeError):
            mode_n_matricize(counting_222, 4)
