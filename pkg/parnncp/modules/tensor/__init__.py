"""Dense tensor storage, layout helpers and small dense kernels."""

from parnncp.modules.tensor.dense import (
    DenseTensor,
    SplitMatricization,
    TensorShapeError,
    decode_offset,
    entry_offset,
    mode_n_matricize,
)
from parnncp.modules.tensor.kernels import (
    gram,
    hadamard_all_but,
    khatri_rao,
    khatri_rao_flops,
    norm_squared,
)
from parnncp.modules.tensor.kruskal import KruskalModel
from parnncp.modules.tensor.synthetic import low_rank_model, low_rank_tensor

__all__ = [
    "DenseTensor",
    "KruskalModel",
    "SplitMatricization",
    "TensorShapeError",
    "decode_offset",
    "entry_offset",
    "gram",
    "hadamard_all_but",
    "khatri_rao",
    "khatri_rao_flops",
    "low_rank_model",
    "low_rank_tensor",
    "mode_n_matricize",
    "norm_squared",
]
