"""
Dimension-tree MTTKRP.

A dimension tree is a binary tree over contiguous mode ranges. The root
holds {1..N} and is split once to balance the two sides' index spaces;
below the root every internal node peels off its lowest mode as a leaf.

For a tree over dims (64, 64, 64, 64, 64):

    {1,2,3,4,5}
    ├── {1,2}
    │   ├── {1}
    │   └── {2}
    └── {3,4,5}
        ├── {3}
        └── {4,5}
            ├── {4}
            └── {5}

Root children are computed by one GEMM against the contiguous split
matricization of the tensor (partial MTTKRP); every other node by R GEMVs
over its parent's temporary (multi-TTV). Leaf {n} holds M(n).

Temporaries are stored as R x prod(node dims) arrays (rank slice r is the
contiguous block r), which is the node tensor of shape
I_i x ... x I_j x R in column-major order.

A node's temporary depends only on the factors of modes outside the node,
so the engine stamps each temporary with those factors' versions and
recomputes it lazily when one changed. During a sweep n = 1..N every
non-root node is therefore computed exactly once.
"""

import logging
import math
from contextlib import nullcontext
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from parnncp.core.errors import ParNncpError
from parnncp.modules.mttkrp.flops import KRP, MULTI_TTV, PARTIAL_MTTKRP, FlopLedger
from parnncp.modules.tensor.dense import DenseTensor, TensorShapeError
from parnncp.modules.tensor.kernels import khatri_rao, khatri_rao_flops

logger = logging.getLogger(__name__)


class TreeShapeError(ParNncpError, ValueError):
    """Raised for trees over fewer than two modes or non-contiguous splits."""
    pass


class TreeNode:
    """One node of a dimension tree: a contiguous, 1-indexed mode range."""

    def __init__(self, modes: Tuple[int, ...], parent: Optional["TreeNode"] = None):
        self.modes = modes
        self.parent = parent
        self.left: Optional["TreeNode"] = None
        self.right: Optional["TreeNode"] = None

        # Engine state
        self.payload: Optional[np.ndarray] = None
        self.stamps: Optional[Dict[int, int]] = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    @property
    def sibling(self) -> "TreeNode":
        if self.parent is None:
            raise TreeShapeError("the root has no sibling")
        return self.parent.right if self.parent.left is self else self.parent.left  # type: ignore[return-value]

    @property
    def is_prefix(self) -> bool:
        """Whether the node is the lower-mode half of its parent."""
        return self.parent is not None and self.parent.left is self

    def size(self, dims: Sequence[int]) -> int:
        return math.prod([dims[m - 1] for m in self.modes])

    def __repr__(self):
        return f"<TreeNode {set(self.modes)}>"


def root_split(dims: Sequence[int]) -> int:
    """
    Split point s balancing prod_{n<=s} I_n against prod_{n>s} I_n.

    Ties go to the smaller s.

    Example:
        root_split((1024, 1344, 33))  # 1: |1024 - 44352| < |1376256 - 33|
    """
    if len(dims) < 2:
        raise TreeShapeError(f"a dimension tree needs N >= 2 modes, got {len(dims)}")
    total = math.prod(dims)
    best_s, best_gap = 1, None
    left = 1
    for s in range(1, len(dims)):
        left *= int(dims[s - 1])
        gap = abs(left - total // left)
        if best_gap is None or gap < best_gap:
            best_s, best_gap = s, gap
    return best_s


class DimensionTree:
    """
    Tree shape over given extents; see module docstring.

    Usage:
        tree = build_tree((64, 64, 64, 64, 64), 8)
        tree.describe()   # ((1, 2, 3, 4, 5), [((1, 2), ...), ((3, 4, 5), ...)])
        tree.leaves[3]    # <TreeNode {3}>
    """

    def __init__(self, dims: Sequence[int], rank: int):
        if rank < 1:
            raise TreeShapeError(f"rank must be >= 1, got {rank}")
        self.dims = tuple(int(d) for d in dims)
        self.rank = rank
        ndims = len(self.dims)
        split = root_split(self.dims)

        self.root = TreeNode(tuple(range(1, ndims + 1)))
        self.root.left = self._chain(tuple(range(1, split + 1)), self.root)
        self.root.right = self._chain(tuple(range(split + 1, ndims + 1)), self.root)

        self.nodes: List[TreeNode] = []
        self.leaves: Dict[int, TreeNode] = {}
        self._collect(self.root)

    @property
    def split(self) -> int:
        return self.root.left.modes[-1]  # type: ignore[union-attr]

    def _chain(self, modes: Tuple[int, ...], parent: TreeNode) -> TreeNode:
        node = TreeNode(modes, parent)
        if len(modes) > 1:
            node.left = self._chain(modes[:1], node)
            node.right = self._chain(modes[1:], node)
        return node

    def _collect(self, node: TreeNode) -> None:
        self.nodes.append(node)
        if node.is_leaf:
            self.leaves[node.modes[0]] = node
            return
        self._collect(node.left)  # type: ignore[arg-type]
        self._collect(node.right)  # type: ignore[arg-type]

    def describe(self, node: Optional[TreeNode] = None):
        """Nested (modes, [children]) tuples; leaves are bare mode tuples."""
        node = node or self.root
        if node.is_leaf:
            return node.modes
        return (node.modes, [self.describe(node.left), self.describe(node.right)])

    def temporary_words(self) -> int:
        """Words held by all non-root temporaries."""
        return sum(n.size(self.dims) * self.rank for n in self.nodes if n.parent is not None)


def build_tree(dims: Sequence[int], rank: int) -> DimensionTree:
    """
    Build the dimension tree for a tensor shape.

    Raises:
        TreeShapeError: If N < 2 or rank < 1
    """
    return DimensionTree(dims, rank)


def _side_of(keep_modes: Sequence[int], ndims: int) -> Tuple[str, int]:
    """('prefix' | 'suffix', split point) for a contiguous keep range."""
    keep = tuple(keep_modes)
    if not keep or keep != tuple(range(keep[0], keep[0] + len(keep))):
        raise TreeShapeError(f"modes {keep} are not a contiguous range")
    if len(keep) >= ndims:
        raise TreeShapeError("the kept side must leave at least one mode to contract")
    if keep[0] == 1:
        return "prefix", keep[-1]
    if keep[-1] == ndims:
        return "suffix", keep[0] - 1
    raise TreeShapeError(f"modes {keep} do not form a contiguous split of 1..{ndims}")


def as_temporary_tensor(payload: np.ndarray, keep_dims: Sequence[int]) -> np.ndarray:
    """View an R x prod(dims) payload as the node tensor of shape dims + (R,)."""
    rank = payload.shape[0]
    return payload.reshape(-1).reshape(tuple(keep_dims) + (rank,), order="F")


def partial_mttkrp(
    tensor: DenseTensor,
    krp: np.ndarray,
    keep_modes: Sequence[int],
    out: Optional[np.ndarray] = None,
    ledger: Optional[FlopLedger] = None,
) -> np.ndarray:
    """
    Contract the tensor with the KRP of the complementary side in one GEMM.

    Works on the contiguous split matricization, so no tensor entry moves.

    Args:
        tensor: Input tensor
        krp: KRP of the other side's factors, ascending modes, (prod other dims) x R
        keep_modes: Contiguous prefix {1..s} or suffix {s+1..N}
        out: Optional R x prod(keep dims) buffer to write into
        ledger: Receives 2 * I * R partial-MTTKRP flops

    Returns:
        R x prod(keep dims) payload

    Raises:
        TreeShapeError: If keep_modes is not a contiguous split
        TensorShapeError: If the KRP does not match the other side
    """
    side, split = _side_of(keep_modes, tensor.ndims)
    matrix = tensor.split_matricization(split).matrix
    rank = krp.shape[1]
    other_rows = matrix.shape[1] if side == "prefix" else matrix.shape[0]
    keep_size = matrix.shape[0] if side == "prefix" else matrix.shape[1]
    if krp.shape[0] != other_rows:
        raise TensorShapeError(f"KRP has {krp.shape[0]} rows, the contracted side has {other_rows}")
    if out is None:
        out = np.empty((rank, keep_size))

    with ledger.timed(PARTIAL_MTTKRP) if ledger else nullcontext():
        if side == "prefix":
            np.matmul(krp.T, matrix.T, out=out)
        else:
            np.matmul(krp.T, matrix, out=out)

    if ledger:
        ledger.add(PARTIAL_MTTKRP, 2 * tensor.size * rank)
    return out


def multi_ttv(
    payload: np.ndarray,
    parent_dims: Sequence[int],
    krp: np.ndarray,
    child_side: str,
    child_count: int,
    out: Optional[np.ndarray] = None,
    ledger: Optional[FlopLedger] = None,
) -> np.ndarray:
    """
    R tensor-times-vector contractions, one per rank slice.

    Rank slice r of the parent temporary is contracted with column r of the
    KRP of the modes being eliminated.

    Args:
        payload: Parent temporary, R x prod(parent_dims)
        parent_dims: Extents of the parent's modes, ascending
        krp: KRP of the eliminated modes (ascending), (prod eliminated dims) x R
        child_side: "prefix" if the child keeps the first child_count modes, else "suffix"
        child_count: Number of modes the child keeps
        out: Optional R x prod(child dims) buffer
        ledger: Receives 2 * prod(parent_dims) * R multi-TTV flops

    Returns:
        R x prod(child dims) payload

    Raises:
        TensorShapeError: On mismatched shapes
    """
    parent_dims = tuple(parent_dims)
    if child_side not in ("prefix", "suffix"):
        raise TreeShapeError(f"child_side must be 'prefix' or 'suffix', got {child_side!r}")
    if not 1 <= child_count < len(parent_dims):
        raise TreeShapeError(f"child must keep 1..{len(parent_dims) - 1} modes, got {child_count}")

    rank = payload.shape[0]
    parent_size = math.prod(parent_dims)
    if payload.shape != (rank, parent_size):
        raise TensorShapeError(f"payload shape {payload.shape} does not match parent dims {parent_dims}")

    if child_side == "prefix":
        kept, eliminated = parent_dims[:child_count], parent_dims[child_count:]
    else:
        kept, eliminated = parent_dims[-child_count:], parent_dims[:-child_count]
    a, b = math.prod(kept), math.prod(eliminated)
    if krp.shape != (b, rank):
        raise TensorShapeError(f"KRP shape {krp.shape} does not match eliminated size {b} x {rank}")
    if out is None:
        out = np.empty((rank, a))

    columns = np.ascontiguousarray(krp.T)
    with ledger.timed(MULTI_TTV) if ledger else nullcontext():
        for r in range(rank):
            if child_side == "prefix":
                block = payload[r].reshape((a, b), order="F")
                np.matmul(block, columns[r], out=out[r])
            else:
                block = payload[r].reshape((b, a), order="F")
                np.matmul(columns[r], block, out=out[r])

    if ledger:
        ledger.add(MULTI_TTV, 2 * parent_size * rank)
    return out


class DimTreeMttkrp:
    """
    Lazy dimension-tree MTTKRP engine for one tensor.

    Temporaries are allocated once at construction and reused for the
    lifetime of the engine.

    Usage:
        engine = DimTreeMttkrp(tensor, rank)
        for n in range(2, N + 1):
            engine.set_factor(n, H[n])
        M1 = engine.mttkrp(1)
        engine.set_factor(1, H1_new)
        M2 = engine.mttkrp(2)   # reuses what H1 did not invalidate
    """

    def __init__(
        self,
        tensor: DenseTensor,
        rank: int,
        ledger: Optional[FlopLedger] = None,
        tree: Optional[DimensionTree] = None,
    ):
        self.tensor = tensor
        self.rank = rank
        self.ledger = ledger or FlopLedger()
        self.tree = tree or build_tree(tensor.dims, rank)
        if self.tree.dims != tensor.dims or self.tree.rank != rank:
            raise TreeShapeError("tree was built for a different shape or rank")

        self.factors: List[Optional[np.ndarray]] = [None] * tensor.ndims
        self.versions = [0] * tensor.ndims

        for node in self.tree.nodes:
            if node.parent is None:
                continue
            node.payload = np.empty((rank, node.size(tensor.dims)))
            node.stamps = None
            self.ledger.record_allocation(node.payload.size)

    def set_factor(self, n: int, H: np.ndarray) -> None:
        """Install a new factor for mode n (copied) and invalidate dependents."""
        expected = (self.tensor.dims[n - 1], self.rank)
        H = np.array(H, dtype=np.float64)
        if H.shape != expected:
            raise TensorShapeError(f"factor {n} has shape {H.shape}, expected {expected}")
        self.factors[n - 1] = H
        self.versions[n - 1] += 1

    def mttkrp(self, n: int) -> np.ndarray:
        """M(n) as a C-contiguous I_n x R array."""
        if n not in self.tree.leaves:
            raise TensorShapeError(f"mode {n} out of range 1..{self.tensor.ndims}")
        leaf = self.tree.leaves[n]
        self._ensure(leaf)
        return np.ascontiguousarray(leaf.payload.T)  # type: ignore[union-attr]

    def _outside(self, node: TreeNode) -> List[int]:
        return [m for m in range(1, self.tensor.ndims + 1) if m not in node.modes]

    def _is_valid(self, node: TreeNode) -> bool:
        if node.stamps is None:
            return False
        return all(node.stamps[m] == self.versions[m - 1] for m in self._outside(node))

    def _sibling_krp(self, node: TreeNode) -> np.ndarray:
        modes = node.sibling.modes
        mats = []
        for m in modes:
            H = self.factors[m - 1]
            if H is None:
                raise TensorShapeError(f"factor for mode {m} is needed by {node!r} but not set")
            mats.append(H)
        with self.ledger.timed(KRP):
            krp = khatri_rao(mats)
        self.ledger.add(KRP, khatri_rao_flops([H.shape[0] for H in mats], self.rank))
        return krp

    def _ensure(self, node: TreeNode) -> None:
        if node.parent is None or self._is_valid(node):
            return

        parent = node.parent
        krp = self._sibling_krp(node)
        if parent.parent is None:
            partial_mttkrp(self.tensor, krp, node.modes, out=node.payload, ledger=self.ledger)
        else:
            self._ensure(parent)
            parent_dims = [self.tensor.dims[m - 1] for m in parent.modes]
            multi_ttv(
                parent.payload,  # type: ignore[arg-type]
                parent_dims,
                krp,
                "prefix" if node.is_prefix else "suffix",
                len(node.modes),
                out=node.payload,
                ledger=self.ledger,
            )

        node.stamps = {m: self.versions[m - 1] for m in self._outside(node)}
        logger.debug(f"Computed temporary {node!r}", extra={"modes": list(node.modes)})


def tree_mttkrp_sweep(tensor: DenseTensor, factors: Sequence[Optional[np.ndarray]], visitor, engine=None):
    """
    Deliver M(1), ..., M(N) in mode order, letting the visitor update factors.

    visitor(n, M) may return a new factor for mode n; it is installed
    before M(n+1) is computed, mirroring the BCD dataflow.

    Args:
        tensor: Input tensor
        factors: Current factors (mode 1 may be None on the first sweep)
        visitor: Callable (n, M) -> Optional[new H(n)]
        engine: Existing DimTreeMttkrp (or NaiveMttkrp) to reuse across sweeps

    Returns:
        List of the delivered M(n)
    """
    if engine is None:
        rank = next(H.shape[1] for H in factors if H is not None)
        engine = DimTreeMttkrp(tensor, rank)
        for n, H in enumerate(factors, start=1):
            if H is not None:
                engine.set_factor(n, H)

    delivered = []
    for n in range(1, tensor.ndims + 1):
        M = engine.mttkrp(n)
        delivered.append(M)
        updated = visitor(n, M)
        if updated is not None:
            engine.set_factor(n, updated)
    return delivered
