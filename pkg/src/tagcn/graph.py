"""Sparse graph storage, degree/normalization operators, and a path-weight oracle.

Conventions: the stored matrix entry A[n, m] is the weight on the directed
edge from vertex m to vertex n.  Degrees are row sums, d(i) = sum_j A[i, j],
used for every normalization of a directed or undirected graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from .errors import (
    DimensionMismatchError,
    DirectedLaplacianError,
    DuplicateEdgeError,
    IndexOutOfRangeError,
    IsolatedVertexError,
    NonPositiveDegreeError,
    PathLengthTooLargeError,
)

# exhaustive path enumeration is exponential in k; keep a hard guard
MAX_PATH_LENGTH = 6


class ShiftKind(Enum):
    SYM_NORMALIZED = "sym_normalized"      # D^{-1/2} A D^{-1/2}
    GCN_RENORMALIZED = "gcn_renormalized"  # Dt^{-1/2} (A + I) Dt^{-1/2}
    RANDOM_WALK = "random_walk"            # D^{-1} A
    LAPLACIAN = "laplacian"                # D - A (undirected only)
    RAW = "raw"                            # A unchanged


@dataclass(frozen=True)
class Graph:
    """Immutable CSR graph with finite real edge weights.

    row_offsets/col_indices/weights follow compressed-sparse-row layout with
    column indices sorted ascending within each row.
    """

    num_nodes: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    weights: np.ndarray
    directed: bool

    def to_csr(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.weights, self.col_indices, self.row_offsets),
            shape=(self.num_nodes, self.num_nodes),
        )

    def to_dense(self) -> np.ndarray:
        return self.to_csr().toarray()

    def edges(self) -> Iterable[Tuple[int, int, float]]:
        """Yield stored (row, col, weight) triples, i.e. edges col -> row."""
        for i in range(self.num_nodes):
            for p in range(self.row_offsets[i], self.row_offsets[i + 1]):
                yield i, int(self.col_indices[p]), float(self.weights[p])


@dataclass(frozen=True)
class ShiftOperator:
    """Normalized (or raw) graph shift matrix in CSR form."""

    kind: ShiftKind
    matrix: sp.csr_matrix
    num_nodes: int
    _transpose: sp.csr_matrix = field(default=None, repr=False, compare=False)

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def transpose_matrix(self) -> sp.csr_matrix:
        if self._transpose is None:
            object.__setattr__(self, "_transpose", self.matrix.T.tocsr())
        return self._transpose


def build_graph(
    edge_list: Sequence[Tuple[int, int, float]],
    num_nodes: int,
    directed: bool,
) -> Graph:
    """Build a canonical Graph from (src, dst, weight) triples.

    The stored matrix follows the "A[n, m] = weight of edge m -> n"
    convention, so a triple (src, dst, w) lands at row dst, column src.
    Undirected inputs are symmetrized (each edge stored both ways);
    self-loops are stored once.
    """
    if num_nodes <= 0:
        raise IndexOutOfRangeError("num_nodes must be positive")
    triples = []
    for src, dst, w in edge_list:
        if not (0 <= src < num_nodes and 0 <= dst < num_nodes):
            raise IndexOutOfRangeError(
                f"edge ({src}, {dst}) out of range for {num_nodes} nodes"
            )
        if not np.isfinite(w):
            raise IndexOutOfRangeError(
                f"non-finite weight {w} on edge ({src}, {dst})"
            )
        triples.append((dst, src, float(w)))
        if not directed and src != dst:
            triples.append((src, dst, float(w)))

    seen = set()
    for r, c, _ in triples:
        if (r, c) in seen:
            raise DuplicateEdgeError(f"duplicate edge at matrix entry ({r}, {c})")
        seen.add((r, c))

    triples.sort()
    rows = np.array([t[0] for t in triples], dtype=np.int64)
    cols = np.array([t[1] for t in triples], dtype=np.int64)
    vals = np.array([t[2] for t in triples], dtype=np.float64)
    row_offsets = np.zeros(num_nodes + 1, dtype=np.int64)
    np.add.at(row_offsets, rows + 1, 1)
    row_offsets = np.cumsum(row_offsets)

    # a vertex is isolated when it appears in no stored entry at all
    touched = np.zeros(num_nodes, dtype=bool)
    touched[rows] = True
    touched[cols] = True
    if not touched.all():
        missing = int(np.flatnonzero(~touched)[0])
        raise IsolatedVertexError(f"vertex {missing} has no incident edge")

    return Graph(
        num_nodes=num_nodes,
        row_offsets=row_offsets,
        col_indices=cols,
        weights=vals,
        directed=directed,
    )


def degrees(g: Graph) -> np.ndarray:
    """Row sums d(i) = sum_j A[i, j].

    Each row's weights are summed in sorted-value order so the result is
    bit-identical under vertex relabeling (exact permutation equivariance
    of the derived normalizations).
    """
    return _sorted_row_sums(g.row_offsets, g.weights)


def _sorted_row_sums(row_offsets: np.ndarray, weights: np.ndarray,
                     add_one: bool = False) -> np.ndarray:
    n = len(row_offsets) - 1
    out = np.empty(n)
    for i in range(n):
        row = np.sort(weights[row_offsets[i]:row_offsets[i + 1]])
        out[i] = row.sum() + (1.0 if add_one else 0.0)
    return out


def _check_nonnegative(g: Graph) -> None:
    if np.any(g.weights < 0):
        raise NonPositiveDegreeError("normalization requires nonnegative weights")


def _positive_degrees(g: Graph) -> np.ndarray:
    d = degrees(g)
    if np.any(d <= 0):
        bad = int(np.flatnonzero(d <= 0)[0])
        raise NonPositiveDegreeError(f"vertex {bad} has row sum {d[bad]} <= 0")
    return d


def normalize(g: Graph, kind: ShiftKind) -> ShiftOperator:
    """Derive a shift operator of the requested kind from a graph."""
    a = g.to_csr()
    if kind is ShiftKind.RAW:
        m = a
    elif kind is ShiftKind.SYM_NORMALIZED:
        _check_nonnegative(g)
        d = _positive_degrees(g)
        dinv = sp.diags(1.0 / np.sqrt(d))
        m = (dinv @ a @ dinv).tocsr()
    elif kind is ShiftKind.GCN_RENORMALIZED:
        _check_nonnegative(g)
        at = (a + sp.eye(g.num_nodes, format="csr")).tocsr()
        dt = _sorted_row_sums(g.row_offsets, g.weights, add_one=True)
        if np.any(dt <= 0):
            raise NonPositiveDegreeError("renormalized degree <= 0")
        dinv = sp.diags(1.0 / np.sqrt(dt))
        m = (dinv @ at @ dinv).tocsr()
    elif kind is ShiftKind.RANDOM_WALK:
        _check_nonnegative(g)
        d = _positive_degrees(g)
        m = (sp.diags(1.0 / d) @ a).tocsr()
    elif kind is ShiftKind.LAPLACIAN:
        if g.directed:
            raise DirectedLaplacianError("Laplacian requires an undirected graph")
        _check_nonnegative(g)
        d = degrees(g)
        m = (sp.diags(d) - a).tocsr()
    else:  # pragma: no cover
        raise ValueError(f"unknown shift kind {kind}")
    m.sort_indices()
    return ShiftOperator(kind=kind, matrix=m, num_nodes=g.num_nodes)


def spmv(s: ShiftOperator, x: np.ndarray) -> np.ndarray:
    """Sparse matrix-vector product with per-row ascending-index summation."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (s.num_nodes,):
        raise DimensionMismatchError(
            f"vector of length {x.shape} incompatible with {s.num_nodes} nodes"
        )
    return s.matrix.dot(x)


def spmv_transpose(s: ShiftOperator, x: np.ndarray) -> np.ndarray:
    """Product with the transposed shift (needed by input gradients)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != s.num_nodes:
        raise DimensionMismatchError("dimension mismatch in transposed spmv")
    return s.transpose_matrix().dot(x)


def path_weight_sum(g: Graph, src: int, dst: int, k: int) -> float:
    """Sum of path weights over all length-k vertex sequences src -> dst.

    The weight of a sequence is the product of edge weights along it; the
    k = 0 convention is 1 for src == dst and 0 otherwise (matching A^0 = I).
    Computed by exhaustive enumeration, never through matrix powers, so it
    can serve as an independent oracle for (A^k)[dst, src].
    """
    if k < 0:
        raise PathLengthTooLargeError("path length must be nonnegative")
    if k > MAX_PATH_LENGTH:
        raise PathLengthTooLargeError(
            f"path length {k} exceeds enumeration guard {MAX_PATH_LENGTH}"
        )
    if not (0 <= src < g.num_nodes and 0 <= dst < g.num_nodes):
        raise IndexOutOfRangeError("src/dst out of range")
    if k == 0:
        return 1.0 if src == dst else 0.0

    # out-edges of u: stored entries (v, u, w) mean an edge u -> v
    out = [[] for _ in range(g.num_nodes)]
    for v, u, w in g.edges():
        out[u].append((v, w))

    total = 0.0

    def walk(u: int, remaining: int, acc: float) -> None:
        nonlocal total
        if remaining == 0:
            if u == dst:
                total += acc
            return
        for v, w in out[u]:
            walk(v, remaining - 1, acc * w)

    walk(src, k, 1.0)
    return total


def make_cyclic_graph(n: int) -> Graph:
    """Directed cycle 0 -> 1 -> ... -> n-1 -> 0 with unit weights.

    Its matrix has ones on the subdiagonal plus the top-right corner, so the
    graph shift rotates a signal by one position.
    """
    if n < 2:
        raise IndexOutOfRangeError("cyclic graph needs at least 2 nodes")
    edges = [(i, (i + 1) % n, 1.0) for i in range(n)]
    return build_graph(edges, n, directed=True)


def relabel_graph(g: Graph, perm: Sequence[int]) -> Graph:
    """Relabel vertices: new vertex perm[i] takes the role of old vertex i."""
    perm = np.asarray(perm, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(g.num_nodes)):
        raise IndexOutOfRangeError("perm must be a permutation of all vertices")
    edges = []
    for v, u, w in g.edges():
        if not g.directed and perm[u] > perm[v]:
            continue  # keep one canonical copy; build_graph re-symmetrizes
        edges.append((int(perm[u]), int(perm[v]), w))
    return build_graph(edges, g.num_nodes, directed=g.directed)
