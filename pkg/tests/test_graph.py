import itertools

import numpy as np
import pytest

from tagcn.errors import (
    DimensionMismatchError,
    DirectedLaplacianError,
    DuplicateEdgeError,
    IndexOutOfRangeError,
    IsolatedVertexError,
    NonPositiveDegreeError,
    PathLengthTooLargeError,
)
from tagcn.graph import (
    ShiftKind,
    build_graph,
    degrees,
    make_cyclic_graph,
    normalize,
    path_weight_sum,
    relabel_graph,
    spmv,
)

from conftest import EXAMPLE_MATRIX, example_edges, random_directed_graph, \
    random_undirected_graph


class TestBuildGraph:
    def test_example_matrix_round_trip(self, example_graph):
        assert np.array_equal(example_graph.to_dense(), np.array(EXAMPLE_MATRIX, float))

    def test_single_undirected_edge(self):
        g = build_graph([(0, 1, 1.0)], 2, directed=False)
        assert np.array_equal(g.to_dense(), [[0.0, 1.0], [1.0, 0.0]])

    def test_index_out_of_range(self):
        with pytest.raises(IndexOutOfRangeError):
            build_graph([(0, 5, 1.0)], 3, directed=True)

    def test_duplicate_edge(self):
        with pytest.raises(DuplicateEdgeError):
            build_graph([(0, 1, 1.0), (0, 1, 2.0)], 2, directed=True)

    def test_isolated_vertex(self):
        with pytest.raises(IsolatedVertexError):
            build_graph([(0, 1, 1.0)], 3, directed=False)

    def test_self_loop_allowed(self):
        g = build_graph([(0, 0, 2.0), (0, 1, 1.0)], 2, directed=True)
        assert g.to_dense()[0, 0] == 2.0

    def test_non_finite_weight_rejected(self):
        with pytest.raises(IndexOutOfRangeError):
            build_graph([(0, 1, float("inf"))], 2, directed=False)

    def test_sorted_column_indices(self, example_graph):
        ro, ci = example_graph.row_offsets, example_graph.col_indices
        for i in range(example_graph.num_nodes):
            row = ci[ro[i]:ro[i + 1]]
            assert np.all(np.diff(row) > 0)


class TestDegrees:
    def test_two_node(self):
        g = build_graph([(0, 1, 1.0)], 2, directed=False)
        assert np.array_equal(degrees(g), [1.0, 1.0])

    def test_example_vertex_zero(self, example_graph):
        assert degrees(example_graph)[0] == 6.0

    def test_four_cycle(self):
        g = build_graph([(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)],
                        4, directed=False)
        assert np.array_equal(degrees(g), [2.0, 2.0, 2.0, 2.0])


class TestNormalize:
    def test_sym_two_node(self):
        g = build_graph([(0, 1, 1.0)], 2, directed=False)
        s = normalize(g, ShiftKind.SYM_NORMALIZED)
        assert np.allclose(s.to_dense(), [[0, 1], [1, 0]], atol=0)

    def test_gcn_two_node(self):
        g = build_graph([(0, 1, 1.0)], 2, directed=False)
        s = normalize(g, ShiftKind.GCN_RENORMALIZED)
        assert np.allclose(s.to_dense(), [[0.5, 0.5], [0.5, 0.5]], atol=1e-15)

    def test_random_walk_rows_sum_to_one(self):
        rng = np.random.default_rng(42)
        g = random_directed_graph(rng, 6, 10, integer_weights=False)
        s = normalize(g, ShiftKind.RANDOM_WALK)
        rows = s.to_dense().sum(axis=1)
        assert np.max(np.abs(rows - 1.0)) <= 1e-12

    def test_laplacian_requires_undirected(self):
        rng = np.random.default_rng(0)
        g = random_directed_graph(rng, 5, 4)
        with pytest.raises(DirectedLaplacianError):
            normalize(g, ShiftKind.LAPLACIAN)

    def test_laplacian_symmetric_psd(self):
        rng = np.random.default_rng(1)
        g = random_undirected_graph(rng, 10, 8, weighted=True)
        L = normalize(g, ShiftKind.LAPLACIAN).to_dense()
        assert np.allclose(L, L.T)
        assert np.min(np.linalg.eigvalsh(L)) >= -1e-12

    def test_negative_weights_rejected(self):
        g = build_graph([(0, 1, -1.0), (1, 0, 2.0)], 2, directed=True)
        with pytest.raises(NonPositiveDegreeError):
            normalize(g, ShiftKind.SYM_NORMALIZED)

    def test_sym_spectral_radius_at_most_one(self):
        from tagcn.filters import power_iteration_lambda_max

        for seed in range(5):
            rng = np.random.default_rng(seed)
            g = random_undirected_graph(rng, 8, 6, weighted=True)
            s = normalize(g, ShiftKind.SYM_NORMALIZED)
            assert power_iteration_lambda_max(s) <= 1.0 + 1e-10

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(7)
        g = random_undirected_graph(rng, 9, 10, weighted=True)
        perm = rng.permutation(9)
        for kind in (ShiftKind.SYM_NORMALIZED, ShiftKind.GCN_RENORMALIZED,
                     ShiftKind.RANDOM_WALK, ShiftKind.LAPLACIAN):
            a = normalize(relabel_graph(g, perm), kind).to_dense()
            b = normalize(g, kind).to_dense()
            p = np.zeros((9, 9))
            p[perm, np.arange(9)] = 1.0
            assert np.array_equal(a, p @ b @ p.T)


class TestSpmv:
    def test_zero_vector(self, example_graph):
        s = normalize(example_graph, ShiftKind.RAW)
        assert np.array_equal(spmv(s, np.zeros(7)), np.zeros(7))

    def test_cyclic_rotation(self):
        s = normalize(make_cyclic_graph(5), ShiftKind.RAW)
        x = np.arange(5.0)
        assert np.array_equal(spmv(s, x), [4.0, 0.0, 1.0, 2.0, 3.0])

    def test_against_dense(self):
        rng = np.random.default_rng(3)
        for seed in range(10):
            g = random_directed_graph(np.random.default_rng(seed), 8, 20,
                                      integer_weights=False)
            s = normalize(g, ShiftKind.RAW)
            x = rng.standard_normal(8)
            assert np.max(np.abs(spmv(s, x) - s.to_dense() @ x)) <= 1e-12

    def test_against_dense_64_nodes(self):
        rng = np.random.default_rng(11)
        g = random_directed_graph(rng, 64, 400, integer_weights=False)
        s = normalize(g, ShiftKind.SYM_NORMALIZED)
        x = rng.standard_normal(64)
        assert np.max(np.abs(spmv(s, x) - s.to_dense() @ x)) <= 1e-12

    def test_dimension_mismatch(self, example_graph):
        s = normalize(example_graph, ShiftKind.RAW)
        with pytest.raises(DimensionMismatchError):
            spmv(s, np.zeros(6))


class TestPathWeightSum:
    def test_worked_example_is_18(self, example_graph):
        assert path_weight_sum(example_graph, 1, 0, 3) == 18.0

    def test_exactly_six_paths_and_single_path_weight(self, example_graph):
        # independent enumeration straight off the dense matrix
        a = example_graph.to_dense()
        paths = []
        for mid in itertools.product(range(7), repeat=2):
            seq = (1, mid[0], mid[1], 0)
            w = np.prod([a[seq[i + 1], seq[i]] for i in range(3)])
            if w != 0:
                paths.append((seq, float(w)))
        assert len(paths) == 6
        weights = dict(paths)
        # the sequence (2,1,4,1) in 1-indexed vertices has weight 1*1*2 = 2
        assert weights[(1, 0, 3, 0)] == 2.0
        assert sum(weights.values()) == 18.0

    def test_k_zero_convention(self, example_graph):
        assert path_weight_sum(example_graph, 2, 2, 0) == 1.0
        assert path_weight_sum(example_graph, 2, 3, 0) == 0.0

    def test_guard(self, example_graph):
        with pytest.raises(PathLengthTooLargeError):
            path_weight_sum(example_graph, 0, 0, 7)
        with pytest.raises(PathLengthTooLargeError):
            path_weight_sum(example_graph, 0, 0, -1)

    def test_matches_matrix_powers_exactly(self):
        for seed in range(20):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(3, 9))
            g = random_directed_graph(rng, n, n, max_weight=5)
            s = normalize(g, ShiftKind.RAW)
            src, dst = (int(v) for v in rng.integers(0, n, 2))
            z = np.zeros(n)
            z[src] = 1.0
            for k in range(5):
                assert path_weight_sum(g, src, dst, k) == z[dst]
                z = spmv(s, z)
