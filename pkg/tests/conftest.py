import sys

import numpy as np
import pytest

from tagcn.graph import Graph, build_graph

# the 7-vertex directed example matrix; entry [n][m] = weight of edge m -> n
EXAMPLE_MATRIX = [
    [0, 1, 0, 2, 3, 0, 0],
    [1, 0, 4, 5, 0, 0, 0],
    [0, 1, 0, 0, 0, 0, 1],
    [1, 1, 0, 0, 6, 0, 0],
    [1, 0, 0, 1, 0, 1, 0],
    [0, 0, 0, 0, 1, 0, 0],
    [0, 0, 0, 1, 0, 0, 0],
]


def example_edges():
    return [
        (m, n, float(EXAMPLE_MATRIX[n][m]))
        for n in range(7)
        for m in range(7)
        if EXAMPLE_MATRIX[n][m]
    ]


@pytest.fixture
def example_graph() -> Graph:
    return build_graph(example_edges(), 7, directed=True)


def random_directed_graph(rng: np.random.Generator, num_nodes: int,
                          extra_edges: int, max_weight: int = 5,
                          integer_weights: bool = True) -> Graph:
    """Directed ring plus random extra edges; never has an isolated vertex."""
    edges = {(i, (i + 1) % num_nodes) for i in range(num_nodes)}
    for _ in range(extra_edges):
        i, j = (int(v) for v in rng.integers(0, num_nodes, 2))
        edges.add((i, j))
    out = []
    for i, j in sorted(edges):
        w = (float(rng.integers(1, max_weight + 1)) if integer_weights
             else float(rng.uniform(0.1, 1.0)))
        out.append((i, j, w))
    return build_graph(out, num_nodes, directed=True)


def random_undirected_graph(rng: np.random.Generator, num_nodes: int,
                            extra_edges: int, weighted: bool = False) -> Graph:
    """Connected undirected graph: ring, a triangle chord, random extras."""
    edges = {(i, (i + 1) % num_nodes) for i in range(num_nodes - 1)}
    edges.add((0, num_nodes - 1))
    edges.add((0, 2))  # odd cycle: keeps sym-normalized spectrum off -1
    for _ in range(extra_edges):
        i, j = (int(v) for v in rng.integers(0, num_nodes, 2))
        if i != j:
            edges.add((min(i, j), max(i, j)))
    out = []
    for i, j in sorted({(min(i, j), max(i, j)) for i, j in edges}):
        w = float(rng.uniform(0.2, 1.0)) if weighted else 1.0
        out.append((i, j, w))
    return build_graph(out, num_nodes, directed=False)


def rel_err(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    return float(np.max(np.abs(a - b) / denom))


def pytest_runtest_logreport(report):
    """One PASS/FAIL line per acceptance criterion in the terminal output."""
    if "test_acceptance" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.skipped):
        status = {True: "PASS", False: "FAIL"}[report.passed]
        if report.skipped:
            status = "SKIP"
        name = report.nodeid.split("::")[-1]
        sys.stdout.write(f"\nacceptance {status}: {name}\n")
