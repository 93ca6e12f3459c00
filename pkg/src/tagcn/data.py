"""Neutral on-disk dataset format, loader/validator, and a synthetic generator.

Format (text, UTF-8), all indices 0-based decimal:

    TAGCN-DATASET v1 <N> <num_edges> <D> <num_classes>
    E src dst weight          # one line per undirected edge, src <= dst
    X node idx value          # sparse feature triplets
    Y node label              # labeled nodes only; others default to -1
    SPLIT train|val|test node

Canonical files sort E by (src, dst), X by (node, idx), Y by node, and SPLIT
by (train, val, test) then node; floats use Python repr.  The writer emits
canonical form, so write(load(f)) is byte-identical for canonical inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from .errors import (
    FormatError,
    LabelOutOfRangeError,
    SplitOverlapError,
)
from .graph import Graph, build_graph

HEADER_MAGIC = "TAGCN-DATASET"
HEADER_VERSION = "v1"


@dataclass
class Dataset:
    graph: Graph
    features: np.ndarray
    labels: np.ndarray
    train_idx: np.ndarray
    val_idx: np.ndarray
    test_idx: np.ndarray
    num_classes: int

    @property
    def num_nodes(self) -> int:
        return self.graph.num_nodes

    def edge_counts(self) -> Dict[str, int]:
        """Both edge-count conventions: undirected pairs and stored entries."""
        entries = int(self.graph.weights.size)
        loops = sum(1 for v, u, _ in self.graph.edges() if u == v)
        return {
            "stored_entries": entries,
            "undirected_pairs": (entries - loops) // 2 + loops,
        }


def _undirected_pairs(graph: Graph) -> List[Tuple[int, int, float]]:
    pairs = []
    for v, u, w in graph.edges():
        if u <= v:
            pairs.append((u, v, w))
    pairs.sort()
    return pairs


def write_dataset(d: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_dataset(d))


def serialize_dataset(d: Dataset) -> str:
    pairs = _undirected_pairs(d.graph)
    n, dim = d.features.shape
    lines = [
        f"{HEADER_MAGIC} {HEADER_VERSION} {n} {len(pairs)} {dim} {d.num_classes}"
    ]
    for src, dst, w in pairs:
        lines.append(f"E {src} {dst} {float(w)!r}")
    rows, cols = np.nonzero(d.features)
    for i, j in zip(rows, cols):
        lines.append(f"X {i} {j} {float(d.features[i, j])!r}")
    for i in range(n):
        if d.labels[i] >= 0:
            lines.append(f"Y {i} {d.labels[i]}")
    for name, idx in (("train", d.train_idx), ("val", d.val_idx),
                      ("test", d.test_idx)):
        for i in sorted(int(v) for v in idx):
            lines.append(f"SPLIT {name} {i}")
    return "\n".join(lines) + "\n"


def load_dataset(path, row_normalize: bool = False) -> Dataset:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_dataset(text, row_normalize=row_normalize)


def parse_dataset(text: str, row_normalize: bool = False) -> Dataset:
    lines = text.splitlines()
    if not lines:
        raise FormatError("empty file")
    head = lines[0].split()
    if len(head) != 6 or head[0] != HEADER_MAGIC or head[1] != HEADER_VERSION:
        raise FormatError(f"bad header {lines[0]!r}", line=1)
    try:
        n, num_edges, dim, num_classes = (int(v) for v in head[2:])
    except ValueError as exc:
        raise FormatError(f"non-integer header field: {exc}", line=1)
    if n <= 0 or dim <= 0 or num_classes <= 0:
        raise FormatError("header sizes must be positive", line=1)

    edges: List[Tuple[int, int, float]] = []
    features = np.zeros((n, dim))
    labels = np.full(n, -1, dtype=np.int64)
    splits: Dict[str, List[int]] = {"train": [], "val": [], "test": []}

    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        parts = raw.split()
        tag = parts[0]
        try:
            if tag == "E":
                src, dst, w = int(parts[1]), int(parts[2]), float(parts[3])
                edges.append((src, dst, w))
            elif tag == "X":
                node, idx, val = int(parts[1]), int(parts[2]), float(parts[3])
                if not (0 <= node < n and 0 <= idx < dim):
                    raise FormatError("feature index out of range", line=lineno)
                features[node, idx] = val
            elif tag == "Y":
                node, label = int(parts[1]), int(parts[2])
                if not 0 <= node < n:
                    raise FormatError("label node out of range", line=lineno)
                if not 0 <= label < num_classes:
                    raise LabelOutOfRangeError(
                        f"line {lineno}: label {label} outside [0, {num_classes})"
                    )
                labels[node] = label
            elif tag == "SPLIT":
                name, node = parts[1], int(parts[2])
                if name not in splits:
                    raise FormatError(f"unknown split {name!r}", line=lineno)
                if not 0 <= node < n:
                    raise FormatError("split node out of range", line=lineno)
                splits[name].append(node)
            else:
                raise FormatError(f"unknown record tag {tag!r}", line=lineno)
        except (IndexError, ValueError) as exc:
            raise FormatError(f"malformed record: {exc}", line=lineno)

    if len(edges) != num_edges:
        raise FormatError(
            f"header promises {num_edges} edges, file has {len(edges)}"
        )
    graph = build_graph(edges, n, directed=False)
    if row_normalize:
        sums = features.sum(axis=1, keepdims=True)
        sums[sums == 0] = 1.0
        features = features / sums

    d = Dataset(
        graph=graph,
        features=features,
        labels=labels,
        train_idx=np.array(sorted(splits["train"]), dtype=np.int64),
        val_idx=np.array(sorted(splits["val"]), dtype=np.int64),
        test_idx=np.array(sorted(splits["test"]), dtype=np.int64),
        num_classes=num_classes,
    )
    validate_splits(d)
    return d


def validate_splits(d: Dataset) -> Dict[str, object]:
    """Assert split/label invariants; return a statistics report."""
    all_idx = np.concatenate([d.train_idx, d.val_idx, d.test_idx])
    if len(np.unique(all_idx)) != len(all_idx):
        raise SplitOverlapError("train/val/test index sets overlap")
    for name, idx in (("train", d.train_idx), ("val", d.val_idx),
                      ("test", d.test_idx)):
        if idx.size == 0:
            raise SplitOverlapError(f"{name} split is empty")
        lab = d.labels[idx]
        if np.any(lab < 0) or np.any(lab >= d.num_classes):
            raise LabelOutOfRangeError(f"{name} split contains unlabeled nodes")
    counts = d.edge_counts()
    return {
        "num_nodes": d.num_nodes,
        "num_features": int(d.features.shape[1]),
        "num_classes": d.num_classes,
        "undirected_pairs": counts["undirected_pairs"],
        "stored_entries": counts["stored_entries"],
        "label_rate": d.train_idx.size / d.num_nodes,
        "val_size": int(d.val_idx.size),
        "test_size": int(d.test_idx.size),
    }


def generate_sbm(
    block_sizes,
    p_in: float,
    p_out: float,
    feature_dim: int,
    signal: str = "direct",
    seed: int = 0,
    noise_sigma: float = 0.3,
    signal_strength: float = 1.0,
    train_frac: float = 0.1,
    val_frac: float = 0.2,
) -> Dataset:
    """Planted-partition graph with class signal in the features.

    signal="direct" plants each node's class pattern in its own features.
    signal="two_hop" splits every class block into normal/relay/beacon
    thirds, wires normal-relay and relay-beacon pairs with p_in, and puts
    the class pattern only on beacon features, so the signal for a normal
    node sits exactly two hops away; splits draw from normal nodes only.
    """
    block_sizes = [int(b) for b in block_sizes]
    if any(b < 3 for b in block_sizes) or len(block_sizes) < 2:
        raise ValueError("need >= 2 blocks of >= 3 nodes each")
    if not (0.0 <= p_in <= 1.0 and 0.0 <= p_out <= 1.0):
        raise ValueError("edge probabilities must be in [0, 1]")
    if signal not in ("direct", "two_hop"):
        raise ValueError(f"unknown signal kind {signal!r}")

    rng = np.random.default_rng(seed)
    n = sum(block_sizes)
    num_classes = len(block_sizes)
    block_of = np.concatenate(
        [np.full(b, c, dtype=np.int64) for c, b in enumerate(block_sizes)]
    )
    offsets = np.cumsum([0] + block_sizes)

    # role partition: 0=normal carries splits, 1=relay, 2=beacon (two_hop only)
    role = np.zeros(n, dtype=np.int64)
    if signal == "two_hop":
        for c, b in enumerate(block_sizes):
            third = b // 3
            lo = offsets[c]
            role[lo + b - 2 * third: lo + b - third] = 1
            role[lo + b - third: lo + b] = 2

    def pair_prob(i: int, j: int) -> float:
        if block_of[i] != block_of[j]:
            return p_out
        if signal == "direct":
            return p_in
        ri, rj = role[i], role[j]
        if {ri, rj} == {0, 1} or {ri, rj} == {1, 2}:
            return p_in
        return p_out

    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < pair_prob(i, j):
                edges.append((i, j, 1.0))

    # repair isolated vertices so the graph admits degree normalization
    touched = np.zeros(n, dtype=bool)
    for i, j, _ in edges:
        touched[i] = touched[j] = True
    for i in np.flatnonzero(~touched):
        c = block_of[i]
        candidates = [j for j in range(offsets[c], offsets[c + 1]) if j != i]
        j = int(rng.choice(candidates))
        edges.append((min(i, j), max(i, j), 1.0))

    # class patterns: disjoint feature bands per class
    band = max(1, feature_dim // num_classes)
    features = noise_sigma * rng.standard_normal((n, feature_dim))
    for i in range(n):
        if signal == "direct" or role[i] == 2:
            c = block_of[i]
            features[i, c * band:(c + 1) * band] += signal_strength

    labels = np.full(n, -1, dtype=np.int64)
    train, val, test = [], [], []
    for c in range(num_classes):
        members = np.arange(offsets[c], offsets[c + 1])
        eligible = members[role[members] == 0]
        labels[eligible] = c
        perm = rng.permutation(eligible)
        n_train = max(1, int(round(train_frac * perm.size)))
        n_val = max(1, int(round(val_frac * perm.size)))
        train.extend(perm[:n_train])
        val.extend(perm[n_train:n_train + n_val])
        test.extend(perm[n_train + n_val:])

    graph = build_graph(edges, n, directed=False)
    return Dataset(
        graph=graph,
        features=features,
        labels=labels,
        train_idx=np.array(sorted(train), dtype=np.int64),
        val_idx=np.array(sorted(val), dtype=np.int64),
        test_idx=np.array(sorted(test), dtype=np.int64),
        num_classes=num_classes,
    )
