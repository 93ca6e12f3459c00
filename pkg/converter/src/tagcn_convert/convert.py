"""Upstream citation-dataset pickles -> TAGCN-DATASET v1 text files.

The upstream distribution ships eight files per dataset:

    ind.<name>.x          scipy sparse features of the training nodes
    ind.<name>.y          one-hot labels of the training nodes
    ind.<name>.tx / .ty   features / one-hot labels of the test nodes
    ind.<name>.allx / .ally   features / labels of all non-test nodes
    ind.<name>.graph      dict: node id -> neighbor id list
    ind.<name>.test.index newline-separated positions of the test nodes

Test rows are stored shuffled; the index file maps them back.  Citeseer's
index file famously has gaps (test ids that exist in the graph but have no
feature/label row); those rows are zero-filled at the standard positions
and left unlabeled, which is the community-standard repair.
"""

from __future__ import annotations

import pickle
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from tagcn.data import Dataset, validate_splits, write_dataset
from tagcn.graph import build_graph

from .errors import FormatError, MissingFileError, StatMismatchError

DATASET_NAMES = ("cora", "citeseer", "pubmed")

# published reference statistics used as a conversion checksum
REFERENCE_STATS = {
    "cora": {"num_nodes": 2708, "num_classes": 7, "num_features": 1433,
             "label_rate": 0.052},
    "citeseer": {"num_nodes": 3327, "num_classes": 6, "num_features": 3703,
                 "label_rate": 0.036},
    "pubmed": {"num_nodes": 19717, "num_classes": 3, "num_features": 500,
               "label_rate": 0.003},
}

VAL_SIZE = 500

_PARTS = ("x", "y", "tx", "ty", "allx", "ally", "graph", "test.index")


@dataclass(frozen=True)
class UpstreamBundle:
    """Paths to the eight upstream files for one dataset."""

    name: str
    paths: dict

    @classmethod
    def from_dir(cls, name: str, in_dir) -> "UpstreamBundle":
        if name not in DATASET_NAMES:
            raise FormatError(f"unknown dataset {name!r}; "
                              f"expected one of {DATASET_NAMES}")
        in_dir = Path(in_dir)
        paths = {part: in_dir / f"ind.{name}.{part}" for part in _PARTS}
        missing = [str(p) for p in paths.values() if not p.is_file()]
        if missing:
            raise MissingFileError("missing upstream files: " + ", ".join(missing))
        return cls(name=name, paths=paths)


def _load_pickle(path: Path):
    with open(path, "rb") as fh:
        try:
            # upstream files were written by python 2
            return pickle.load(fh, encoding="latin1")
        except (pickle.UnpicklingError, EOFError) as exc:
            raise FormatError(f"{path}: not a readable pickle: {exc}")


def _as_dense(mat) -> np.ndarray:
    if sp.issparse(mat):
        return np.asarray(mat.todense(), dtype=np.float64)
    return np.asarray(mat, dtype=np.float64)


def _read_test_index(path: Path) -> np.ndarray:
    try:
        idx = np.loadtxt(path, dtype=np.int64, ndmin=1)
    except ValueError as exc:
        raise FormatError(f"{path}: bad test index file: {exc}")
    if idx.size == 0:
        raise FormatError(f"{path}: empty test index file")
    return idx


def read_bundle(bundle: UpstreamBundle, val_size: int = VAL_SIZE):
    """Assemble a Dataset from the upstream files.

    The validation split is the standard val_size-node block directly after
    the training rows.  Returns (dataset, notes) where notes records the
    repairs applied.
    """
    x = _as_dense(_load_pickle(bundle.paths["x"]))
    y = np.asarray(_load_pickle(bundle.paths["y"]))
    tx = _as_dense(_load_pickle(bundle.paths["tx"]))
    ty = np.asarray(_load_pickle(bundle.paths["ty"]))
    allx = _as_dense(_load_pickle(bundle.paths["allx"]))
    ally = np.asarray(_load_pickle(bundle.paths["ally"]))
    graph_dict = _load_pickle(bundle.paths["graph"])
    test_idx = _read_test_index(bundle.paths["test.index"])

    if x.shape[1] != allx.shape[1] or tx.shape[1] != allx.shape[1]:
        raise FormatError("feature widths disagree across x/tx/allx")
    if y.shape[0] != x.shape[0] or ty.shape[0] != tx.shape[0]:
        raise FormatError("label row counts disagree with feature rows")

    # reindex the shuffled test block; zero-fill rows for any gap in the
    # test index range (the citeseer repair)
    lo, hi = int(test_idx.min()), int(test_idx.max())
    span = hi - lo + 1
    tx_full = np.zeros((span, allx.shape[1]))
    ty_full = np.zeros((span, ally.shape[1]))
    tx_full[test_idx - lo] = tx
    ty_full[test_idx - lo] = ty
    num_placeholders = span - test_idx.size

    features = np.vstack([allx, tx_full])
    onehot = np.vstack([ally, ty_full])
    n = features.shape[0]
    if lo != allx.shape[0] or hi != n - 1:
        raise FormatError("test index range does not sit after the allx block")

    labels = np.full(n, -1, dtype=np.int64)
    labeled_rows = onehot.sum(axis=1) > 0  # zero-filled rows stay unlabeled
    labels[labeled_rows] = onehot[labeled_rows].argmax(axis=1)

    edges = set()
    isolated_repaired = 0
    for u, neighbors in graph_dict.items():
        for v in neighbors:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise FormatError(f"graph neighbor ({u}, {v}) out of range")
            if u != v:  # upstream self-loop entries carry no information
                edges.add((min(u, v), max(u, v)))
    touched = np.zeros(n, dtype=bool)
    for u, v in edges:
        touched[u] = touched[v] = True
    for v in np.flatnonzero(~touched):
        edges.add((int(v), int(v)))  # self-loop keeps the degree positive
        isolated_repaired += 1

    if x.shape[0] + val_size > allx.shape[0]:
        raise FormatError(
            f"validation block of {val_size} nodes does not fit after the "
            f"{x.shape[0]} training rows ({allx.shape[0]} non-test rows total)"
        )
    train_idx = np.arange(x.shape[0], dtype=np.int64)
    val_idx = np.arange(x.shape[0], x.shape[0] + val_size, dtype=np.int64)
    dataset = Dataset(
        graph=build_graph([(u, v, 1.0) for u, v in sorted(edges)], n,
                          directed=False),
        features=features,
        labels=labels,
        train_idx=train_idx,
        val_idx=val_idx,
        test_idx=np.sort(test_idx),
        num_classes=onehot.shape[1],
    )
    notes = {
        "placeholder_rows": int(num_placeholders),
        "isolated_repaired": int(isolated_repaired),
    }
    return dataset, notes


def check_stats(report: dict, expected: dict) -> None:
    """Raise StatMismatchError unless the report matches the reference."""
    for key in ("num_nodes", "num_classes", "num_features"):
        if report[key] != expected[key]:
            raise StatMismatchError(
                f"{key}: converted {report[key]}, reference {expected[key]}"
            )
    # the reference label rate is published rounded to three decimals
    if abs(report["label_rate"] - expected["label_rate"]) > 0.0005:
        raise StatMismatchError(
            f"label_rate: converted {report['label_rate']:.4f}, "
            f"reference {expected['label_rate']}"
        )


def convert(bundle: UpstreamBundle, out_path, expected_stats=None,
            val_size: int = VAL_SIZE) -> dict:
    """Write the neutral file and return the statistics report.

    expected_stats defaults to the published reference numbers for the
    bundle's dataset; pass an explicit dict (or {}) to override.
    """
    dataset, notes = read_bundle(bundle, val_size=val_size)
    report = validate_splits(dataset)
    report.update(notes)
    report["dataset"] = bundle.name
    if expected_stats is None:
        expected_stats = REFERENCE_STATS[bundle.name]
    if expected_stats:
        check_stats(report, expected_stats)
    write_dataset(dataset, out_path)
    return report
