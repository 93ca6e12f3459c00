"""Scikit-learn style wrapper around the node classifier.

Transductive semi-supervised interface in the spirit of
sklearn.semi_supervised: fit(X, y) takes features for every node of the
graph given at construction, with y = -1 marking unlabeled nodes.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .data import Dataset
from .graph import Graph
from .nn import accuracy
from .trainer import TrainConfig, train_model


class TagcnNodeClassifier(ClassifierMixin, BaseEstimator):
    """Semi-supervised node classifier driven by polynomial graph filters.

    Parameters mirror the training configuration; `graph` fixes the node
    set, so X passed to fit/predict must have one row per graph vertex.
    """

    def __init__(
        self,
        graph: Graph = None,
        hidden_units: int = 16,
        filter_size: int = 2,
        learning_rate: float = 0.01,
        dropout_rate: float = 0.5,
        weight_decay: float = 5e-4,
        max_epochs: int = 300,
        early_stop_window: int = 45,
        val_fraction: float = 0.2,
        seed: int = 0,
    ):
        self.graph = graph
        self.hidden_units = hidden_units
        self.filter_size = filter_size
        self.learning_rate = learning_rate
        self.dropout_rate = dropout_rate
        self.weight_decay = weight_decay
        self.max_epochs = max_epochs
        self.early_stop_window = early_stop_window
        self.val_fraction = val_fraction
        self.seed = seed

    def _validate(self, X, y=None):
        if self.graph is None:
            raise ValueError("a Graph must be supplied at construction")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] != self.graph.num_nodes:
            raise ValueError(
                f"X must be 2-D with {self.graph.num_nodes} rows; got {X.shape}"
            )
        if not np.all(np.isfinite(X)):
            raise ValueError("X contains non-finite values")
        if y is None:
            return X
        y = np.asarray(y, dtype=np.int64)
        if y.shape != (X.shape[0],):
            raise ValueError("y must have one entry per node (-1 = unlabeled)")
        return X, y

    def fit(self, X, y, val_idx=None):
        """Train on the labeled nodes of y; y = -1 marks unlabeled nodes.

        When val_idx is not given, a val_fraction share of the labeled nodes
        (deterministic in `seed`) is held out for early stopping.
        """
        X, y = self._validate(X, y)
        labeled = np.flatnonzero(y >= 0)
        if labeled.size < 2:
            raise ValueError("need at least two labeled nodes")
        self.classes_ = np.unique(y[labeled])
        remap = {int(c): i for i, c in enumerate(self.classes_)}
        y_mapped = np.full_like(y, -1)
        y_mapped[labeled] = [remap[int(v)] for v in y[labeled]]

        rng = np.random.default_rng(self.seed)
        if val_idx is None:
            perm = rng.permutation(labeled)
            n_val = max(1, int(round(self.val_fraction * labeled.size)))
            val_idx = np.sort(perm[:n_val])
            train_idx = np.sort(perm[n_val:])
        else:
            val_idx = np.asarray(val_idx, dtype=np.int64)
            train_idx = np.setdiff1d(labeled, val_idx)

        dataset = Dataset(
            graph=self.graph,
            features=X,
            labels=y_mapped,
            train_idx=train_idx,
            val_idx=val_idx,
            test_idx=val_idx,  # no separate test set inside fit
            num_classes=len(self.classes_),
        )
        cfg = TrainConfig(
            learning_rate=self.learning_rate,
            max_epochs=self.max_epochs,
            early_stop_window=self.early_stop_window,
            dropout_rate=self.dropout_rate,
            weight_decay=self.weight_decay,
            hidden_units=self.hidden_units,
            filter_size=self.filter_size,
            seed=self.seed,
        )
        self.model_, self.metrics_ = train_model(dataset, cfg)
        return self

    def decision_function(self, X):
        check_is_fitted(self, "model_")
        X = self._validate(X)
        return self.model_.forward(X, mode="eval")

    def predict_proba(self, X):
        logits = self.decision_function(X)
        z = logits - logits.max(axis=1, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=1, keepdims=True)

    def predict(self, X):
        logits = self.decision_function(X)
        return self.classes_[logits.argmax(axis=1)]

    def score(self, X, y, sample_weight=None):
        """Accuracy over the labeled entries of y."""
        X, y = self._validate(X, y)
        labeled = np.flatnonzero(y >= 0)
        logits = self.decision_function(X)
        remap = {int(c): i for i, c in enumerate(self.classes_)}
        y_mapped = np.array([remap[int(v)] for v in y[labeled]])
        return accuracy(logits[labeled], y_mapped, np.arange(labeled.size))
