"""Layers for semi-supervised node classification with hand-derived gradients.

Four layer kinds share one interface: the polynomial-filter layer, the
renormalized single-hop convolution, the Chebyshev-recurrence baseline, and
the random-walk diffusion baseline.  Every backward pass is written out
explicitly and is validated against central finite differences in the tests.
"""

from __future__ import annotations

import json
from enum import Enum

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyListError,
    EmptyMaskError,
    InvalidRateError,
    StaleStateError,
    WrongOperatorKindError,
)
from .filters import PolyFilterParams, propagate_powers
from .graph import ShiftKind, ShiftOperator

CHECKPOINT_VERSION = 1


class LayerKind(Enum):
    TAGCN = "tagcn"
    GCN = "gcn"
    CHEB = "cheb"
    DCNN = "dcnn"


def relu(X: np.ndarray) -> np.ndarray:
    return np.maximum(X, 0.0)


def inverted_dropout(X: np.ndarray, rate: float, rng: np.random.Generator):
    """Zero entries with probability `rate`, scale survivors by 1/(1-rate).

    Returns (output, mask); eval mode is simply not calling this.
    """
    if not 0.0 <= rate < 1.0:
        raise InvalidRateError(f"dropout rate must be in [0, 1); got {rate}")
    if rate == 0.0:
        return X, np.ones_like(X)
    mask = (rng.random(X.shape) >= rate).astype(np.float64)
    return X * mask / (1.0 - rate), mask


def masked_softmax_xent(logits: np.ndarray, labels: np.ndarray, mask_idx):
    """Mean cross-entropy over the masked rows and its gradient.

    The gradient is zero outside the mask; rows are stabilized by max
    subtraction before exponentiation.
    """
    mask_idx = np.asarray(mask_idx, dtype=np.int64)
    if mask_idx.size == 0:
        raise EmptyMaskError("loss mask is empty")
    z = logits[mask_idx]
    y = np.asarray(labels)[mask_idx]
    z = z - z.max(axis=1, keepdims=True)
    logsumexp = np.log(np.exp(z).sum(axis=1))
    loss = float(np.mean(logsumexp - z[np.arange(z.shape[0]), y]))
    probs = np.exp(z - logsumexp[:, None])
    probs[np.arange(z.shape[0]), y] -= 1.0
    grad = np.zeros_like(logits)
    grad[mask_idx] = probs / mask_idx.size
    return loss, grad


def accuracy(logits: np.ndarray, labels: np.ndarray, mask_idx) -> float:
    mask_idx = np.asarray(mask_idx, dtype=np.int64)
    pred = logits[mask_idx].argmax(axis=1)
    return float(np.mean(pred == np.asarray(labels)[mask_idx]))


def _glorot(rng: np.random.Generator, c: int, f: int, *lead) -> np.ndarray:
    limit = np.sqrt(6.0 / (c + f))
    return rng.uniform(-limit, limit, size=(*lead, c, f))


class TagcnLayer:
    """Polynomial filter layer: Y = sum_k (A^k X) W_k + 1 b^T."""

    kind = LayerKind.TAGCN

    def __init__(self, s: ShiftOperator, in_width: int, out_width: int,
                 filter_size: int, rng: np.random.Generator):
        self.s = s
        self.in_width = in_width
        self.out_width = out_width
        self.filter_size = filter_size
        coeffs = np.stack(
            [_glorot(rng, in_width, out_width) for _ in range(filter_size + 1)],
            axis=-1,
        )
        self.params = {"coeffs": coeffs, "bias": np.zeros(out_width)}
        self.grads = {}
        self._cache = None

    def filter_params(self) -> PolyFilterParams:
        return PolyFilterParams(self.params["coeffs"], self.params["bias"])

    def forward(self, X: np.ndarray) -> np.ndarray:
        if X.shape != (self.s.num_nodes, self.in_width):
            raise DimensionMismatchError(
                f"expected X of shape ({self.s.num_nodes}, {self.in_width})"
            )
        powers = propagate_powers(self.s, X, self.filter_size)
        Y = np.tile(self.params["bias"], (X.shape[0], 1))
        for k, Xk in enumerate(powers):
            # contiguous copy: the strided slice would round differently
            Y = Y + Xk @ np.ascontiguousarray(self.params["coeffs"][:, :, k])
        self._cache = powers
        return Y

    def backward(self, G: np.ndarray) -> np.ndarray:
        if self._cache is None or G.shape != (self.s.num_nodes, self.out_width):
            raise StaleStateError("backward called without a matching forward")
        powers = self._cache
        coeffs = self.params["coeffs"]
        d_coeffs = np.empty_like(coeffs)
        dX = np.zeros((self.s.num_nodes, self.in_width))
        at = self.s.transpose_matrix()
        z = G  # running (A^T)^k G
        for k in range(self.filter_size + 1):
            d_coeffs[:, :, k] = powers[k].T @ G
            dX += z @ coeffs[:, :, k].T
            if k < self.filter_size:
                z = at.dot(z)
        self.grads = {"coeffs": d_coeffs, "bias": G.sum(axis=0)}
        return dX


class GcnLayer:
    """Single-hop renormalized convolution: Y = Ahat X W."""

    kind = LayerKind.GCN

    def __init__(self, s_hat: ShiftOperator, in_width: int, out_width: int,
                 rng: np.random.Generator):
        if s_hat.kind is not ShiftKind.GCN_RENORMALIZED:
            raise WrongOperatorKindError("GcnLayer requires a renormalized operator")
        self.s = s_hat
        self.in_width = in_width
        self.out_width = out_width
        self.params = {"weight": _glorot(rng, in_width, out_width)}
        self.grads = {}
        self._cache = None

    def forward(self, X: np.ndarray) -> np.ndarray:
        if X.shape != (self.s.num_nodes, self.in_width):
            raise DimensionMismatchError("GCN layer input shape mismatch")
        ax = self.s.matrix.dot(X)
        self._cache = ax
        return ax @ self.params["weight"]

    def backward(self, G: np.ndarray) -> np.ndarray:
        if self._cache is None or G.shape[1] != self.out_width:
            raise StaleStateError("backward called without a matching forward")
        self.grads = {"weight": self._cache.T @ G}
        return self.s.transpose_matrix().dot(G @ self.params["weight"].T)


class ChebLayer:
    """Chebyshev baseline: Y = sum_k T_k(Lhat) X Theta_k."""

    kind = LayerKind.CHEB

    def __init__(self, L: ShiftOperator, in_width: int, out_width: int,
                 filter_size: int, rng: np.random.Generator,
                 lambda_max: float | None = None):
        if L.kind is not ShiftKind.LAPLACIAN:
            raise WrongOperatorKindError("ChebLayer requires a Laplacian operator")
        from .filters import power_iteration_lambda_max

        self.s = L
        self.in_width = in_width
        self.out_width = out_width
        self.filter_size = filter_size
        self.lambda_max = (power_iteration_lambda_max(L)
                           if lambda_max is None else float(lambda_max))
        self.params = {"theta": _glorot(rng, in_width, out_width, filter_size + 1)}
        self.grads = {}
        self._cache = None

    def _lhat(self, V: np.ndarray, transpose: bool = False) -> np.ndarray:
        m = self.s.transpose_matrix() if transpose else self.s.matrix
        return (2.0 / self.lambda_max) * m.dot(V) - V

    def forward(self, X: np.ndarray) -> np.ndarray:
        if X.shape != (self.s.num_nodes, self.in_width):
            raise DimensionMismatchError("Cheb layer input shape mismatch")
        terms = [X]
        if self.filter_size >= 1:
            terms.append(self._lhat(X))
        for _ in range(2, self.filter_size + 1):
            terms.append(2.0 * self._lhat(terms[-1]) - terms[-2])
        self._cache = terms
        theta = self.params["theta"]
        Y = np.zeros((X.shape[0], self.out_width))
        for k, Tk in enumerate(terms):
            Y += Tk @ theta[k]
        return Y

    def backward(self, G: np.ndarray) -> np.ndarray:
        if self._cache is None:
            raise StaleStateError("backward called without a matching forward")
        terms = self._cache
        theta = self.params["theta"]
        d_theta = np.stack([Tk.T @ G for Tk in terms])
        # dX = sum_k T_k(Lhat)^T (G theta_k^T), via the same recurrence on Lhat^T
        dX = G @ theta[0].T
        for k in range(1, len(terms)):
            dX += self._tk_transpose_apply(G @ theta[k].T, k)
        self.grads = {"theta": d_theta}
        return dX

    def _tk_transpose_apply(self, V: np.ndarray, k: int) -> np.ndarray:
        t_prev, t_cur = V, self._lhat(V, transpose=True)
        for _ in range(2, k + 1):
            t_prev, t_cur = t_cur, 2.0 * self._lhat(t_cur, transpose=True) - t_prev
        return t_cur


class DcnnLayer:
    """Diffusion baseline: Y[:, c] = gain[c] * (P^hops X)[:, c]."""

    kind = LayerKind.DCNN

    def __init__(self, p: ShiftOperator, width: int, hops: int):
        if p.kind is not ShiftKind.RANDOM_WALK:
            raise WrongOperatorKindError("DcnnLayer requires a random-walk operator")
        self.s = p
        self.in_width = width
        self.out_width = width
        self.hops = hops
        self.params = {"gain": np.ones(width)}
        self.grads = {}
        self._cache = None

    def forward(self, X: np.ndarray) -> np.ndarray:
        if X.shape != (self.s.num_nodes, self.in_width):
            raise DimensionMismatchError("DCNN layer input shape mismatch")
        Z = X
        for _ in range(self.hops):
            Z = self.s.matrix.dot(Z)
        self._cache = Z
        return Z * self.params["gain"]

    def backward(self, G: np.ndarray) -> np.ndarray:
        if self._cache is None:
            raise StaleStateError("backward called without a matching forward")
        self.grads = {"gain": (self._cache * G).sum(axis=0)}
        dX = G * self.params["gain"]
        pt = self.s.transpose_matrix()
        for _ in range(self.hops):
            dX = pt.dot(dX)
        return dX


def tagcn_forward(layer: TagcnLayer, X: np.ndarray) -> np.ndarray:
    return layer.forward(X)


def gcn_forward(layer: GcnLayer, X: np.ndarray) -> np.ndarray:
    return layer.forward(X)


def dcnn_forward(layer: DcnnLayer, X: np.ndarray) -> np.ndarray:
    return layer.forward(X)


class Model:
    """Ordered layer stack; ReLU + inverted dropout between hidden layers."""

    def __init__(self, layers, dropout_rate: float = 0.5):
        if not layers:
            raise EmptyListError("a model needs at least one layer")
        if not 0.0 <= dropout_rate < 1.0:
            raise InvalidRateError(f"dropout rate must be in [0, 1); got {dropout_rate}")
        for a, b in zip(layers, layers[1:]):
            if a.out_width != b.in_width:
                raise DimensionMismatchError(
                    f"layer widths do not chain: {a.out_width} -> {b.in_width}"
                )
        self.layers = list(layers)
        self.dropout_rate = dropout_rate
        self._state = None

    def forward(self, X: np.ndarray, mode: str = "eval",
                rng: np.random.Generator | None = None) -> np.ndarray:
        if mode not in ("train", "eval"):
            raise ValueError(f"mode must be 'train' or 'eval'; got {mode!r}")
        if mode == "train" and rng is None:
            raise ValueError("train mode needs an rng for dropout masks")
        relu_inputs = []
        dropout_masks = []
        H = X
        last = len(self.layers) - 1
        for i, layer in enumerate(self.layers):
            Y = layer.forward(H)
            if i == last:
                H = Y
                break
            relu_inputs.append(Y)
            H = relu(Y)
            if mode == "train" and self.dropout_rate > 0.0:
                H, mask = inverted_dropout(H, self.dropout_rate, rng)
            else:
                mask = None
            dropout_masks.append(mask)
        self._state = {"relu_inputs": relu_inputs, "dropout_masks": dropout_masks,
                       "in_shape": X.shape}
        return H

    def backward(self, loss_grad: np.ndarray) -> None:
        """Populate layer.grads from the gradient at the output logits."""
        if self._state is None:
            raise StaleStateError("backward called without a forward pass")
        st = self._state
        G = loss_grad
        for i in range(len(self.layers) - 1, -1, -1):
            G = self.layers[i].backward(G)
            if i > 0:
                mask = st["dropout_masks"][i - 1]
                if mask is not None:
                    G = G * mask / (1.0 - self.dropout_rate)
                G = G * (st["relu_inputs"][i - 1] > 0.0)

    def parameters(self):
        """Yield (layer_index, name, array) for every learnable block."""
        for i, layer in enumerate(self.layers):
            for name in sorted(layer.params):
                yield i, name, layer.params[name]

    def gradients(self):
        for i, layer in enumerate(self.layers):
            for name in sorted(layer.params):
                yield i, name, layer.grads[name]


def save_model(model: Model, path) -> None:
    """Checkpoint with architecture metadata and raw float64 arrays."""
    meta = {
        "version": CHECKPOINT_VERSION,
        "dropout_rate": model.dropout_rate,
        "layers": [
            {
                "kind": layer.kind.value,
                "in_width": layer.in_width,
                "out_width": layer.out_width,
                "filter_size": getattr(layer, "filter_size", None),
                "hops": getattr(layer, "hops", None),
                "lambda_max": getattr(layer, "lambda_max", None),
            }
            for layer in model.layers
        ],
    }
    arrays = {"__meta__": np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8)}
    for i, name, arr in model.parameters():
        arrays[f"layer{i}.{name}"] = arr
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_model(path, shift_by_kind) -> Model:
    """Rebuild a Model from a checkpoint.

    shift_by_kind maps LayerKind -> ShiftOperator so the caller supplies the
    graph; parameters are restored bit-exactly.
    """
    with np.load(path) as data:
        meta = json.loads(bytes(data["__meta__"]).decode())
        if meta["version"] != CHECKPOINT_VERSION:
            raise StaleStateError(f"unsupported checkpoint version {meta['version']}")
        rng = np.random.default_rng(0)  # placeholder init, overwritten below
        layers = []
        for spec in meta["layers"]:
            kind = LayerKind(spec["kind"])
            s = shift_by_kind[kind]
            if kind is LayerKind.TAGCN:
                layer = TagcnLayer(s, spec["in_width"], spec["out_width"],
                                   spec["filter_size"], rng)
            elif kind is LayerKind.GCN:
                layer = GcnLayer(s, spec["in_width"], spec["out_width"], rng)
            elif kind is LayerKind.CHEB:
                layer = ChebLayer(s, spec["in_width"], spec["out_width"],
                                  spec["filter_size"], rng,
                                  lambda_max=spec["lambda_max"])
            else:
                layer = DcnnLayer(s, spec["in_width"], spec["hops"])
            layers.append(layer)
        model = Model(layers, dropout_rate=meta["dropout_rate"])
        for i, name, arr in model.parameters():
            model.layers[i].params[name] = data[f"layer{i}.{name}"].copy()
    return model
