"""Polynomial graph filters, the layer map, Chebyshev baseline, and spectral tools."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    NotDiagonalizableError,
    TooLargeError,
    WrongOperatorKindError,
)
from .graph import ShiftKind, ShiftOperator, make_cyclic_graph, spmv

__all__ = [
    "PolyFilterParams",
    "SpectralDecomposition",
    "apply_poly_filter",
    "layer_forward",
    "shift_invariance_residual",
    "chebyshev_apply",
    "spectral_decompose",
    "spectral_filter_response",
    "make_cyclic_graph",
    "count_filter_weights",
    "power_iteration_lambda_max",
]

MAX_EIG_NODES = 512


@dataclass
class PolyFilterParams:
    """Learnable polynomial filter coefficients for one layer.

    coeffs has shape (C, F, K+1): input feature c, output feature f,
    polynomial degree k.  bias has shape (F,).
    """

    coeffs: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.coeffs.ndim != 3:
            raise DimensionMismatchError("coeffs must have shape (C, F, K+1)")
        if self.bias.shape != (self.coeffs.shape[1],):
            raise DimensionMismatchError("bias length must equal output width F")
        if not (np.all(np.isfinite(self.coeffs)) and np.all(np.isfinite(self.bias))):
            raise DimensionMismatchError("filter parameters must be finite")

    @property
    def in_width(self) -> int:
        return self.coeffs.shape[0]

    @property
    def out_width(self) -> int:
        return self.coeffs.shape[1]

    @property
    def filter_size(self) -> int:
        return self.coeffs.shape[2] - 1


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigendecomposition A = right_vectors @ diag(eigenvalues) @ left_vectors.

    The rows of left_vectors are the graph Fourier transform; columns of
    right_vectors are the inverse transform.
    """

    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray


def propagate_powers(s: ShiftOperator, x: np.ndarray, k_max: int) -> list:
    """Return [x, Ax, A^2 x, ..., A^k_max x] via iterated products.

    Works for vectors and for N x C matrices; never materializes A^k.
    """
    out = [np.asarray(x, dtype=np.float64)]
    for _ in range(k_max):
        out.append(s.matrix.dot(out[-1]))
    return out


def apply_poly_filter(coeffs: np.ndarray, s: ShiftOperator, x: np.ndarray) -> np.ndarray:
    """Apply sum_k coeffs[k] * A^k x with a running shifted vector."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (s.num_nodes,):
        raise DimensionMismatchError("signal length must equal num_nodes")
    if coeffs.ndim != 1 or coeffs.size == 0:
        raise DimensionMismatchError("coeffs must be a nonempty vector")
    y = coeffs[0] * x
    z = x
    for k in range(1, coeffs.size):
        z = s.matrix.dot(z)
        y = y + coeffs[k] * z
    return y


def layer_forward(p: PolyFilterParams, s: ShiftOperator, X: np.ndarray) -> np.ndarray:
    """Full polynomial-filter layer: Y = sum_k (A^k X) W_k + 1 b^T.

    Column f of the output is sum_c sum_k g[c, f, k] A^k X[:, c] + b[f];
    the implementation regroups the same algebra as matrix products.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape != (s.num_nodes, p.in_width):
        raise DimensionMismatchError(
            f"X must have shape ({s.num_nodes}, {p.in_width}); got {X.shape}"
        )
    powers = propagate_powers(s, X, p.filter_size)
    Y = np.tile(p.bias, (s.num_nodes, 1))
    for k, Xk in enumerate(powers):
        # contiguous copy so the product rounds identically to a plain X @ W
        Y = Y + Xk @ np.ascontiguousarray(p.coeffs[:, :, k])
    return Y


def shift_invariance_residual(coeffs: np.ndarray, s: ShiftOperator, x: np.ndarray) -> float:
    """Max-norm of A(Gx) - G(Ax); zero for any polynomial filter G in A."""
    gx = apply_poly_filter(coeffs, s, x)
    ax = spmv(s, np.asarray(x, dtype=np.float64))
    return float(np.max(np.abs(s.matrix.dot(gx) - apply_poly_filter(coeffs, s, ax))))


def power_iteration_lambda_max(s: ShiftOperator, steps: int = 100, tol: float = 1e-8,
                               seed: int = 0) -> float:
    """Dominant eigenvalue magnitude by power iteration."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(s.num_nodes)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(steps):
        w = s.matrix.dot(v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v_new = w / nw
        lam_new = float(v_new @ s.matrix.dot(v_new))
        if abs(lam_new - lam) < tol:
            lam = lam_new
            break
        v, lam = v_new, lam_new
    return abs(lam)


def chebyshev_apply(theta: np.ndarray, L: ShiftOperator, x: np.ndarray,
                    lambda_max: float | None = None) -> np.ndarray:
    """Apply sum_k theta[k] T_k(Lhat) x, Lhat = (2/lambda_max) L - I.

    Uses the three-term recurrence T_k = 2 Lhat T_{k-1} - T_{k-2} with
    T_0 = I, T_1 = Lhat.
    """
    if L.kind is not ShiftKind.LAPLACIAN:
        raise WrongOperatorKindError("chebyshev_apply expects a Laplacian operator")
    theta = np.asarray(theta, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != L.num_nodes:
        raise DimensionMismatchError("signal length must equal num_nodes")
    if lambda_max is None:
        lambda_max = power_iteration_lambda_max(L)
    scale = 2.0 / lambda_max

    def lhat(v):
        return scale * L.matrix.dot(v) - v

    t_prev = x
    y = theta[0] * t_prev
    if theta.size == 1:
        return y
    t_cur = lhat(x)
    y = y + theta[1] * t_cur
    for k in range(2, theta.size):
        t_next = 2.0 * lhat(t_cur) - t_prev
        t_prev, t_cur = t_cur, t_next
        y = y + theta[k] * t_cur
    return y


def spectral_decompose(s: ShiftOperator, tol: float = 1e-6) -> SpectralDecomposition:
    """Dense eigendecomposition defining the graph Fourier transform.

    Rejects matrices whose eigenvector reconstruction residual exceeds tol
    (defective or near-defective shifts) rather than falling back to a
    Jordan form.
    """
    if s.num_nodes > MAX_EIG_NODES:
        raise TooLargeError(f"dense eigensolve limited to {MAX_EIG_NODES} nodes")
    a = s.to_dense()
    eigvals, right = np.linalg.eig(a)
    try:
        left = np.linalg.inv(right)
    except np.linalg.LinAlgError as exc:
        raise NotDiagonalizableError("eigenvector matrix is singular") from exc
    recon = right @ np.diag(eigvals) @ left
    residual = float(np.max(np.abs(recon - a)))
    if residual > tol:
        raise NotDiagonalizableError(
            f"reconstruction residual {residual:.3e} exceeds {tol:.1e}"
        )
    return SpectralDecomposition(eigenvalues=eigvals, right_vectors=right,
                                 left_vectors=left)


def spectral_filter_response(coeffs: np.ndarray, d: SpectralDecomposition) -> np.ndarray:
    """Filter spectrum h(lambda_i) = sum_k coeffs[k] lambda_i^k."""
    coeffs = np.asarray(coeffs)
    lam = d.eigenvalues
    resp = np.zeros_like(lam)
    p = np.ones_like(lam)
    for g in coeffs:
        resp = resp + g * p
        p = p * lam
    return resp


def count_filter_weights(p: PolyFilterParams, convention: str = "full") -> int:
    """Learnable-parameter count of a polynomial filter layer.

    convention="full": C*F*(K+1) + F (every coefficient plus bias).
    convention="reported": filter weights excluding the k=0 term and bias,
    i.e. K*C*F; for K=2 this is the 2*C*F accounting used when comparing
    against single-weight-block convolutions (which count C*F).
    """
    c, f, k1 = p.coeffs.shape
    if convention == "full":
        return c * f * k1 + f
    if convention == "reported":
        return c * f * (k1 - 1)
    raise ValueError(f"unknown convention {convention!r}")
