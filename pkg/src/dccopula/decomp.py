"""Correlation-matrix factorizations Xi with Xi Xi' = R.

Five constructions: the symmetric matrix square root (sqrt), the Cholesky
factor (cholesky), a sign-stabilized eigenvalue factor (eigen), and the two
covariance-based variants (sqrt2, eigen2) that factor
H = diag(sigma) R diag(sigma) and rescale by diag(sigma)^-1.

The eigen factor orders eigenvector columns by descending eigenvalue and
picks each column's sign to minimize the summed squared angles to the
previous ``tau`` periods' signed eigenvectors, so the factor varies smoothly
along a time series of correlation matrices.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, MatrixError, ParamError

__all__ = [
    "METHODS",
    "DecompMethod",
    "EigenSortState",
    "angle",
    "eigen_sort_step",
    "decompose",
    "decompose_path",
]

METHODS = ("sqrt", "sqrt2", "cholesky", "eigen", "eigen2")


@dataclass(frozen=True)
class DecompMethod:
    """Decomposition choice; ``sigma`` is the (T, N) volatility path that the
    covariance-based variants require."""

    tag: str
    tau: int = 50
    sigma: np.ndarray | None = None

    def __post_init__(self):
        if self.tag not in METHODS:
            raise ParamError(f"unknown decomposition {self.tag!r}; choose from {METHODS}")
        if self.tau < 1:
            raise ParamError("tau must be at least 1")
        if self.sigma is not None:
            sigma = np.asarray(self.sigma, dtype=float)
            if np.any(sigma <= 0.0):
                raise ParamError("volatilities must be positive")
            object.__setattr__(self, "sigma", sigma)

    @property
    def needs_sigma(self) -> bool:
        return self.tag in ("sqrt2", "eigen2")

    @property
    def stateful(self) -> bool:
        return self.tag in ("eigen", "eigen2")


@dataclass
class EigenSortState:
    """Ring buffer of the last ``tau`` signed, ordered eigenvector matrices."""

    tau: int
    history: deque = field(default_factory=deque)

    def __post_init__(self):
        self.history = deque(self.history, maxlen=self.tau)


def angle(u: np.ndarray, v: np.ndarray) -> float:
    """Angle in [0, pi] between two nonzero vectors."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise DomainError("angle is undefined for the zero vector")
    return float(np.arccos(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0)))


def _canonical_sign(col: np.ndarray) -> np.ndarray:
    # Base-case sign rule: make the largest-magnitude entry positive (first
    # such index on ties).
    i = int(np.argmax(np.abs(col)))
    return -col if col[i] < 0.0 else col


def _order_indices(eigvals: np.ndarray, eigvecs: np.ndarray) -> list[int]:
    # Descending eigenvalue; exact ties fall back to comparing the
    # sign-canonicalized column entries (largest first, so the identity
    # matrix keeps its natural column order) and ignore sign flips.
    return sorted(
        range(eigvals.size),
        key=lambda i: (-eigvals[i], tuple(-_canonical_sign(eigvecs[:, i]))),
    )


def _ensure_orthonormal(V: np.ndarray) -> np.ndarray:
    if np.max(np.abs(V.T @ V - np.eye(V.shape[0]))) <= 1e-10:
        return V
    # Modified Gram-Schmidt repair pass.
    Q = V.astype(float).copy()
    for j in range(Q.shape[1]):
        for k in range(j):
            Q[:, j] -= np.dot(Q[:, k], Q[:, j]) * Q[:, k]
        norm = np.linalg.norm(Q[:, j])
        if norm == 0.0:
            raise MatrixError("eigenvector matrix is rank deficient")
        Q[:, j] /= norm
    return Q


def eigen_sort_step(
    eigvecs: np.ndarray,
    eigvals: np.ndarray,
    state: EigenSortState | None,
    tau: int = 50,
) -> tuple[np.ndarray, EigenSortState]:
    """Order columns by descending eigenvalue and resolve their signs.

    With no history the largest-magnitude entry of each column is made
    positive.  Otherwise each column independently takes the sign whose
    summed squared angles to the stored signed columns is smaller; exact
    ties resolve to +1.  The chosen matrix is appended to the state.
    """
    eigvecs = np.asarray(eigvecs, dtype=float)
    eigvals = np.asarray(eigvals, dtype=float)
    V = _ensure_orthonormal(eigvecs)
    order = _order_indices(eigvals, V)
    V = V[:, order]
    if state is None:
        state = EigenSortState(tau=tau)
    out = np.empty_like(V)
    n = V.shape[1]
    if not state.history:
        for i in range(n):
            out[:, i] = _canonical_sign(V[:, i])
    else:
        past = np.stack(state.history)  # (k, N, N)
        for i in range(n):
            dots = np.clip(past[:, :, i] @ V[:, i], -1.0, 1.0)
            plus = np.sum(np.arccos(dots) ** 2)
            minus = np.sum(np.arccos(-dots) ** 2)
            out[:, i] = V[:, i] if plus <= minus else -V[:, i]
    state.history.append(out.copy())
    return out, state


def _spd_eigh(R: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    vals, vecs = np.linalg.eigh(np.asarray(R, dtype=float))
    if np.min(vals) <= 0.0:
        raise MatrixError("matrix is not positive definite")
    return vals, vecs


def _sqrt_factor(A: np.ndarray) -> np.ndarray:
    vals, vecs = _spd_eigh(A)
    return (vecs * np.sqrt(vals)) @ vecs.T


def _chol_factor(A: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(np.asarray(A, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise MatrixError("matrix is not positive definite") from exc


def _eigen_factor(
    A: np.ndarray, state: EigenSortState | None, tau: int
) -> tuple[np.ndarray, EigenSortState]:
    vals, vecs = _spd_eigh(A)
    signed, state = eigen_sort_step(vecs, vals, state, tau)
    order = _order_indices(vals, vecs)
    return signed * np.sqrt(vals[order]), state


def decompose(
    method: DecompMethod,
    R: np.ndarray,
    state: EigenSortState | None = None,
    sigma: np.ndarray | None = None,
) -> tuple[np.ndarray, EigenSortState | None]:
    """Factor one correlation matrix; returns (Xi, updated sort state).

    ``sigma`` is the volatility vector for this time step and is required by
    the covariance-based variants.  The state argument is meaningful only
    for the eigen variants and is passed through untouched otherwise.
    """
    R = np.asarray(R, dtype=float)
    if method.needs_sigma:
        if sigma is None:
            raise ParamError(f"{method.tag} requires per-time volatilities")
        sigma = np.asarray(sigma, dtype=float)
        if np.any(sigma <= 0.0):
            raise ParamError("volatilities must be positive")
        H = R * np.outer(sigma, sigma)
        if method.tag == "sqrt2":
            return _sqrt_factor(H) / sigma[:, None], state
        factor, state = _eigen_factor(H, state, method.tau)
        return factor / sigma[:, None], state
    if method.tag == "sqrt":
        return _sqrt_factor(R), state
    if method.tag == "cholesky":
        return _chol_factor(R), state
    return _eigen_factor(R, state, method.tau)


def decompose_path(method: DecompMethod, r_path: np.ndarray) -> np.ndarray:
    """Factor a (T, N, N) correlation path, threading the eigen sort state."""
    r_path = np.asarray(r_path, dtype=float)
    T = r_path.shape[0]
    if method.needs_sigma:
        if method.sigma is None:
            raise ParamError(f"{method.tag} requires the volatility path on the method")
        if method.sigma.shape[0] != T:
            raise ParamError("volatility path length does not match the correlation path")
    out = np.empty_like(r_path)
    state = EigenSortState(tau=method.tau) if method.stateful else None
    for t in range(T):
        sigma_t = method.sigma[t] if method.needs_sigma else None
        out[t], state = decompose(method, r_path[t], state=state, sigma=sigma_t)
    return out
