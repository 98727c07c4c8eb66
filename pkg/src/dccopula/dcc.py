"""Dynamic conditional correlation: Q/R filtering, quasi-likelihood, fitting.

The Q recursion uses the innovation observed before time t,
``Q_t = (1 - a - b) Qbar + a xi_{t-1} xi_{t-1}' + b Q_{t-1}`` with
``Q_1 = Q0``, which makes R_t measurable with respect to the information
available at t-1.  The quasi-likelihood uses the inverse correlation in the
quadratic form (the standard DCC objective).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .copulas import validate_corr_matrix
from .decomp import DecompMethod, decompose, decompose_path
from .errors import FitError, MatrixError, ParamError
from .optimize import logit, maximize, sigmoid

__all__ = [
    "DccParams",
    "CorrPath",
    "filter_dcc",
    "ll_c",
    "fit_dcc",
    "dcc_residuals",
    "simulate_dcc",
]

PERSISTENCE_MAX = 1.0 - 1e-6


@dataclass(frozen=True)
class DccParams:
    """Correlation-dynamics parameters (a, b) plus the unconditional matrix."""

    a: float
    b: float
    q_bar: np.ndarray
    q0: np.ndarray = None

    def __post_init__(self):
        if self.a < 0.0 or self.b < 0.0:
            raise ParamError("a and b must be nonnegative")
        if not self.a + self.b < 1.0:
            raise ParamError("a + b must be strictly below 1")
        object.__setattr__(self, "q_bar", validate_corr_matrix(self.q_bar, "q_bar"))
        q0 = self.q_bar if self.q0 is None else validate_corr_matrix(self.q0, "q0")
        object.__setattr__(self, "q0", q0)


@dataclass
class CorrPath:
    """Stacked Q_t and normalized correlation matrices R_t, shape (T, N, N)."""

    q: np.ndarray
    r: np.ndarray


def _q_step(a: float, b: float, q_bar_term: np.ndarray, xi_prev: np.ndarray, q_prev: np.ndarray):
    # Shared by the filter and the simulator so round trips are bitwise exact.
    return q_bar_term + a * np.outer(xi_prev, xi_prev) + b * q_prev


def _normalize(q: np.ndarray) -> np.ndarray:
    d = np.sqrt(np.diag(q))
    return q / np.outer(d, d)


def filter_dcc(p: DccParams, xi: np.ndarray) -> CorrPath:
    """Run the Q recursion over standardized residuals (T, N)."""
    xi = np.asarray(xi, dtype=float)
    if xi.ndim != 2:
        raise ParamError("xi must be a T x N matrix")
    if not np.all(np.isfinite(xi)):
        raise ParamError("xi contains non-finite values")
    T, N = xi.shape
    q_bar_term = (1.0 - p.a - p.b) * p.q_bar
    q = np.empty((T, N, N))
    q[0] = p.q0
    for t in range(1, T):
        q[t] = _q_step(p.a, p.b, q_bar_term, xi[t - 1], q[t - 1])
    d = np.sqrt(np.einsum("tii->ti", q))
    r = q / (d[:, :, None] * d[:, None, :])
    return CorrPath(q=q, r=r)


def ll_c(p: DccParams, xi: np.ndarray) -> float:
    """Correlation part of the quasi-log-likelihood of the residuals."""
    xi = np.asarray(xi, dtype=float)
    path = filter_dcc(p, xi)
    r = path.r
    try:
        chol = np.linalg.cholesky(r)
    except np.linalg.LinAlgError as exc:
        raise MatrixError("singular correlation matrix in the filtered path") from exc
    logdet = 2.0 * np.sum(np.log(np.einsum("tii->ti", chol)), axis=1)
    solved = np.linalg.solve(r, xi[:, :, None])[:, :, 0]
    quad = np.einsum("ti,ti->t", xi, solved)
    own = np.einsum("ti,ti->t", xi, xi)
    return float(-0.5 * np.sum(logdet + quad - own))


def fit_dcc(xi: np.ndarray, maxiter: int = 2000) -> tuple[DccParams, dict]:
    """Estimate (a, b) with correlation targeting.

    Qbar is fixed at the sample correlation of the residuals and Q0 = Qbar;
    only (a, b) are searched, under a, b >= 0 and a + b <= 1 - 1e-6.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.ndim != 2 or xi.shape[0] < 100:
        raise FitError("need a T x N residual matrix with T >= 100")
    q_bar = np.corrcoef(xi.T)
    q_bar = validate_corr_matrix(0.5 * (q_bar + q_bar.T), "sample correlation")

    def unpack(p):
        persistence = PERSISTENCE_MAX * sigmoid(p[0])
        share = sigmoid(p[1])
        return float(persistence * share), float(persistence * (1.0 - share))

    def objective(p):
        a, b = unpack(p)
        with np.errstate(all="ignore"):
            try:
                return ll_c(DccParams(a=a, b=b, q_bar=q_bar), xi)
            except (MatrixError, np.linalg.LinAlgError):
                return -np.inf

    a0, b0 = 0.03, 0.90
    x0 = np.array([logit((a0 + b0) / PERSISTENCE_MAX), logit(a0 / (a0 + b0))])
    res = maximize(objective, x0, maxiter=maxiter)
    if not res.converged:
        raise FitError(f"DCC optimization failed: {res.message}")
    a, b = unpack(res.x)
    params = DccParams(a=a, b=b, q_bar=q_bar)
    report = {
        "ll": res.fun,
        "converged": res.converged,
        "iterations": res.nit,
        "nfev": res.nfev,
        "restarts": res.restarts,
        "message": res.message,
    }
    return params, report


def dcc_residuals(path: CorrPath, xi: np.ndarray, method: DecompMethod) -> np.ndarray:
    """Backsolve eps_t from xi_t = Xi(R_t) eps_t for the chosen decomposition."""
    xi = np.asarray(xi, dtype=float)
    factors = decompose_path(method, path.r)
    try:
        eps = np.linalg.solve(factors, xi[:, :, None])[:, :, 0]
    except np.linalg.LinAlgError as exc:
        raise MatrixError("singular decomposition factor") from exc
    return eps


def simulate_dcc(
    p: DccParams,
    T: int,
    eps_sampler=None,
    method: DecompMethod | None = None,
    seed: int = 0,
) -> np.ndarray:
    """Generate xi_t = Xi(R_t) eps_t with the Q recursion driven by its own output.

    ``eps_sampler(rng, (T, N))`` draws the uncorrelated innovations (standard
    normal by default).  The recursion arithmetic matches ``filter_dcc`` so a
    filtering round trip reproduces the Q path exactly.
    """
    N = p.q_bar.shape[0]
    method = method if method is not None else DecompMethod("sqrt")
    rng = np.random.default_rng(seed)
    if eps_sampler is None:
        eps = rng.standard_normal((T, N))
    else:
        eps = np.asarray(eps_sampler(rng, (T, N)), dtype=float)
    q_bar_term = (1.0 - p.a - p.b) * p.q_bar
    xi = np.empty((T, N))
    q = p.q0.copy()
    state = None
    for t in range(T):
        if t > 0:
            q = _q_step(p.a, p.b, q_bar_term, xi[t - 1], q)
        r = _normalize(q)
        sigma_t = method.sigma[t] if method.sigma is not None else None
        factor, state = decompose(method, r, state=state, sigma=sigma_t)
        xi[t] = factor @ eps[t]
    return xi
