"""Evaluation metrics: cokurtosis, windowed return log-likelihoods,
information criteria, and the correlation inclusion test."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dcc import DccParams, filter_dcc
from .decomp import DecompMethod, decompose_path
from .errors import EvalError, StatError
from .garch import GarchParams, filter_variance
from .market_data import CorrInterval
from .residual_fit import ResidualModel, model_correlation

__all__ = [
    "EvalReport",
    "GaussianResidual",
    "cokurtosis22",
    "information_criteria",
    "returns_loglik",
    "correlation_test",
]


@dataclass
class EvalReport:
    """Summary row for one (decomposition, distribution) combination."""

    method: str
    menu_item: str
    aic: float
    bic: float
    llis: float
    lloos: float
    corr_test: str
    addin_used: bool
    cokurtosis: dict = field(default_factory=dict)


class GaussianResidual:
    """Independent standard normal joint density (QMLE baseline residual)."""

    def logdensity_rows(self, x: np.ndarray) -> tuple[np.ndarray, int]:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        n = x.shape[1]
        return -0.5 * (n * np.log(2.0 * np.pi) + np.einsum("ti,ti->t", x, x)), 0


def cokurtosis22(x: np.ndarray, y: np.ndarray) -> float:
    """2-2 cross kurtosis E[(X-mX)^2 (Y-mY)^2] / (Var X Var Y); equals 1 for
    independent variables and the Pearson kurtosis when x is y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size or x.size < 4:
        raise StatError("need two equal-length series with at least 4 observations")
    xc = x - x.mean()
    yc = y - y.mean()
    vx = np.mean(xc * xc)
    vy = np.mean(yc * yc)
    if vx == 0.0 or vy == 0.0:
        raise StatError("zero variance series")
    return float(np.mean(xc * xc * yc * yc) / (vx * vy))


def information_criteria(ll: float, k: int, n: int) -> tuple[float, float]:
    """AIC = -2 ll + 2k and BIC = -2 ll + k log n."""
    if n < 1:
        raise StatError("n must be at least 1")
    return -2.0 * ll + 2.0 * k, -2.0 * ll + k * np.log(n)


def _with_sigma(method: DecompMethod, sigma: np.ndarray) -> DecompMethod:
    if not method.needs_sigma:
        return method
    return DecompMethod(tag=method.tag, tau=method.tau, sigma=sigma)


def returns_loglik(
    garch: list[GarchParams],
    dcc: DccParams | None,
    method: DecompMethod | None,
    residual,
    returns: np.ndarray,
    split_index: int,
    window: str = "in",
) -> float:
    """Average per-observation log-likelihood of the returns over a window.

    Volatility and correlation recursions run over the full sample with fixed
    parameters, so the out-of-sample window continues from the in-sample
    terminal state (including the eigen-sort history).  With a correlation
    model the density is evaluated on the decomposed residuals with the
    factor determinant and volatility change-of-variables terms; without one
    (the static copula-GARCH case) on the standardized residuals directly.
    ``residual`` is any object exposing ``logdensity_rows``.
    """
    returns = np.asarray(returns, dtype=float)
    T, N = returns.shape
    if len(garch) != N:
        raise EvalError(f"need {N} per-asset parameter sets, got {len(garch)}")
    if window not in ("in", "out"):
        raise EvalError("window must be 'in' or 'out'")
    if not 0 <= split_index <= T:
        raise EvalError("split index outside the sample")

    sigma = np.empty((T, N))
    for i in range(N):
        sigma[:, i] = filter_variance(garch[i], returns[:, i]).sigma
    xi = returns / sigma
    log_sigma = np.sum(np.log(sigma), axis=1)

    if dcc is None:
        vals, _ = residual.logdensity_rows(xi)
        per_obs = vals - log_sigma
    else:
        if method is None:
            raise EvalError("a decomposition method is required with a correlation model")
        path = filter_dcc(dcc, xi)
        factors = decompose_path(_with_sigma(method, sigma), path.r)
        eps = np.linalg.solve(factors, xi[:, :, None])[:, :, 0]
        sign, logabsdet = np.linalg.slogdet(factors)
        if np.any(sign <= 0.0):
            t_bad = int(np.argmax(sign <= 0.0))
            raise EvalError(f"non-positive factor determinant at t={t_bad}")
        vals, _ = residual.logdensity_rows(eps)
        per_obs = vals - logabsdet - log_sigma

    rows = per_obs[:split_index] if window == "in" else per_obs[split_index:]
    if rows.size == 0:
        raise EvalError(f"empty {window!r} window")
    if not np.all(np.isfinite(rows)):
        offset = 0 if window == "in" else split_index
        t_bad = int(np.argmax(~np.isfinite(rows))) + offset
        raise EvalError(f"non-finite log-likelihood at t={t_bad}")
    return float(np.mean(rows))


def correlation_test(model: ResidualModel, intervals: dict) -> str:
    """'T' when every off-diagonal model correlation lies inside the matching
    bootstrap interval, else 'F'.  ``intervals`` maps pairs (i, j), i < j, to
    ``CorrInterval`` objects."""
    corr = model_correlation(model)
    n = corr.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            interval: CorrInterval = intervals[(i, j)]
            if not interval.contains(corr[i, j]):
                return "F"
    return "T"
