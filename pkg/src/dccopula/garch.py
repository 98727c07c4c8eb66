"""Univariate GARCH(1,1): filtering, quasi-likelihood, estimation, simulation.

Conventions: the first observation's conditional volatility is the initial
parameter (``sigma_1 = sigma0``) and the variance recursion
``sigma_t^2 = omega + alpha r_{t-1}^2 + beta sigma_{t-1}^2`` starts at t=2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from .errors import FitError, ParamError
from .optimize import logit, maximize, sigmoid

__all__ = [
    "GarchParams",
    "VolPath",
    "unconditional_sigma",
    "filter_variance",
    "ll_v",
    "fit_garch",
    "simulate_garch",
]

PERSISTENCE_MAX = 1.0 - 1e-6


@dataclass(frozen=True)
class GarchParams:
    """GARCH(1,1) parameters with the stationarity constraint alpha+beta < 1."""

    omega: float
    alpha: float
    beta: float
    sigma0: float

    def __post_init__(self):
        if not self.omega > 0.0:
            raise ParamError(f"omega must be positive, got {self.omega}")
        if self.alpha < 0.0 or self.beta < 0.0:
            raise ParamError("alpha and beta must be nonnegative")
        if not self.alpha + self.beta < 1.0:
            raise ParamError("alpha + beta must be strictly below 1")
        if not self.sigma0 > 0.0:
            raise ParamError(f"sigma0 must be positive, got {self.sigma0}")


@dataclass
class VolPath:
    """Conditional volatilities and the standardized residuals r_t / sigma_t."""

    sigma: np.ndarray
    xi: np.ndarray


def unconditional_sigma(p: GarchParams) -> float:
    """Stationary volatility sqrt(omega / (1 - alpha - beta))."""
    return float(np.sqrt(p.omega / (1.0 - p.alpha - p.beta)))


def _filter_var2(omega: float, alpha: float, beta: float, s20: float, r: np.ndarray) -> np.ndarray:
    # Linear IIR recursion s2[t] = (omega + alpha r[t-1]^2) + beta s2[t-1],
    # evaluated in C via lfilter; arithmetic matches the scalar loop bitwise.
    s2 = np.empty_like(r)
    s2[0] = s20
    if r.size > 1:
        drive = omega + alpha * r[:-1] * r[:-1]
        s2[1:] = signal.lfilter([1.0], [1.0, -beta], drive, zi=np.array([beta * s20]))[0]
    return s2


def filter_variance(p: GarchParams, r: np.ndarray) -> VolPath:
    """Run the variance recursion over a return series."""
    r = np.asarray(r, dtype=float)
    if r.size == 0:
        raise ParamError("return series is empty")
    s2 = _filter_var2(p.omega, p.alpha, p.beta, p.sigma0 * p.sigma0, r)
    sigma = np.sqrt(s2)
    return VolPath(sigma=sigma, xi=r / sigma)


def ll_v(p: GarchParams, r: np.ndarray) -> float:
    """Gaussian quasi-log-likelihood of the returns under the variance path."""
    r = np.asarray(r, dtype=float)
    s2 = _filter_var2(p.omega, p.alpha, p.beta, p.sigma0 * p.sigma0, r)
    return float(-0.5 * np.sum(np.log(2.0 * np.pi) + np.log(s2) + r * r / s2))


def _unpack(p: np.ndarray) -> tuple[float, float, float]:
    # log omega; persistence and its split mapped through logistics so that
    # alpha, beta >= 0 and alpha + beta <= 1 - 1e-6.
    omega = float(np.exp(np.clip(p[0], -700.0, 700.0)))
    persistence = PERSISTENCE_MAX * sigmoid(p[1])
    share = sigmoid(p[2])
    return omega, float(persistence * share), float(persistence * (1.0 - share))


def _pack(omega: float, alpha: float, beta: float) -> np.ndarray:
    persistence = min((alpha + beta) / PERSISTENCE_MAX, 1.0 - 1e-12)
    share = alpha / max(alpha + beta, 1e-12)
    return np.array([np.log(omega), logit(persistence), logit(np.clip(share, 1e-12, 1 - 1e-12))])


def fit_garch(
    r: np.ndarray,
    constrain_sigma0_to_unconditional: bool = True,
    maxiter: int = 2000,
) -> tuple[GarchParams, dict]:
    """Quasi-maximum-likelihood fit of GARCH(1,1).

    With the default constraint, ``sigma0`` is tied to the unconditional
    volatility of the candidate parameters; otherwise ``log sigma0^2`` joins
    the search.  Starting values: alpha=0.05, beta=0.90, omega matching the
    sample variance through the stationarity identity.
    """
    r = np.asarray(r, dtype=float)
    if r.size < 50:
        raise FitError(f"need at least 50 observations, got {r.size}")
    v = float(np.var(r))
    if not v > 0.0:
        raise FitError("return series has zero variance")

    a0, b0 = 0.05, 0.90
    x0 = _pack(v * (1.0 - a0 - b0), a0, b0)
    if not constrain_sigma0_to_unconditional:
        x0 = np.append(x0, np.log(v))

    def objective(p):
        omega, alpha, beta = _unpack(p)
        if constrain_sigma0_to_unconditional:
            s20 = omega / (1.0 - alpha - beta)
        else:
            s20 = float(np.exp(np.clip(p[3], -700.0, 700.0)))
        with np.errstate(all="ignore"):
            s2 = _filter_var2(omega, alpha, beta, s20, r)
            ll = -0.5 * np.sum(np.log(2.0 * np.pi) + np.log(s2) + r * r / s2)
        return ll

    res = maximize(objective, x0, maxiter=maxiter)
    if not res.converged:
        raise FitError(f"GARCH optimization failed: {res.message}")
    omega, alpha, beta = _unpack(res.x)
    if constrain_sigma0_to_unconditional:
        sigma0 = float(np.sqrt(omega / (1.0 - alpha - beta)))
    else:
        sigma0 = float(np.exp(0.5 * res.x[3]))
    params = GarchParams(omega=omega, alpha=alpha, beta=beta, sigma0=sigma0)
    report = {
        "ll": res.fun,
        "converged": res.converged,
        "iterations": res.nit,
        "nfev": res.nfev,
        "restarts": res.restarts,
        "message": res.message,
    }
    return params, report


def simulate_garch(
    p: GarchParams,
    T: int,
    residual_sampler=None,
    seed: int = 0,
) -> np.ndarray:
    """Generate returns r_t = sigma_t xi_t under the variance recursion.

    ``residual_sampler(rng, n)`` draws the innovations (standard normal by
    default).  The recursion arithmetic mirrors ``filter_variance`` exactly,
    so filtering a simulated series recovers the volatility path bitwise.
    """
    rng = np.random.default_rng(seed)
    if residual_sampler is None:
        xi = rng.standard_normal(T)
    else:
        xi = np.asarray(residual_sampler(rng, T), dtype=float)
    r = np.empty(T)
    s2 = p.sigma0 * p.sigma0
    for t in range(T):
        if t > 0:
            s2 = (p.omega + p.alpha * r[t - 1] * r[t - 1]) + p.beta * s2
        r[t] = np.sqrt(s2) * xi[t]
    return r
