"""Shared derivative-free optimization helpers.

Estimation routines maximize reparameterized likelihoods with Nelder-Mead.
Box constraints are removed by smooth maps (log, logistic, tanh), and the
simplex search restarts from its own solution until the objective stops
improving, which guards against premature collapse of the simplex.
Everything is deterministic given the starting point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize as sciopt

__all__ = [
    "OptResult",
    "maximize",
    "sigmoid",
    "logit",
    "bounded_tanh",
    "bounded_atanh",
]

PENALTY = 1e12


@dataclass
class OptResult:
    x: np.ndarray
    fun: float  # maximized objective value
    nit: int
    nfev: int
    restarts: int
    converged: bool
    message: str


def maximize(
    objective,
    x0,
    maxiter: int = 2000,
    xatol: float = 1e-8,
    fatol: float = 1e-10,
    restarts: int = 5,
    rel_tol: float = 1e-10,
) -> OptResult:
    """Nelder-Mead maximization with deterministic restart polishing.

    ``objective`` returns the value to maximize; non-finite values are
    treated as a large penalty so the simplex backs away from bad regions.
    """
    x0 = np.asarray(x0, dtype=float)

    def neg(p):
        v = objective(p)
        return -v if np.isfinite(v) else PENALTY

    best = None
    nit = nfev = 0
    used_restarts = 0
    prev = np.inf
    start = x0
    for i in range(max(1, restarts)):
        res = sciopt.minimize(
            neg,
            start,
            method="Nelder-Mead",
            options={"maxiter": maxiter, "xatol": xatol, "fatol": fatol},
        )
        nit += res.nit
        nfev += res.nfev
        if best is None or res.fun < best.fun:
            best = res
        improvement = prev - res.fun
        # A restart only pays off when the previous run stalled: stop once a
        # converged run fails to improve materially on its predecessor.
        if improvement < rel_tol * max(1.0, abs(res.fun)):
            break
        if res.success and improvement < max(100.0 * fatol, rel_tol * max(1.0, abs(res.fun))):
            break
        prev = res.fun
        start = res.x
        used_restarts = i
    converged = bool(best.fun < PENALTY / 2)
    return OptResult(
        x=np.asarray(best.x, dtype=float),
        fun=-best.fun,
        nit=nit,
        nfev=nfev,
        restarts=used_restarts,
        converged=converged,
        message=str(best.message),
    )


def sigmoid(p):
    return 1.0 / (1.0 + np.exp(-np.asarray(p, dtype=float)))


def logit(x):
    x = np.asarray(x, dtype=float)
    return np.log(x) - np.log1p(-x)


def bounded_tanh(p, bound: float = 1.0 - 1e-6):
    """Map the real line onto (-bound, bound)."""
    return bound * np.tanh(np.asarray(p, dtype=float))


def bounded_atanh(x, bound: float = 1.0 - 1e-6):
    return np.arctanh(np.clip(np.asarray(x, dtype=float) / bound, -1.0 + 1e-12, 1.0 - 1e-12))
