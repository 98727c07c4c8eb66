import datetime as dt

import numpy as np
import pytest

from dccopula import DccParams, GarchParams, simulate_dcc


def random_corr(rng, n, ridge=0.5):
    """Well-conditioned random correlation matrix."""
    A = rng.standard_normal((n, n))
    S = A @ A.T + ridge * n * np.eye(n)
    d = np.sqrt(np.diag(S))
    return S / np.outer(d, d)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


GROUP_QBAR = np.array(
    [[1.0, 0.5532, 0.4017], [0.5532, 1.0, 0.2397], [0.4017, 0.2397, 1.0]]
)


def synthetic_returns(T, seed, qbar=None, a=0.03, b=0.88):
    """Three-asset returns from a correlation-dynamics GARCH process."""
    qbar = GROUP_QBAR if qbar is None else qbar
    dcc = DccParams(a=a, b=b, q_bar=qbar)
    xi = simulate_dcc(dcc, T, seed=seed)
    garch = [
        GarchParams(omega=1e-6, alpha=0.05, beta=0.90, sigma0=np.sqrt(1e-6 / 0.05)),
        GarchParams(omega=4e-6, alpha=0.13, beta=0.73, sigma0=np.sqrt(4e-6 / 0.14)),
        GarchParams(omega=2e-6, alpha=0.11, beta=0.76, sigma0=np.sqrt(2e-6 / 0.13)),
    ]
    r = np.empty((T, 3))
    for i in range(3):
        s2 = garch[i].sigma0 ** 2
        for t in range(T):
            if t > 0:
                s2 = garch[i].omega + garch[i].alpha * r[t - 1, i] ** 2 + garch[i].beta * s2
            r[t, i] = np.sqrt(s2) * xi[t, i]
    return r


def write_rates_csv(path, returns, start=dt.date(2019, 1, 1), assets=("AAA", "BBB", "CCC")):
    """Materialize a rate file whose log returns equal ``returns``."""
    T, n = returns.shape
    levels = np.exp(np.vstack([np.zeros(n), np.cumsum(returns, axis=0)]))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("date," + ",".join(assets[:n]) + "\n")
        for k in range(T + 1):
            date = start + dt.timedelta(days=k)
            fh.write(",".join([date.isoformat()] + [repr(float(v)) for v in levels[k]]) + "\n")
    return start + dt.timedelta(days=1), start + dt.timedelta(days=T)
