import numpy as np
import pytest
from scipy import stats

from dccopula import (
    CorrInterval,
    DccParams,
    DecompMethod,
    GarchParams,
    GaussianNd,
    GaussianResidual,
    ResidualModel,
    SkewTParams,
    cokurtosis22,
    correlation_test,
    information_criteria,
    returns_loglik,
    simulate_dcc,
)
from dccopula.decomp import METHODS
from dccopula.errors import EvalError, StatError
from tests.conftest import GROUP_QBAR


def test_cokurtosis_hand_value():
    x = np.array([1.0, -1.0, 1.0, -1.0])
    y = np.array([1.0, 1.0, -1.0, -1.0])
    assert cokurtosis22(x, y) == pytest.approx(1.0, abs=1e-15)


def test_cokurtosis_independent_benchmark():
    rng = np.random.default_rng(1)
    x, y = rng.standard_normal((2, 1000000))
    assert cokurtosis22(x, y) == pytest.approx(1.0, abs=0.02)


def test_cokurtosis_isserlis():
    rng = np.random.default_rng(2)
    x = rng.standard_normal(1000000)
    y = 0.5 * x + np.sqrt(0.75) * rng.standard_normal(1000000)
    assert cokurtosis22(x, y) == pytest.approx(1.5, abs=0.05)


def test_cokurtosis_self_is_pearson_kurtosis(rng):
    x = rng.standard_normal(5000)
    assert cokurtosis22(x, x) == pytest.approx(
        float(stats.kurtosis(x, fisher=False, bias=True)), abs=1e-12
    )


def test_cokurtosis_validation():
    with pytest.raises(StatError):
        cokurtosis22(np.ones(10), np.arange(10.0))
    with pytest.raises(StatError):
        cokurtosis22(np.arange(3.0), np.arange(3.0))


def test_information_criteria():
    aic, bic = information_criteria(10.0, 3, 100)
    assert aic == -14.0
    assert bic == pytest.approx(-20.0 + 3.0 * np.log(100.0), abs=1e-12)
    aic0, bic0 = information_criteria(7.0, 0, 50)
    assert aic0 == bic0 == -14.0


def test_returns_loglik_unit_variance_case():
    garch = [GarchParams(omega=1.0, alpha=0.0, beta=0.0, sigma0=1.0)]
    r = np.zeros((5, 1))
    value = returns_loglik(garch, None, None, GaussianResidual(), r, split_index=5, window="in")
    assert value == pytest.approx(-0.5 * np.log(2.0 * np.pi), abs=1e-12)


def test_returns_loglik_windows_are_disjoint(rng):
    garch = [GarchParams(omega=1e-4, alpha=0.05, beta=0.9, sigma0=0.01) for _ in range(3)]
    r = rng.standard_normal((200, 3)) * 0.01
    dcc = DccParams(a=0.02, b=0.9, q_bar=GROUP_QBAR)
    args = (garch, dcc, DecompMethod("sqrt"), GaussianResidual(), r)
    llis = returns_loglik(*args, split_index=150, window="in")
    lloos = returns_loglik(*args, split_index=150, window="out")
    # Out-of-sample rows do not affect the in-sample value.
    r2 = r.copy()
    r2[150:] = r2[150:][::-1]
    assert returns_loglik(garch, dcc, DecompMethod("sqrt"), GaussianResidual(), r2,
                          split_index=150, window="in") == pytest.approx(llis, abs=1e-12)
    assert llis != lloos


def test_returns_loglik_gaussian_invariant_across_methods():
    dcc = DccParams(a=0.04, b=0.9, q_bar=GROUP_QBAR)
    xi = simulate_dcc(dcc, 300, seed=4)
    garch = [
        GarchParams(omega=1e-6, alpha=0.05, beta=0.9, sigma0=np.sqrt(1e-6 / 0.05)),
        GarchParams(omega=2e-6, alpha=0.08, beta=0.85, sigma0=np.sqrt(2e-6 / 0.07)),
        GarchParams(omega=3e-6, alpha=0.10, beta=0.80, sigma0=np.sqrt(3e-6 / 0.10)),
    ]
    r = np.empty((300, 3))
    for i in range(3):
        s2 = garch[i].sigma0 ** 2
        for t in range(300):
            if t > 0:
                s2 = garch[i].omega + garch[i].alpha * r[t - 1, i] ** 2 + garch[i].beta * s2
            r[t, i] = np.sqrt(s2) * xi[t, i]
    values = [
        returns_loglik(garch, dcc, DecompMethod(tag), GaussianResidual(), r, 250, "in")
        for tag in METHODS
    ]
    assert max(values) - min(values) < 1e-8


def test_returns_loglik_near_gaussian_surrogate_invariance():
    # Symmetric skew-t marginals with enormous degrees of freedom behave like
    # the normal for the cross-method comparison, at a looser tolerance.
    dcc = DccParams(a=0.03, b=0.9, q_bar=GROUP_QBAR)
    xi = simulate_dcc(dcc, 150, seed=9)
    r = xi * 0.01
    garch = [GarchParams(omega=1e-4, alpha=0.0, beta=0.0, sigma0=0.01)] * 3
    model = ResidualModel(
        marginals=(SkewTParams(1e7, 1.0),) * 3, copula=GaussianNd(np.eye(3))
    )
    values = [
        returns_loglik(garch, dcc, DecompMethod(tag), model, r, 120, "in")
        for tag in METHODS
    ]
    assert max(values) - min(values) < 1e-6


def test_returns_loglik_validation(rng):
    garch = [GarchParams(omega=1e-4, alpha=0.0, beta=0.0, sigma0=0.01)]
    r = rng.standard_normal((10, 1)) * 0.01
    with pytest.raises(EvalError):
        returns_loglik(garch, None, None, GaussianResidual(), r, split_index=10, window="out")
    with pytest.raises(EvalError):
        returns_loglik(garch, None, None, GaussianResidual(), r, split_index=5, window="sideways")
    dcc = DccParams(a=0.1, b=0.8, q_bar=np.eye(1))
    with pytest.raises(EvalError):
        returns_loglik(garch, dcc, None, GaussianResidual(), r, split_index=5, window="in")


def _intervals(lo, hi):
    return {
        (i, j): CorrInterval(point=0.5 * (lo + hi), lower=lo, upper=hi, resamples=100)
        for i in range(3)
        for j in range(i + 1, 3)
    }


def test_correlation_test_verdicts():
    model = ResidualModel(marginals=(SkewTParams(9.0, 1.0),) * 3)
    assert correlation_test(model, _intervals(-0.05, 0.05)) == "T"
    assert correlation_test(model, _intervals(0.49, 0.59)) == "F"
