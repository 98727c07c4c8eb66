import numpy as np
import pytest

from dccopula import (
    AddInTransform,
    GaussianNd,
    ResidualModel,
    SkewTParams,
    StudentTNd,
    addin_from_target,
    addin_logdensity,
    base_logdensity,
    fit_residual_model,
    leelong_transform,
    model_correlation,
    skewt_quantile,
)
from dccopula.errors import MatrixError, ParamError
from dccopula.paircopula import parse_spec_code
from dccopula.residual_fit import PairCopula, _fit_marginals_independent
from dccopula.skewt import skewt_logpdf
from tests.conftest import random_corr

SYM3 = (SkewTParams(8.0, 1.0), SkewTParams(8.0, 1.0), SkewTParams(8.0, 1.0))


def test_addin_validation():
    with pytest.raises(ParamError):
        AddInTransform(np.array([[2.0, 0.0], [0.1, 1.0]]))  # corner must be 1
    with pytest.raises(ParamError):
        AddInTransform(np.array([[1.0, 0.5], [0.0, 1.0]]))  # upper triangle
    with pytest.raises(ParamError):
        AddInTransform(np.array([[1.0, 0.0], [0.1, -1.0]]))  # diagonal sign
    AddInTransform(np.array([[1.0, 0.0], [-0.3, 0.7]]))


def test_base_logdensity_independent_at_zero():
    m = ResidualModel(marginals=SYM3)
    expected = 3.0 * float(skewt_logpdf(0.0, SYM3[0]))
    assert base_logdensity(m, [0.0, 0.0, 0.0]) == pytest.approx(expected, abs=1e-12)


def test_gaussian_identity_copula_equals_independent(rng):
    m_ic = ResidualModel(marginals=SYM3)
    m_gc = ResidualModel(marginals=SYM3, copula=GaussianNd(np.eye(3)))
    x = rng.standard_normal((50, 3))
    a, _ = m_ic.logdensity_rows(x)
    b, _ = m_gc.logdensity_rows(x)
    assert np.max(np.abs(a - b)) < 1e-12


def test_base_rejects_addin_model_and_vice_versa():
    m = ResidualModel(marginals=SYM3, addin=AddInTransform(np.eye(3)))
    with pytest.raises(ParamError):
        base_logdensity(m, [0.0, 0.0, 0.0])
    with pytest.raises(ParamError):
        addin_logdensity(ResidualModel(marginals=SYM3), [0.0, 0.0, 0.0])


def test_grid_normalization_base_and_copula_models():
    grid = -8.0 + 0.16 * (np.arange(100) + 0.5)
    pts = np.stack(np.meshgrid(grid, grid, grid, indexing="ij"), axis=-1).reshape(-1, 3)
    corr = np.array([[1.0, 0.4, 0.2], [0.4, 1.0, 0.1], [0.2, 0.1, 1.0]])
    for model in (
        ResidualModel(marginals=(SkewTParams(5.0, 1.2), SkewTParams(7.0, 0.8), SkewTParams(4.0, 1.0))),
        ResidualModel(marginals=SYM3, copula=GaussianNd(corr)),
        ResidualModel(marginals=SYM3, copula=StudentTNd(corr, 6.0)),
    ):
        vals, _ = model.logdensity_rows(pts)
        assert np.exp(vals).sum() * 0.16**3 == pytest.approx(1.0, abs=2e-2)


def test_addin_identity_equals_base(rng):
    base = ResidualModel(marginals=SYM3, copula=GaussianNd(np.eye(3)))
    with_id = ResidualModel(
        marginals=SYM3, copula=GaussianNd(np.eye(3)), addin=AddInTransform(np.eye(3))
    )
    x = rng.standard_normal((20, 3))
    a, _ = base.logdensity_rows(x)
    b, _ = with_id.logdensity_rows(x)
    assert np.max(np.abs(a - b)) < 1e-14
    assert addin_logdensity(with_id, x[0]) == pytest.approx(base_logdensity(base, x[0]), abs=1e-14)


def test_addin_grid_mass_two_dimensional():
    marginals = (SkewTParams(6.0, 1.0), SkewTParams(6.0, 1.0))
    L = AddInTransform(np.array([[1.0, 0.0], [0.5, 1.0]]))
    model = ResidualModel(marginals=marginals, addin=L)
    grid = -10.0 + 0.1 * (np.arange(200) + 0.5)
    pts = np.stack(np.meshgrid(grid, grid, indexing="ij"), axis=-1).reshape(-1, 2)
    vals, _ = model.logdensity_rows(pts)
    assert np.exp(vals).sum() * 0.01 == pytest.approx(1.0, abs=1e-2)


def test_addin_monte_carlo_covariance(rng):
    # Sample the base (independent symmetric marginals => identity
    # correlation), push through L, and compare empirical covariance.
    marginals = (SkewTParams(8.0, 1.0), SkewTParams(8.0, 1.0), SkewTParams(8.0, 1.0))
    L = np.array([[1.0, 0.0, 0.0], [0.4, 0.9, 0.0], [-0.2, 0.3, 0.8]])
    n = 100000
    u = rng.uniform(1e-9, 1 - 1e-9, (n, 3))
    y = np.column_stack([skewt_quantile(u[:, i], marginals[i]) for i in range(3)])
    x = y @ L.T
    target = L @ L.T
    emp = np.cov(x.T, bias=True)
    # Within 3% of the covariance scale (entrywise relative error is
    # ill-defined for entries near zero).
    assert np.max(np.abs(emp - target)) < 0.03 * np.max(np.abs(target))


def test_leelong_identity_and_diagonal():
    assert np.allclose(leelong_transform(np.eye(3)), np.eye(3), atol=1e-14)
    W = leelong_transform(np.diag([4.0, 9.0]))
    assert np.allclose(W, np.diag([0.5, 1.0 / 3.0]), atol=1e-14)


def test_leelong_inverse_of_sqrt_and_whitening(rng):
    S = np.array([[1.0, 0.5], [0.5, 1.0]])
    W = leelong_transform(S)
    sqrt = np.array([[0.96592583, 0.25881905], [0.25881905, 0.96592583]])
    assert np.max(np.abs(W @ sqrt - np.eye(2))) < 1e-7
    for _ in range(5):
        S = random_corr(rng, 4) * 2.0
        W = leelong_transform(S)
        assert np.max(np.abs(W @ S @ W.T - np.eye(4))) < 1e-10


def test_leelong_requires_positive_definite():
    with pytest.raises(MatrixError):
        leelong_transform(np.array([[1.0, 1.0], [1.0, 1.0]]))


def test_addin_from_target_identity_case():
    S = np.array([[1.0, 0.3], [0.3, 1.0]])
    t = addin_from_target(S, S)
    assert np.max(np.abs(t.L - np.eye(2))) < 1e-12


def test_addin_from_target_hand_value():
    S = np.array([[1.0, 0.5], [0.5, 1.0]])
    t = addin_from_target(np.eye(2), S)
    expected = np.array([[1.0, 0.0], [-0.57735027, 1.15470054]])
    assert np.max(np.abs(t.L - expected)) < 1e-7


def test_addin_from_target_defining_property(rng):
    for _ in range(10):
        S = random_corr(rng, 3)
        J = random_corr(rng, 3)
        t = addin_from_target(J, S)
        assert np.max(np.abs(t.L @ S @ t.L.T - J)) < 1e-12


def test_addin_from_target_requires_unit_corner():
    J = np.array([[2.0, 0.0], [0.0, 1.0]])
    with pytest.raises(ParamError):
        addin_from_target(J, np.eye(2))


def test_fit_cic_on_independent_data():
    rng = np.random.default_rng(3)
    data = rng.standard_normal((5000, 3))
    res = fit_residual_model(data, "CIC")
    L = res.model.addin.L
    off = L[np.tril_indices(3, k=-1)]
    assert np.max(np.abs(off)) < 0.05
    for m in res.model.marginals:
        assert m.nu > 10.0
        assert m.gamma == pytest.approx(1.0, abs=0.05)
    assert res.k == 11
    assert res.aic == pytest.approx(-2.0 * res.loglik + 2 * res.k, abs=1e-10)
    assert res.bic == pytest.approx(-2.0 * res.loglik + res.k * np.log(5000), abs=1e-10)


def test_fit_nesting_chain(rng):
    L = np.linalg.cholesky(np.array([[1.0, 0.6, 0.3], [0.6, 1.0, 0.4], [0.3, 0.4, 1.0]]))
    data = rng.standard_normal((600, 3)) @ L.T
    ms = _fit_marginals_independent(data)
    ic = fit_residual_model(data, "IC", marginal_starts=ms)
    cic = fit_residual_model(data, "CIC", marginal_starts=ms, nested_model=ic.model)
    gc = fit_residual_model(data, "GC", marginal_starts=ms, nested_model=ic.model)
    cgc = fit_residual_model(data, "CGC", marginal_starts=ms, nested_model=gc.model)
    assert cic.loglik >= ic.loglik - 1e-6
    assert gc.loglik >= ic.loglik - 1e-6
    assert cgc.loglik >= gc.loglik - 1e-6
    # Strict improvement on strongly dependent data.
    assert cic.loglik > ic.loglik + 10.0


def test_fit_pair_copula_k_counting(rng):
    L = np.linalg.cholesky(np.array([[1.0, 0.3, 0.1], [0.3, 1.0, 0.2], [0.1, 0.2, 1.0]]))
    data = rng.standard_normal((300, 3)) @ L.T
    ms = _fit_marginals_independent(data)
    res = fit_residual_model(
        data, "PC", spec_template=parse_spec_code("P1:ga:t:cl90"),
        marginal_starts=ms, maxiter=150, restarts=1,
    )
    assert res.k == 6 + 1 + 2 + 1
    assert isinstance(res.model.copula, PairCopula)
    assert res.spec_code == "P1:ga:t:cl90"
    cres = fit_residual_model(
        data, "CPC", spec_template=parse_spec_code("P1:ga:t:cl90"),
        marginal_starts=ms, maxiter=150, restarts=1, nested_model=res.model,
    )
    assert cres.k == res.k + 5
    assert cres.loglik >= res.loglik - 1e-6


def test_fit_input_validation(rng):
    data = rng.standard_normal((100, 3))
    with pytest.raises(ParamError):
        fit_residual_model(data, "XYZ")
    with pytest.raises(ParamError):
        fit_residual_model(data, "PC")  # missing template
    with pytest.raises(ParamError):
        fit_residual_model(rng.standard_normal((100, 2)), "PC",
                           spec_template=parse_spec_code("P1:ga:ga:ga"))


def test_model_correlation_independent_symmetric():
    model = ResidualModel(marginals=SYM3)
    corr = model_correlation(model)
    off = corr[np.triu_indices(3, k=1)]
    assert np.max(np.abs(off)) < 1e-3
    assert np.allclose(np.diag(corr), 1.0)


def test_model_correlation_gaussian_copula():
    corr_in = np.full((3, 3), 0.3)
    np.fill_diagonal(corr_in, 1.0)
    model = ResidualModel(
        marginals=(SkewTParams(25.0, 1.0),) * 3, copula=GaussianNd(corr_in)
    )
    corr = model_correlation(model)
    assert np.max(np.abs(corr[np.triu_indices(3, k=1)] - 0.3)) < 2e-3


def test_model_correlation_addin_identity_target():
    # Adjustment chosen to undo the base correlation: off-diagonals vanish.
    base_corr = np.array([[1.0, 0.5, 0.2], [0.5, 1.0, 0.3], [0.2, 0.3, 1.0]])
    model0 = ResidualModel(marginals=(SkewTParams(25.0, 1.0),) * 3, copula=GaussianNd(base_corr))
    s_base = model_correlation(model0)
    addin = addin_from_target(np.eye(3), s_base)
    model = ResidualModel(
        marginals=(SkewTParams(25.0, 1.0),) * 3, copula=GaussianNd(base_corr), addin=addin
    )
    corr = model_correlation(model)
    assert np.max(np.abs(corr[np.triu_indices(3, k=1)])) < 5e-3


def test_fit_is_deterministic(rng):
    data = rng.standard_normal((300, 3))
    a = fit_residual_model(data, "GC", maxiter=200, restarts=1)
    b = fit_residual_model(data, "GC", maxiter=200, restarts=1)
    assert a.loglik == b.loglik
    assert np.array_equal(a.model.copula.corr, b.model.copula.corr)
