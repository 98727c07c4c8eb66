import numpy as np
import pytest
from scipy import integrate, stats

from dccopula import SkewTParams, skewt_cdf, skewt_pdf, skewt_quantile
from dccopula.errors import ParamError
from dccopula.skewt import skewt_logpdf


def test_param_bounds():
    with pytest.raises(ParamError):
        SkewTParams(nu=2.001, gamma=1.0)
    with pytest.raises(ParamError):
        SkewTParams(nu=5.0, gamma=0.0)
    with pytest.raises(ParamError):
        SkewTParams(nu=5.0, gamma=-0.3)
    SkewTParams(nu=2.0011, gamma=0.1)


def test_symmetric_pdf_is_even():
    p = SkewTParams(nu=5.7, gamma=1.0)
    x = np.linspace(0.1, 6.0, 25)
    assert np.allclose(skewt_pdf(x, p), skewt_pdf(-x, p), rtol=0, atol=1e-14)


def test_density_integrates_to_one():
    p = SkewTParams(nu=4.2, gamma=1.3)
    total, _ = integrate.quad(lambda x: skewt_pdf(x, p), -40, 40, limit=400)
    tail = skewt_cdf(-40.0, p) + (1.0 - skewt_cdf(40.0, p))
    assert total + tail == pytest.approx(1.0, abs=1e-8)


def test_normal_limit_at_zero():
    p = SkewTParams(nu=1e6, gamma=1.0)
    assert skewt_pdf(0.0, p) == pytest.approx(0.3989422804014327, abs=1e-3)


@pytest.mark.parametrize("nu", [2.5, 4.0, 10.0])
@pytest.mark.parametrize("gamma", [0.7, 1.0, 1.4])
def test_standardized_moments(nu, gamma):
    p = SkewTParams(nu=nu, gamma=gamma)
    pdf = lambda x: skewt_pdf(x, p)
    total = integrate.quad(pdf, -np.inf, np.inf, limit=800)[0]
    mean = integrate.quad(lambda x: x * pdf(x), -np.inf, np.inf, limit=800)[0]
    var = integrate.quad(lambda x: x * x * pdf(x), -np.inf, np.inf, limit=800)[0]
    assert total == pytest.approx(1.0, abs=1e-7)
    assert mean == pytest.approx(0.0, abs=1e-6)
    assert var == pytest.approx(1.0, abs=1e-6)


def test_cdf_midpoint_and_limits():
    p = SkewTParams(nu=5.0, gamma=1.0)
    assert skewt_cdf(0.0, p) == pytest.approx(0.5, abs=1e-14)
    assert skewt_cdf(-1e8, p) == pytest.approx(0.0, abs=1e-12)
    assert skewt_cdf(1e8, p) == pytest.approx(1.0, abs=1e-12)


def test_cdf_matches_pdf_by_finite_differences():
    p = SkewTParams(nu=4.2, gamma=0.8)
    h = 1e-6
    for x in (-2.3, -0.5, 0.0, 0.37, 1.9):
        fd = (skewt_cdf(x + h, p) - skewt_cdf(x - h, p)) / (2 * h)
        assert fd == pytest.approx(skewt_pdf(x, p), rel=1e-4)


def test_cdf_strictly_increasing_and_pdf_positive():
    p = SkewTParams(nu=3.1, gamma=1.6)
    x = np.linspace(-30, 30, 301)
    c = skewt_cdf(x, p)
    assert np.all(np.diff(c) > 0)
    assert np.all(skewt_pdf(x, p) > 0)


def test_quantile_symmetric_median():
    p = SkewTParams(nu=7.0, gamma=1.0)
    assert skewt_quantile(0.5, p) == pytest.approx(0.0, abs=1e-8)


def test_quantile_round_trip():
    for nu, gamma in ((3.0, 1.0), (4.5, 0.7), (11.0, 1.8)):
        p = SkewTParams(nu=nu, gamma=gamma)
        assert skewt_quantile(skewt_cdf(1.3, p), p) == pytest.approx(1.3, abs=1e-8)
        u = np.array([0.001, 0.2, 0.5, 0.77, 0.999])
        assert np.allclose(skewt_cdf(skewt_quantile(u, p), p), u, atol=1e-10)


def test_quantile_matches_rescaled_student_t():
    # gamma=1 is the Student-t scaled to unit variance.
    p = SkewTParams(nu=3.0, gamma=1.0)
    expected = stats.t.ppf(0.975, 3) / np.sqrt(3.0)
    assert skewt_quantile(0.975, p) == pytest.approx(expected, abs=1e-3)
    assert expected == pytest.approx(1.8374, abs=1e-4)


def test_quantile_domain():
    p = SkewTParams(nu=5.0, gamma=1.0)
    with pytest.raises(ParamError):
        skewt_quantile(0.0, p)
    with pytest.raises(ParamError):
        skewt_quantile(1.0, p)


def test_symmetric_case_equals_standardized_student_t():
    p = SkewTParams(nu=6.0, gamma=1.0)
    x = np.linspace(-5, 5, 41)
    scale = np.sqrt(6.0 / 4.0)
    expected = stats.t.logpdf(x * scale, 6.0) + np.log(scale)
    assert np.max(np.abs(skewt_logpdf(x, p) - expected)) < 1e-10
