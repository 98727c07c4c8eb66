import datetime as dt

import numpy as np
import pytest

from dccopula import (
    bootstrap_corr_ci,
    correlations,
    ingest_rates,
    log_returns,
    sample_stats,
)
from dccopula.errors import ConfigError, IngestError, StatError


def _write(tmp_path, text, name="rates.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_ingest_basic_and_sorting(tmp_path):
    path = _write(
        tmp_path,
        "date,AAA,BBB\n2020-01-03,1.21,3.0\n2020-01-01,1.0,1.0\n2020-01-02,1.1,2.0\n",
    )
    panel = ingest_rates(path)
    assert [d.isoformat() for d in panel.dates] == ["2020-01-01", "2020-01-02", "2020-01-03"]
    assert np.allclose(panel.rates[:, 0], [1.0, 1.1, 1.21])
    assert panel.asset_names == ["AAA", "BBB"]


def test_ingest_inverse_assets(tmp_path):
    path = _write(tmp_path, "date,USDJPY\n2020-01-01,100.0\n2020-01-02,125.0\n")
    panel = ingest_rates(path, inverse_assets={"USDJPY"})
    assert panel.rates[0, 0] == pytest.approx(0.01, abs=1e-15)
    assert panel.rates[1, 0] == pytest.approx(0.008, abs=1e-15)


def test_ingest_duplicate_dates(tmp_path):
    path = _write(tmp_path, "date,A\n2020-01-01,1.0\n2020-01-01,1.1\n")
    with pytest.raises(IngestError, match="duplicate"):
        ingest_rates(path)


def test_ingest_nonpositive_level_reports_row(tmp_path):
    path = _write(tmp_path, "date,A\n2020-01-01,1.0\n2020-01-02,-2.0\n")
    with pytest.raises(IngestError, match="row 3"):
        ingest_rates(path)


def test_ingest_missing_file(tmp_path):
    with pytest.raises(IngestError):
        ingest_rates(tmp_path / "absent.csv")


def test_ingest_rejects_unknown_inverse_and_bad_cells(tmp_path):
    path = _write(tmp_path, "date,A\n2020-01-01,1.0\n")
    with pytest.raises(IngestError):
        ingest_rates(path, inverse_assets={"B"})
    bad = _write(tmp_path, "date,A\n2020-01-01,abc\n", name="bad.csv")
    with pytest.raises(IngestError):
        ingest_rates(bad)


def test_ingest_custom_delimiter(tmp_path):
    path = _write(tmp_path, "date;A\n2020-01-01;1.0\n2020-01-02;2.0\n")
    panel = ingest_rates(path, delimiter=";")
    assert panel.rates[1, 0] == 2.0


def _panel(levels, start="2020-01-01"):
    from dccopula import RatePanel

    d0 = dt.date.fromisoformat(start)
    dates = [d0 + dt.timedelta(days=k) for k in range(len(levels))]
    return RatePanel(dates=dates, rates=np.asarray(levels, float), asset_names=["A"])


def test_log_returns_hand_values():
    rp = log_returns(_panel([[1.0], [1.1], [1.21]]), "2020-01-02")
    assert np.allclose(rp.returns[:, 0], np.log(1.1))
    assert rp.split_index == 0  # first return date is on the split date


def test_log_returns_constant_levels():
    rp = log_returns(_panel([[2.0], [2.0], [2.0]]), "2020-01-03")
    assert np.allclose(rp.returns, 0.0)
    assert rp.split_index == 1


def test_log_returns_split_outside_range():
    with pytest.raises(ConfigError):
        log_returns(_panel([[1.0], [1.1]]), "2021-01-01")


def test_log_returns_round_trip(rng):
    levels = np.exp(np.cumsum(rng.standard_normal((50, 1)) * 0.01, axis=0))
    rp = log_returns(_panel(levels.tolist()), "2020-01-20")
    rebuilt = np.exp(np.cumsum(rp.returns[:, 0]))
    assert np.max(np.abs(rebuilt - levels[1:, 0] / levels[0, 0])) < 1e-10


def test_sample_stats_constant():
    s = sample_stats(np.ones(5))
    assert s.mean == 1.0 and s.std == 0.0 and s.minimum == s.maximum == 1.0


def test_sample_stats_hand_std():
    s = sample_stats(np.array([-1.0, 1.0, -1.0, 1.0]))
    assert s.mean == 0.0
    assert s.std == pytest.approx(2.0 / np.sqrt(3.0), abs=1e-12)


def test_sample_stats_normal_kurtosis():
    x = np.random.default_rng(0).standard_normal(100000)
    s = sample_stats(x)
    assert s.excess_kurtosis == pytest.approx(0.0, abs=0.05)
    assert s.skew == pytest.approx(0.0, abs=0.05)


def test_sample_stats_order_invariant():
    s = sample_stats(np.array([4.0, 1.0, 3.0, 2.0, 5.0]))
    assert s.minimum <= s.p25 <= s.p50 <= s.p75 <= s.maximum
    assert s.p50 == 3.0


def test_sample_stats_too_short():
    with pytest.raises(StatError):
        sample_stats(np.array([1.0, 2.0, 3.0]))


def test_correlations_affine_and_monotone():
    x = np.linspace(-2, 2, 21)
    linear, rank = correlations(np.column_stack([x, 2 * x + 1]))
    assert linear[0, 1] == pytest.approx(1.0, abs=1e-12)
    assert rank[0, 1] == pytest.approx(1.0, abs=1e-12)
    linear, rank = correlations(np.column_stack([x, x**3]))
    assert rank[0, 1] == pytest.approx(1.0, abs=1e-12)
    assert linear[0, 1] < 1.0


def test_correlations_hand_value():
    linear, _ = correlations(np.column_stack([[1.0, 2.0, 3.0], [3.0, 2.0, 5.0]]))
    # cov = 1, sx = 1, sy = sqrt(7/3)
    assert linear[0, 1] == pytest.approx(1.0 / np.sqrt(7.0 / 3.0), abs=1e-12)
    assert linear[0, 1] == pytest.approx(0.6547, abs=1e-4)


def test_correlations_matrix_invariants(rng):
    panel = rng.standard_normal((200, 4))
    linear, rank = correlations(panel)
    for mat in (linear, rank):
        assert np.allclose(mat, mat.T, atol=1e-14)
        assert np.allclose(np.diag(mat), 1.0, atol=1e-14)
        assert np.all(np.abs(mat) <= 1.0 + 1e-12)


def test_correlations_spearman_monotone_invariance(rng):
    panel = rng.standard_normal((150, 2))
    _, rank1 = correlations(panel)
    transformed = np.column_stack([np.exp(panel[:, 0]), panel[:, 1] ** 3])
    _, rank2 = correlations(transformed)
    assert rank1[0, 1] == pytest.approx(rank2[0, 1], abs=1e-12)


def test_correlations_constant_column():
    with pytest.raises(StatError):
        correlations(np.column_stack([np.ones(10), np.arange(10.0)]))


def test_bootstrap_degenerate_perfect_correlation():
    x = np.arange(30.0)
    ci = bootstrap_corr_ci(np.column_stack([x, 2 * x]), resamples=200, seed=1)
    assert ci.point == pytest.approx(1.0, abs=1e-12)
    assert ci.lower == pytest.approx(1.0, abs=1e-9)
    assert ci.upper == pytest.approx(1.0, abs=1e-9)


def test_bootstrap_deterministic_given_seed(rng):
    pairs = rng.standard_normal((120, 2))
    a = bootstrap_corr_ci(pairs, resamples=500, seed=42)
    b = bootstrap_corr_ci(pairs, resamples=500, seed=42)
    assert (a.lower, a.upper) == (b.lower, b.upper)
    c = bootstrap_corr_ci(pairs, resamples=500, seed=43)
    assert (a.lower, a.upper) != (c.lower, c.upper)


def test_bootstrap_point_is_full_sample_correlation(rng):
    pairs = rng.standard_normal((80, 2))
    ci = bootstrap_corr_ci(pairs, resamples=100, seed=0)
    assert ci.point == pytest.approx(np.corrcoef(pairs.T)[0, 1], abs=1e-14)


def test_bootstrap_width_matches_asymptotics():
    rng = np.random.default_rng(7)
    pairs = rng.standard_normal((783, 2))
    ci = bootstrap_corr_ci(pairs, resamples=2000, seed=3)
    width = ci.upper - ci.lower
    assert width == pytest.approx(2 * 1.96 / np.sqrt(783), rel=0.30)


def test_bootstrap_input_validation(rng):
    with pytest.raises(StatError):
        bootstrap_corr_ci(rng.standard_normal((5, 2)), resamples=10)
    with pytest.raises(StatError):
        bootstrap_corr_ci(rng.standard_normal((50, 3)), resamples=10)
    with pytest.raises(StatError):
        bootstrap_corr_ci(rng.standard_normal((50, 2)), resamples=10, level=1.5)
