"""Copula-DCC-GARCH modeling toolkit."""

from .copulas import (
    FAMILY_MENU,
    CopulaFamily,
    clayton,
    copula_cdf,
    copula_logdensity,
    frank,
    gaussian,
    gaussian_copula_logdensity_nd,
    gumbel,
    h_function,
    independent,
    plackett,
    studentt,
    t_copula_logdensity_nd,
)
from .dcc import CorrPath, DccParams, dcc_residuals, filter_dcc, fit_dcc, ll_c, simulate_dcc
from .decomp import DecompMethod, EigenSortState, angle, decompose, decompose_path, eigen_sort_step
from .evalkit import (
    EvalReport,
    GaussianResidual,
    cokurtosis22,
    correlation_test,
    information_criteria,
    returns_loglik,
)
from .garch import (
    GarchParams,
    VolPath,
    filter_variance,
    fit_garch,
    ll_v,
    simulate_garch,
    unconditional_sigma,
)
from .market_data import (
    CorrInterval,
    RatePanel,
    ReturnPanel,
    SampleStats,
    bootstrap_corr_ci,
    correlations,
    ingest_rates,
    log_returns,
    sample_stats,
)
from .paircopula import (
    PairCopulaSpec,
    SpecTemplate,
    enumerate_specs,
    pair_logdensity,
    parse_spec_code,
)
from .residual_fit import (
    MENU_ITEMS,
    AddInTransform,
    FitResult,
    GaussianNd,
    PairCopula,
    ResidualModel,
    StudentTNd,
    addin_from_target,
    addin_logdensity,
    base_logdensity,
    fit_residual_model,
    leelong_transform,
    model_correlation,
)
from .skewt import SkewTParams, skewt_cdf, skewt_pdf, skewt_quantile

__version__ = "0.1.0"
