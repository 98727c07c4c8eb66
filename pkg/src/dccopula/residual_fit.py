"""Residual distribution models and their maximum-likelihood estimation.

The distribution menu combines standardized skew-t marginals with one of
four copulas (independent, Gaussian, Student-t, pair copula) and optionally
a correlation-adjustment transform: a lower-triangular matrix L with unit
(1,1) entry whose remaining entries are free parameters, applied as
x = L y to relocate the joint distribution's correlation.  Menu codes:

    IC  GC  TC  PC      without the adjustment
    CIC CGC CTC CPC     with it

Fits are single joint Nelder-Mead optimizations over marginal, copula, and
adjustment parameters, initialized in stages (marginals under independence,
then copula values implied by the sample dependence, then the adjustment
from the sample correlation).  Candidate starting points always include the
parameter point that reproduces the nested simpler model, so optimal
likelihoods are monotone across nested menu items.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg as slinalg
from scipy import stats as sstats

from ._student import t_ppf
from .copulas import (
    CopulaFamily,
    gaussian_copula_logdensity_nd,
    split_code,
    t_copula_logdensity_nd,
    validate_corr_matrix,
)
from .errors import FitError, MatrixError, ParamError
from .optimize import bounded_atanh, bounded_tanh, maximize
from .paircopula import CLAMP, SpecTemplate, pair_copula_logdensity_u
from .skewt import NU_MIN, SkewTParams, skewt_cdf, skewt_logpdf, skewt_quantile

__all__ = [
    "MENU_ITEMS",
    "AddInTransform",
    "GaussianNd",
    "StudentTNd",
    "PairCopula",
    "ResidualModel",
    "FitResult",
    "base_logdensity",
    "addin_logdensity",
    "leelong_transform",
    "addin_from_target",
    "fit_residual_model",
    "model_correlation",
]

MENU_ITEMS = ("IC", "CIC", "GC", "CGC", "TC", "CTC", "PC", "CPC")

_EXP_CLIP = 50.0
_NU_CLIP = 13.8  # caps fitted degrees of freedom near 1e6


@dataclass(frozen=True)
class AddInTransform:
    """Lower-triangular correlation adjustment with unit (1,1) entry."""

    L: np.ndarray

    def __post_init__(self):
        L = np.asarray(self.L, dtype=float)
        if L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise ParamError("L must be square")
        if np.max(np.abs(np.triu(L, 1))) != 0.0:
            raise ParamError("L must be lower triangular")
        if L[0, 0] != 1.0:
            raise ParamError("L must have a unit (1,1) entry")
        if np.any(np.diag(L) <= 0.0):
            raise ParamError("L must have a positive diagonal")
        object.__setattr__(self, "L", L)

    @property
    def log_abs_det(self) -> float:
        return float(np.sum(np.log(np.diag(self.L))))


@dataclass(frozen=True)
class GaussianNd:
    corr: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "corr", validate_corr_matrix(self.corr, "corr"))


@dataclass(frozen=True)
class StudentTNd:
    corr: np.ndarray
    nu: float

    def __post_init__(self):
        object.__setattr__(self, "corr", validate_corr_matrix(self.corr, "corr"))
        if not self.nu > NU_MIN:
            raise ParamError(f"nu must exceed {NU_MIN}")


@dataclass(frozen=True)
class PairCopula:
    pivot: int
    edge_copulas: tuple[CopulaFamily, CopulaFamily, CopulaFamily]


@dataclass(frozen=True)
class ResidualModel:
    """Marginals + copula + optional correlation adjustment.

    ``copula`` is ``None`` for the independence copula, or one of
    ``GaussianNd``, ``StudentTNd``, ``PairCopula``.
    """

    marginals: tuple
    copula: object = None
    addin: AddInTransform | None = None

    def __post_init__(self):
        if isinstance(self.copula, PairCopula) and len(self.marginals) != 3:
            raise ParamError("pair-copula models are three-dimensional")

    @property
    def dim(self) -> int:
        return len(self.marginals)

    def logdensity_rows(self, x: np.ndarray) -> tuple[np.ndarray, int]:
        """Joint log-density per row of an (M, N) array plus clamp count."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.dim:
            raise ParamError(f"expected {self.dim} columns, got {x.shape[1]}")
        offset = 0.0
        if self.addin is not None:
            try:
                x = slinalg.solve_triangular(self.addin.L, x.T, lower=True).T
            except (ValueError, slinalg.LinAlgError) as exc:
                raise MatrixError("singular adjustment transform") from exc
            offset = -self.addin.log_abs_det
        clamps = 0
        ll = np.full(x.shape[0], offset)
        u = np.empty_like(x)
        for i, marginal in enumerate(self.marginals):
            ll += skewt_logpdf(x[:, i], marginal)
            ui = skewt_cdf(x[:, i], marginal)
            u[:, i] = np.clip(ui, CLAMP, 1.0 - CLAMP)
            clamps += int(np.count_nonzero(u[:, i] != ui))
        cop = self.copula
        if cop is None:
            pass
        elif isinstance(cop, GaussianNd):
            ll += gaussian_copula_logdensity_nd(cop.corr, u)
        elif isinstance(cop, StudentTNd):
            ll += t_copula_logdensity_nd(cop.corr, cop.nu, u)
        elif isinstance(cop, PairCopula):
            cll, c = pair_copula_logdensity_u(
                cop.pivot, cop.edge_copulas, u[:, 0], u[:, 1], u[:, 2]
            )
            ll += cll
            clamps += c
        else:
            raise ParamError(f"unsupported copula component {cop!r}")
        return ll, clamps

    def logdensity(self, x) -> float:
        ll, _ = self.logdensity_rows(np.asarray(x, dtype=float).reshape(1, -1))
        return float(ll[0])


@dataclass
class FitResult:
    model: ResidualModel
    loglik: float
    k: int
    aic: float
    bic: float
    converged: bool
    clamp_count: int
    n_obs: int
    menu_item: str
    spec_code: str | None = None
    nfev: int = 0


def base_logdensity(m: ResidualModel, x) -> float:
    """Joint log-density of a model without the correlation adjustment."""
    if m.addin is not None:
        raise ParamError("base_logdensity expects a model without an adjustment")
    return m.logdensity(x)


def addin_logdensity(m: ResidualModel, x) -> float:
    """Joint log-density with the adjustment: base at L^-1 x minus log|det L|."""
    if m.addin is None:
        raise ParamError("addin_logdensity expects a model with an adjustment")
    return m.logdensity(x)


def leelong_transform(S: np.ndarray) -> np.ndarray:
    """Inverse matrix square root of a covariance; premultiplying samples by
    it yields unit-variance, linearly uncorrelated coordinates."""
    S = np.asarray(S, dtype=float)
    vals, vecs = np.linalg.eigh(0.5 * (S + S.T))
    if np.min(vals) <= 0.0:
        raise MatrixError("covariance matrix is not positive definite")
    return (vecs / np.sqrt(vals)) @ vecs.T


def addin_from_target(J: np.ndarray, S_Y: np.ndarray) -> AddInTransform:
    """Adjustment mapping correlation ``S_Y`` to covariance target ``J``.

    L = chol(J) chol(S_Y)^-1; the transformed variable L y has covariance J
    when y has correlation (= covariance) S_Y.  ``J`` must have a unit (1,1)
    entry so L keeps its unit corner.
    """
    J = np.asarray(J, dtype=float)
    if abs(J[0, 0] - 1.0) > 1e-12:
        raise ParamError("target covariance must have a unit (1,1) entry")
    S_Y = validate_corr_matrix(S_Y, "S_Y")
    try:
        LJ = np.linalg.cholesky(0.5 * (J + J.T))
        LS = np.linalg.cholesky(S_Y)
    except np.linalg.LinAlgError as exc:
        raise MatrixError("target or source matrix is not positive definite") from exc
    L = slinalg.solve_triangular(LS.T, LJ.T, lower=False).T
    L = np.tril(L)
    L[0, 0] = 1.0
    return AddInTransform(L=L)


# ---------------------------------------------------------------------------
# parameter packing


def _corr_from_partials(p: np.ndarray) -> np.ndarray:
    # N=3 correlation matrix from (r12, r13, r23|1) through tanh maps; always
    # positive definite for |r| < 1.
    r12, r13 = bounded_tanh(p[0]), bounded_tanh(p[1])
    r23_1 = bounded_tanh(p[2])
    r23 = r12 * r13 + r23_1 * np.sqrt((1.0 - r12**2) * (1.0 - r13**2))
    return np.array([[1.0, r12, r13], [r12, 1.0, r23], [r13, r23, 1.0]])


def _partials_from_corr(R: np.ndarray) -> np.ndarray:
    r12, r13, r23 = R[0, 1], R[0, 2], R[1, 2]
    r23_1 = (r23 - r12 * r13) / np.sqrt((1.0 - r12**2) * (1.0 - r13**2))
    return np.array(
        [bounded_atanh(r12), bounded_atanh(r13), bounded_atanh(np.clip(r23_1, -0.999999, 0.999999))]
    )


def _edge_n_params(code: str) -> int:
    tag, _ = split_code(code)
    return {"independent": 0, "studentt": 2}.get(tag, 1)


def _edge_unpack(code: str, p: np.ndarray) -> CopulaFamily:
    tag, rotation = split_code(code)
    if tag == "independent":
        return CopulaFamily("independent")
    if tag == "clayton":
        return CopulaFamily("clayton", (float(np.exp(np.clip(p[0], -_EXP_CLIP, 4.0))),), rotation)
    if tag == "gumbel":
        return CopulaFamily("gumbel", (1.0 + float(np.exp(np.clip(p[0], -_EXP_CLIP, 4.0))),), rotation)
    if tag == "frank":
        theta = float(p[0])
        if abs(theta) < 1e-6:
            theta = 1e-6 if theta >= 0.0 else -1e-6
        return CopulaFamily("frank", (theta,), rotation)
    if tag == "plackett":
        theta = float(np.exp(np.clip(p[0], -_EXP_CLIP, 6.0)))
        if theta == 1.0:
            theta = 1.0 + 1e-9
        return CopulaFamily("plackett", (theta,), rotation)
    if tag == "gaussian":
        return CopulaFamily("gaussian", (float(bounded_tanh(p[0])),), rotation)
    rho = float(bounded_tanh(p[0]))
    nu = NU_MIN + float(np.exp(np.clip(p[1], -_EXP_CLIP, _NU_CLIP)))
    return CopulaFamily("studentt", (rho, nu), rotation)


def _edge_pack(code: str, fam: CopulaFamily) -> np.ndarray:
    tag, _ = split_code(code)
    if tag == "independent":
        return np.zeros(0)
    if tag == "clayton":
        return np.array([np.log(fam.params[0])])
    if tag == "gumbel":
        return np.array([np.log(max(fam.params[0] - 1.0, 1e-12))])
    if tag in ("frank", "plackett"):
        return np.array([fam.params[0] if tag == "frank" else np.log(fam.params[0])])
    if tag == "gaussian":
        return np.array([bounded_atanh(fam.params[0])])
    return np.array([bounded_atanh(fam.params[0]), np.log(max(fam.params[1] - NU_MIN, 1e-12))])


def _copula_pack(base: str, copula, n: int, template: SpecTemplate | None) -> np.ndarray:
    """Raw optimizer coordinates reproducing a fitted copula component.

    For menu items that nest a simpler one, the simpler optimum packed this
    way seeds the larger search, which keeps optimal likelihoods monotone
    across nested models.
    """
    if base == "IC":
        return np.zeros(0)
    if base in ("GC", "TC"):
        if copula is None:
            corr = np.eye(n)
        else:
            corr = copula.corr
        if n == 2:
            p = np.array([bounded_atanh(corr[0, 1])])
        else:
            p = _partials_from_corr(corr)
        if base == "TC":
            nu = copula.nu if isinstance(copula, StudentTNd) else 50.0
            p = np.append(p, np.log(max(nu - NU_MIN, 1e-12)))
        return p
    return np.concatenate(
        [_edge_pack(code, fam) for code, fam in zip(template.edges, copula.edge_copulas)]
    )


def _tau_for_edge(code: str, tau: float) -> np.ndarray:
    """Deterministic starting parameters from a pairwise Kendall tau."""
    tag, rotation = split_code(code)
    if rotation in (90, 270):
        tau = -tau
    if tag == "clayton":
        tau = np.clip(tau, 0.05, 0.93)
        return np.array([np.log(2.0 * tau / (1.0 - tau))])
    if tag == "gumbel":
        tau = np.clip(tau, 0.05, 0.93)
        return np.array([np.log(max(1.0 / (1.0 - tau) - 1.0, 1e-3))])
    if tag == "frank":
        # Coarse inversion of tau(theta); adequate for a starting value.
        return np.array([np.clip(7.0 * tau, -30.0, 30.0) if abs(tau) > 0.02 else 0.5])
    if tag == "plackett":
        rho = np.sin(np.pi * np.clip(tau, -0.95, 0.95) / 2.0)
        return np.array([np.clip(3.0 * rho, -5.0, 5.0)])
    if tag == "gaussian":
        rho = np.sin(np.pi * np.clip(tau, -0.99, 0.99) / 2.0)
        return np.array([bounded_atanh(rho)])
    if tag == "studentt":
        rho = np.sin(np.pi * np.clip(tau, -0.99, 0.99) / 2.0)
        return np.array([bounded_atanh(rho), np.log(8.0 - NU_MIN)])
    return np.zeros(0)


def _marginal_unpack(p: np.ndarray, n: int) -> tuple:
    out = []
    for i in range(n):
        nu = NU_MIN + float(np.exp(np.clip(p[2 * i], -_EXP_CLIP, _NU_CLIP)))
        gamma = float(np.exp(np.clip(p[2 * i + 1], -5.0, 5.0)))
        out.append(SkewTParams(nu=nu, gamma=gamma))
    return tuple(out)


def _marginal_pack(marginals) -> np.ndarray:
    p = []
    for m in marginals:
        p += [np.log(max(m.nu - NU_MIN, 1e-8)), np.log(m.gamma)]
    return np.array(p)


def _addin_n_params(n: int) -> int:
    return n * (n + 1) // 2 - 1


def _addin_unpack(p: np.ndarray, n: int) -> AddInTransform:
    # Row-major lower triangle below the fixed unit corner; diagonal entries
    # pass through exp to stay positive.
    L = np.zeros((n, n))
    L[0, 0] = 1.0
    k = 0
    for i in range(1, n):
        for j in range(i + 1):
            if i == j:
                L[i, j] = float(np.exp(np.clip(p[k], -_EXP_CLIP, _EXP_CLIP)))
            else:
                L[i, j] = float(p[k])
            k += 1
    return AddInTransform(L=L)


def _addin_pack(addin: AddInTransform) -> np.ndarray:
    n = addin.L.shape[0]
    p = []
    for i in range(1, n):
        for j in range(i + 1):
            value = addin.L[i, j]
            p.append(np.log(value) if i == j else value)
    return np.array(p)


# ---------------------------------------------------------------------------
# fitting


def _fit_marginals_independent(data: np.ndarray, maxiter: int = 400) -> tuple:
    """Stage-1 skew-t fits per column under the independence copula."""
    out = []
    for i in range(data.shape[1]):
        col = data[:, i]
        kurt = max(float(sstats.kurtosis(col, fisher=True, bias=True)), 0.05)
        nu0 = float(np.clip(4.0 + 6.0 / kurt, 2.5, 100.0))
        x0 = np.array([np.log(nu0 - NU_MIN), 0.0])

        def objective(p):
            marginal = _marginal_unpack(p, 1)[0]
            with np.errstate(all="ignore"):
                return float(np.sum(skewt_logpdf(col, marginal)))

        res = maximize(objective, x0, maxiter=maxiter, restarts=2)
        out.append(_marginal_unpack(res.x, 1)[0])
    return tuple(out)


def _sample_corr(data: np.ndarray) -> np.ndarray:
    R = np.corrcoef(data.T)
    R = 0.5 * (R + R.T)
    np.fill_diagonal(R, 1.0)
    # Shrink slightly if near-singular so Cholesky-based starts exist.
    try:
        np.linalg.cholesky(R)
    except np.linalg.LinAlgError:
        R = 0.98 * R + 0.02 * np.eye(R.shape[0])
        np.fill_diagonal(R, 1.0)
    return R


def _copula_start_params(base: str, data: np.ndarray, template: SpecTemplate | None):
    """Candidate copula starting vectors, each paired with the correlation the
    base distribution would have at that start (feeds the adjustment init)."""
    n = data.shape[1]
    eye = np.eye(n)
    if base == "IC":
        return [(np.zeros(0), eye)]
    if base in ("GC", "TC"):
        R = _sample_corr(data)
        Rc = np.clip(R, -0.99, 0.99)
        np.fill_diagonal(Rc, 1.0)
        if n == 2:
            informed = np.array([bounded_atanh(Rc[0, 1])])
            neutral = np.zeros(1)
        elif n == 3:
            informed = _partials_from_corr(Rc)
            neutral = np.zeros(3)
        else:
            raise ParamError("elliptical copula fits support N in {2, 3}")
        if base == "TC":
            informed = np.append(informed, np.log(8.0 - NU_MIN))
            neutral = np.append(neutral, np.log(50.0))
        return [(informed, Rc), (neutral, eye)]
    # PC: tau-informed edge starts.
    taus = {}
    for i in range(3):
        for j in range(i + 1, 3):
            taus[(i, j)] = sstats.kendalltau(data[:, i], data[:, j]).statistic
    pairs = {1: ((0, 1), (0, 2)), 2: ((0, 1), (1, 2)), 3: ((0, 2), (1, 2))}[template.pivot]
    start = []
    for edge_idx, code in enumerate(template.edges):
        if edge_idx < 2:
            start.append(_tau_for_edge(code, taus[pairs[edge_idx]]))
        else:
            start.append(_tau_for_edge(code, 0.05))  # conditional edge: weak start
    return [(np.concatenate(start) if start else np.zeros(0), _sample_corr(data))]


def _copula_n_params(base: str, n: int, template: SpecTemplate | None) -> int:
    if base == "IC":
        return 0
    if base == "GC":
        return 1 if n == 2 else 3
    if base == "TC":
        return (1 if n == 2 else 3) + 1
    return sum(_edge_n_params(code) for code in template.edges)


def _copula_unpack(base: str, p: np.ndarray, n: int, template: SpecTemplate | None):
    if base == "IC":
        return None
    if base == "GC":
        if n == 2:
            r = float(bounded_tanh(p[0]))
            return GaussianNd(np.array([[1.0, r], [r, 1.0]]))
        return GaussianNd(_corr_from_partials(p))
    if base == "TC":
        nu = NU_MIN + float(np.exp(np.clip(p[-1], -_EXP_CLIP, _NU_CLIP)))
        if n == 2:
            r = float(bounded_tanh(p[0]))
            return StudentTNd(np.array([[1.0, r], [r, 1.0]]), nu)
        return StudentTNd(_corr_from_partials(p[:3]), nu)
    edges = []
    k = 0
    for code in template.edges:
        m = _edge_n_params(code)
        edges.append(_edge_unpack(code, p[k : k + m]))
        k += m
    return PairCopula(pivot=template.pivot, edge_copulas=tuple(edges))


def fit_residual_model(
    data: np.ndarray,
    menu_item: str,
    spec_template: SpecTemplate | None = None,
    addin_target: np.ndarray | None = None,
    marginal_starts=None,
    nested_model: ResidualModel | None = None,
    maxiter: int | None = None,
    fatol: float = 1e-8,
    restarts: int = 3,
) -> FitResult:
    """Joint MLE of a residual-distribution menu item on a T x N sample.

    ``spec_template`` selects the pair-copula structure for PC/CPC.
    ``addin_target`` is the covariance the adjustment is initialized toward
    (identity for DCC residuals, the sample correlation otherwise).
    ``marginal_starts`` skips the stage-1 marginal fit when the caller has
    already computed per-column skew-t estimates.  ``nested_model`` is a
    fitted model of the menu item this one nests (e.g. the GC optimum when
    fitting CGC); its packed parameters join the candidate starting points.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] < 20:
        raise FitError("need a T x N data matrix with T >= 20")
    menu_item = menu_item.upper()
    if menu_item not in MENU_ITEMS:
        raise ParamError(f"unknown menu item {menu_item!r}; choose from {MENU_ITEMS}")
    with_addin = menu_item.startswith("C")
    base = menu_item[1:] if with_addin else menu_item
    T, n = data.shape
    if base == "PC":
        if spec_template is None:
            raise ParamError("PC/CPC fits need a pair-copula spec template")
        if n != 3:
            raise ParamError("pair-copula models are three-dimensional")

    marginals0 = (
        tuple(marginal_starts) if marginal_starts is not None else _fit_marginals_independent(data)
    )
    marg0 = _marginal_pack(marginals0)
    n_marg = marg0.size
    n_cop = _copula_n_params(base, n, spec_template)
    n_add = _addin_n_params(n) if with_addin else 0
    k = n_marg + n_cop + n_add

    def unpack(p) -> ResidualModel:
        marginals = _marginal_unpack(p[:n_marg], n)
        copula = _copula_unpack(base, p[n_marg : n_marg + n_cop], n, spec_template)
        addin = _addin_unpack(p[n_marg + n_cop :], n) if with_addin else None
        return ResidualModel(marginals=marginals, copula=copula, addin=addin)

    def objective(p):
        with np.errstate(all="ignore"):
            try:
                ll, _ = unpack(p).logdensity_rows(data)
            except (ParamError, MatrixError, np.linalg.LinAlgError):
                return -np.inf
            return float(np.sum(ll))

    candidates = []
    for cop0, s_base in _copula_start_params(base, data, spec_template):
        if with_addin:
            target = (
                np.asarray(addin_target, dtype=float)
                if addin_target is not None
                else _sample_corr(data)
            )
            start_addin = _addin_pack(addin_from_target(target, s_base))
            candidates.append(np.concatenate([marg0, cop0, start_addin]))
            candidates.append(np.concatenate([marg0, cop0, _addin_pack(AddInTransform(np.eye(n)))]))
        else:
            candidates.append(np.concatenate([marg0, cop0]))
    if nested_model is not None:
        nested_marg = _marginal_pack(nested_model.marginals)
        nested_cop = _copula_pack(base, nested_model.copula, n, spec_template)
        if with_addin:
            nested_addin = _addin_pack(
                nested_model.addin
                if nested_model.addin is not None
                else AddInTransform(np.eye(n))
            )
            candidates.append(np.concatenate([nested_marg, nested_cop, nested_addin]))
        else:
            candidates.append(np.concatenate([nested_marg, nested_cop]))
    scores = [objective(c) for c in candidates]
    x0 = candidates[int(np.argmax(scores))]

    if maxiter is None:
        maxiter = 200 * max(x0.size, 1)
    res = maximize(objective, x0, maxiter=maxiter, xatol=1e-6, fatol=fatol, restarts=restarts)
    if not res.converged:
        raise FitError(f"residual fit failed for {menu_item}: {res.message}")
    model = unpack(res.x)
    ll_rows, clamps = model.logdensity_rows(data)
    loglik = float(np.sum(ll_rows))
    aic = -2.0 * loglik + 2.0 * k
    bic = -2.0 * loglik + k * np.log(T)
    return FitResult(
        model=model,
        loglik=loglik,
        k=k,
        aic=aic,
        bic=float(bic),
        converged=res.converged,
        clamp_count=clamps,
        n_obs=T,
        menu_item=menu_item,
        spec_code=spec_template.code if spec_template is not None else None,
        nfev=res.nfev,
    )


# ---------------------------------------------------------------------------
# grid-integration moments


def model_correlation(m: ResidualModel, cells: int = 100, bound: float = 8.0) -> np.ndarray:
    """Correlation matrix of a model by midpoint integration.

    Expectations are taken on a normal-substitution grid: the cube
    ``[-bound, bound]^N`` is split into ``cells`` sections per axis, the
    substitution x_i = F_i^-1(Phi(y_i)) turns the density into copula times
    standard normal weights, and moments are midpoint sums.  The adjustment
    transform, when present, maps the base covariance linearly.
    """
    n = m.dim
    if n > 3:
        raise ParamError("grid integration supports N <= 3")
    step = 2.0 * bound / cells
    y = -bound + step * (np.arange(cells) + 0.5)
    w = sstats.norm.pdf(y) * step
    u = np.clip(sstats.norm.cdf(y), CLAMP, 1.0 - CLAMP)
    x_axes = [skewt_quantile(u, marginal) for marginal in m.marginals]

    if n == 2:
        shapes = [(cells, 1), (1, cells)]
    else:
        shapes = [(cells, 1, 1), (1, cells, 1), (1, 1, cells)]
    cop = m.copula
    if cop is None:
        density = np.ones([cells] * n)
    elif isinstance(cop, PairCopula):
        ll, _ = pair_copula_logdensity_u(
            cop.pivot,
            cop.edge_copulas,
            u.reshape(shapes[0]),
            u.reshape(shapes[1]),
            u.reshape(shapes[2]),
        )
        density = np.exp(ll)
    elif isinstance(cop, (GaussianNd, StudentTNd)):
        density = _elliptical_density_grid(cop, u, n, shapes)
    else:
        raise ParamError(f"unsupported copula component {cop!r}")

    weight = w.reshape(shapes[0])
    for axis in range(1, n):
        weight = weight * w.reshape(shapes[axis])
    dw = density * weight
    mean = np.empty(n)
    second = np.empty((n, n))
    xs = [x_axes[i].reshape(shapes[i]) for i in range(n)]
    for i in range(n):
        mean[i] = float(np.sum(xs[i] * dw))
        for j in range(i, n):
            second[i, j] = second[j, i] = float(np.sum(xs[i] * xs[j] * dw))
    cov = second - np.outer(mean, mean)
    if m.addin is not None:
        cov = m.addin.L @ cov @ m.addin.L.T
    d = np.sqrt(np.diag(cov))
    corr = cov / np.outer(d, d)
    np.fill_diagonal(corr, 1.0)
    return corr


def _elliptical_density_grid(cop, u: np.ndarray, n: int, shapes) -> np.ndarray:
    R = cop.corr
    Ri = np.linalg.inv(R)
    half_logdet = float(np.sum(np.log(np.diag(np.linalg.cholesky(R)))))
    if isinstance(cop, GaussianNd):
        z = sstats.norm.ppf(u)
        A = Ri - np.eye(n)
        quad = _quad_grid(z, A, shapes)
        return np.exp(-half_logdet - 0.5 * quad)
    nu = cop.nu
    z = t_ppf(u, nu)
    quad = _quad_grid(z, Ri, shapes)
    from scipy.special import gammaln

    log_c = (
        gammaln((nu + n) / 2.0)
        + (n - 1.0) * gammaln(nu / 2.0)
        - n * gammaln((nu + 1.0) / 2.0)
        - half_logdet
        - (nu + n) / 2.0 * np.log1p(quad / nu)
    )
    marg = sum(
        (nu + 1.0) / 2.0 * np.log1p((z * z / nu)).reshape(shapes[i]) for i in range(n)
    )
    return np.exp(log_c + marg)


def _quad_grid(z: np.ndarray, A: np.ndarray, shapes) -> np.ndarray:
    n = len(shapes)
    cols = [z.reshape(shapes[i]) for i in range(n)]
    quad = 0.0
    for i in range(n):
        quad = quad + A[i, i] * cols[i] * cols[i]
        for j in range(i + 1, n):
            quad = quad + 2.0 * A[i, j] * cols[i] * cols[j]
    return quad
