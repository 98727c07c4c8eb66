"""Parametric two- and N-dimensional copulas.

Two-dimensional families (Clayton, Gumbel, Frank, Plackett, Gaussian,
Student-t, Independent) expose CDF, log-density, and the conditional
h-function, with optional 90/180/270-degree rotations.  The elliptical
families additionally come in N-dimensional form parameterized by a full
correlation matrix.

All Archimedean/Plackett kernels are evaluated in log space (signed
log-sum-exp for the alternating sums) so large dependence parameters do not
overflow or cancel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, special, stats
from scipy.special import ndtr, ndtri

from ._student import t_cdf, t_logpdf, t_ppf
from .errors import DomainError, MatrixError, ParamError
from .skewt import NU_MIN

__all__ = [
    "CopulaFamily",
    "independent",
    "gaussian",
    "studentt",
    "clayton",
    "frank",
    "gumbel",
    "plackett",
    "family_from_code",
    "FAMILY_MENU",
    "copula_cdf",
    "copula_logdensity",
    "h_function",
    "h_function_first",
    "gaussian_copula_logdensity_nd",
    "t_copula_logdensity_nd",
    "validate_corr_matrix",
]

_ROTATIONS = (0, 90, 180, 270)

# Paper-order menu used for the pair-copula sweep: Gaussian, Frank, Plackett,
# Clayton (+rotations), Gumbel (+rotations), Student-t.
FAMILY_MENU = (
    "ga",
    "fr",
    "pl",
    "cl",
    "cl90",
    "cl180",
    "cl270",
    "gu",
    "gu90",
    "gu180",
    "gu270",
    "t",
)


@dataclass(frozen=True)
class CopulaFamily:
    """Tagged copula family with parameters and an optional rotation.

    ``params`` holds ``(theta,)`` for Clayton/Gumbel/Frank/Plackett,
    ``(rho,)`` for Gaussian, ``(rho, nu)`` for Student-t, and is empty for
    the independence copula.
    """

    tag: str
    params: tuple = ()
    rotation: int = 0

    def __post_init__(self):
        if self.rotation not in _ROTATIONS:
            raise ParamError(f"rotation must be one of {_ROTATIONS}")
        p = self.params
        tag = self.tag
        if tag == "independent":
            if p:
                raise ParamError("independence copula takes no parameters")
        elif tag == "clayton":
            if len(p) != 1 or not (np.isfinite(p[0]) and p[0] > 0.0):
                raise ParamError(f"Clayton theta must be > 0, got {p}")
        elif tag == "gumbel":
            if len(p) != 1 or not (np.isfinite(p[0]) and p[0] >= 1.0):
                raise ParamError(f"Gumbel theta must be >= 1, got {p}")
        elif tag == "frank":
            if len(p) != 1 or not np.isfinite(p[0]) or p[0] == 0.0:
                raise ParamError(f"Frank theta must be finite and nonzero, got {p}")
        elif tag == "plackett":
            if len(p) != 1 or not (np.isfinite(p[0]) and p[0] > 0.0) or p[0] == 1.0:
                raise ParamError(f"Plackett theta must be > 0 and != 1, got {p}")
        elif tag == "gaussian":
            if len(p) != 1 or not (-1.0 < p[0] < 1.0):
                raise ParamError(f"Gaussian rho must lie in (-1, 1), got {p}")
        elif tag == "studentt":
            if len(p) != 2 or not (-1.0 < p[0] < 1.0) or not p[1] > NU_MIN:
                raise ParamError(
                    f"Student-t needs rho in (-1, 1) and nu > {NU_MIN}, got {p}"
                )
        else:
            raise ParamError(f"unknown copula tag {tag!r}")

    @property
    def code(self) -> str:
        """Short serialization code, e.g. ``cl90`` or ``t``."""
        base = {
            "independent": "ind",
            "gaussian": "ga",
            "studentt": "t",
            "clayton": "cl",
            "frank": "fr",
            "gumbel": "gu",
            "plackett": "pl",
        }[self.tag]
        return base + (str(self.rotation) if self.rotation else "")

    @property
    def n_params(self) -> int:
        return len(self.params)


def independent() -> CopulaFamily:
    return CopulaFamily("independent")


def gaussian(rho: float) -> CopulaFamily:
    return CopulaFamily("gaussian", (float(rho),))


def studentt(rho: float, nu: float) -> CopulaFamily:
    return CopulaFamily("studentt", (float(rho), float(nu)))


def clayton(theta: float, rotation: int = 0) -> CopulaFamily:
    return CopulaFamily("clayton", (float(theta),), rotation)


def gumbel(theta: float, rotation: int = 0) -> CopulaFamily:
    return CopulaFamily("gumbel", (float(theta),), rotation)


def frank(theta: float) -> CopulaFamily:
    return CopulaFamily("frank", (float(theta),))


def plackett(theta: float) -> CopulaFamily:
    return CopulaFamily("plackett", (float(theta),))


_CODE_TAGS = {
    "ind": "independent",
    "ga": "gaussian",
    "t": "studentt",
    "cl": "clayton",
    "fr": "frank",
    "gu": "gumbel",
    "pl": "plackett",
}


def split_code(code: str) -> tuple[str, int]:
    """Split a family code like ``cl270`` into (tag, rotation)."""
    for suffix in ("90", "180", "270"):
        if code.endswith(suffix) and code[: -len(suffix)] in _CODE_TAGS:
            return _CODE_TAGS[code[: -len(suffix)]], int(suffix)
    if code in _CODE_TAGS:
        return _CODE_TAGS[code], 0
    raise ParamError(f"unknown copula code {code!r}")


def family_from_code(code: str, params) -> CopulaFamily:
    tag, rotation = split_code(code)
    return CopulaFamily(tag, tuple(float(x) for x in params), rotation)


# ---------------------------------------------------------------------------
# numeric helpers


def _lse_signed(exponents, signs):
    """log|sum_i s_i exp(a_i)| and its sign, elementwise over broadcasts."""
    stacked = np.stack(np.broadcast_arrays(*exponents))
    s = np.asarray(signs, dtype=float).reshape((len(exponents),) + (1,) * (stacked.ndim - 1))
    m = np.max(stacked, axis=0)
    total = np.sum(s * np.exp(stacked - m), axis=0)
    return m + np.log(np.abs(total)), np.sign(total)


def validate_corr_matrix(R: np.ndarray, name: str = "R") -> np.ndarray:
    """Check symmetry, unit diagonal, and positive definiteness."""
    R = np.asarray(R, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise MatrixError(f"{name} must be square")
    if np.max(np.abs(R - R.T)) > 1e-12:
        raise MatrixError(f"{name} is not symmetric")
    if np.max(np.abs(np.diag(R) - 1.0)) > 1e-12:
        raise MatrixError(f"{name} does not have a unit diagonal")
    try:
        np.linalg.cholesky(R)
    except np.linalg.LinAlgError as exc:
        raise MatrixError(f"{name} is not positive definite") from exc
    return R


def _check_open_unit(*arrays):
    for a in arrays:
        if np.any(a <= 0.0) or np.any(a >= 1.0):
            raise DomainError("copula arguments must lie strictly inside (0, 1)")


# ---------------------------------------------------------------------------
# unrotated kernels; u, v are arrays in (0, 1)


def _cl_cdf(th, u, v):
    lu, lv = np.log(u), np.log(v)
    s, _ = _lse_signed([-th * lu, -th * lv, np.zeros(np.broadcast(u, v).shape)], [1.0, 1.0, -1.0])
    return np.exp(-s / th)


def _cl_logpdf(th, u, v):
    lu, lv = np.log(u), np.log(v)
    s, _ = _lse_signed([-th * lu, -th * lv, np.zeros(np.broadcast(u, v).shape)], [1.0, 1.0, -1.0])
    return np.log1p(th) - (th + 1.0) * (lu + lv) - (2.0 + 1.0 / th) * s


def _cl_h2(th, u, v):
    lu, lv = np.log(u), np.log(v)
    s, _ = _lse_signed([-th * lu, -th * lv, np.zeros(np.broadcast(u, v).shape)], [1.0, 1.0, -1.0])
    return np.exp(-(th + 1.0) * lv - (1.0 + 1.0 / th) * s)


def _gu_parts(th, u, v):
    lx, ly = np.log(-np.log(u)), np.log(-np.log(v))
    ls, _ = _lse_signed([th * lx, th * ly], [1.0, 1.0])
    return lx, ly, ls, np.exp(ls / th)


def _gu_cdf(th, u, v):
    _, _, _, a = _gu_parts(th, u, v)
    return np.exp(-a)


def _gu_logpdf(th, u, v):
    lx, ly, ls, a = _gu_parts(th, u, v)
    return (
        -a
        + (th - 1.0) * (lx + ly)
        + (2.0 / th - 2.0) * ls
        + np.log1p((th - 1.0) / a)
        - np.log(u)
        - np.log(v)
    )


def _gu_h2(th, u, v):
    _, ly, ls, a = _gu_parts(th, u, v)
    return np.exp(-a + (th - 1.0) * ly + (1.0 / th - 1.0) * ls - np.log(v))


def _fr_cdf(th, u, v):
    zero = np.zeros(np.broadcast(u, v).shape)
    num, _ = _lse_signed([-th + zero, -th * (u + v), -th * u, -th * v], [1.0, 1.0, -1.0, -1.0])
    den, _ = _lse_signed([-th + zero, zero], [1.0, -1.0])
    return -(num - den) / th


def _fr_logpdf(th, u, v):
    zero = np.zeros(np.broadcast(u, v).shape)
    l1, _ = _lse_signed([zero, -th + zero], [1.0, -1.0])
    ld, _ = _lse_signed([-th + zero, -th * u, -th * v, -th * (u + v)], [-1.0, 1.0, 1.0, -1.0])
    return np.log(abs(th)) + l1 - th * (u + v) - 2.0 * ld


def _fr_h2(th, u, v):
    zero = np.zeros(np.broadcast(u, v).shape)
    lnum, snum = _lse_signed([-th * (u + v), -th * v], [1.0, -1.0])
    lden, sden = _lse_signed([-th + zero, -th * (u + v), -th * u, -th * v], [1.0, 1.0, -1.0, -1.0])
    return snum * sden * np.exp(lnum - lden)


def _pl_disc(th, u, v):
    s = 1.0 + (th - 1.0) * (u + v)
    return s, np.sqrt(s * s - 4.0 * u * v * th * (th - 1.0))


def _pl_cdf(th, u, v):
    s, d = _pl_disc(th, u, v)
    return (s - d) / (2.0 * (th - 1.0))


def _pl_logpdf(th, u, v):
    s, d = _pl_disc(th, u, v)
    return np.log(th) + np.log1p((th - 1.0) * (u + v - 2.0 * u * v)) - 3.0 * np.log(d)


def _pl_h2(th, u, v):
    s, d = _pl_disc(th, u, v)
    return 0.5 * (1.0 - (s - 2.0 * u * th) / d)


def _ga_cdf(rho, u, v):
    # Conditional-CDF quadrature: accurate and deterministic (diagnostics only).
    s = np.sqrt(1.0 - rho * rho)

    def one(ui, vi):
        x, y = ndtri(ui), ndtri(vi)
        f = lambda t: np.exp(-0.5 * t * t) / np.sqrt(2.0 * np.pi) * ndtr((y - rho * t) / s)
        return integrate.quad(f, -np.inf, x, limit=300, epsabs=1e-13, epsrel=1e-12)[0]

    return np.vectorize(one)(u, v)


def _ga_logpdf(rho, u, v):
    x, y = ndtri(u), ndtri(v)
    r2 = rho * rho
    return -0.5 * np.log1p(-r2) - (r2 * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * (1.0 - r2))


def _ga_h2(rho, u, v):
    x, y = ndtri(u), ndtri(v)
    return ndtr((x - rho * y) / np.sqrt(1.0 - rho * rho))


def _t_cdf(rho, nu, u, v):
    s2 = 1.0 - rho * rho

    def one(ui, vi):
        x, y = stats.t.ppf(ui, nu), stats.t.ppf(vi, nu)
        f = lambda t: stats.t.pdf(t, nu) * stats.t.cdf(
            (y - rho * t) / np.sqrt((nu + t * t) * s2 / (nu + 1.0)), nu + 1.0
        )
        return integrate.quad(f, -np.inf, x, limit=400, epsabs=1e-13, epsrel=1e-12)[0]

    return np.vectorize(one)(u, v)


def _t_logpdf(rho, nu, u, v):
    x, y = t_ppf(u, nu), t_ppf(v, nu)
    q = (x * x - 2.0 * rho * x * y + y * y) / (1.0 - rho * rho)
    log_joint = (
        special.gammaln((nu + 2.0) / 2.0)
        - special.gammaln(nu / 2.0)
        - np.log(nu * np.pi)
        - 0.5 * np.log1p(-rho * rho)
        - (nu + 2.0) / 2.0 * np.log1p(q / nu)
    )
    return log_joint - t_logpdf(x, nu) - t_logpdf(y, nu)


def _t_h2(rho, nu, u, v):
    x, y = t_ppf(u, nu), t_ppf(v, nu)
    scale = np.sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0))
    return t_cdf((x - rho * y) / scale, nu + 1.0)


def _base_cdf(fam, u, v):
    tag, p = fam.tag, fam.params
    if tag == "independent":
        return u * v
    if tag == "clayton":
        return _cl_cdf(p[0], u, v)
    if tag == "gumbel":
        return _gu_cdf(p[0], u, v)
    if tag == "frank":
        return _fr_cdf(p[0], u, v)
    if tag == "plackett":
        return _pl_cdf(p[0], u, v)
    if tag == "gaussian":
        return _ga_cdf(p[0], u, v)
    return _t_cdf(p[0], p[1], u, v)


def _base_logpdf(fam, u, v):
    tag, p = fam.tag, fam.params
    if tag == "independent":
        return np.zeros(np.broadcast(u, v).shape)
    if tag == "clayton":
        return _cl_logpdf(p[0], u, v)
    if tag == "gumbel":
        return _gu_logpdf(p[0], u, v)
    if tag == "frank":
        return _fr_logpdf(p[0], u, v)
    if tag == "plackett":
        return _pl_logpdf(p[0], u, v)
    if tag == "gaussian":
        return _ga_logpdf(p[0], u, v)
    return _t_logpdf(p[0], p[1], u, v)


def _base_h2(fam, u, v):
    tag, p = fam.tag, fam.params
    if tag == "independent":
        return u * np.ones(np.broadcast(u, v).shape)
    if tag == "clayton":
        return _cl_h2(p[0], u, v)
    if tag == "gumbel":
        return _gu_h2(p[0], u, v)
    if tag == "frank":
        return _fr_h2(p[0], u, v)
    if tag == "plackett":
        return _pl_h2(p[0], u, v)
    if tag == "gaussian":
        return _ga_h2(p[0], u, v)
    return _t_h2(p[0], p[1], u, v)


# ---------------------------------------------------------------------------
# public two-dimensional surface with rotations


def _cdf2(fam, u, v):
    r = fam.rotation
    if r == 0:
        return _base_cdf(fam, u, v)
    if r == 90:
        return u - _base_cdf(fam, 1.0 - v, u)
    if r == 180:
        return u + v - 1.0 + _base_cdf(fam, 1.0 - u, 1.0 - v)
    return v - _base_cdf(fam, v, 1.0 - u)


def _logpdf2(fam, u, v):
    r = fam.rotation
    if r == 0:
        return _base_logpdf(fam, u, v)
    if r == 90:
        return _base_logpdf(fam, 1.0 - v, u)
    if r == 180:
        return _base_logpdf(fam, 1.0 - u, 1.0 - v)
    return _base_logpdf(fam, v, 1.0 - u)


def _h2(fam, u, v):
    # dC/dv of the rotated copula; base families are exchangeable, so the
    # base first-argument partial is _base_h2 with swapped arguments.
    r = fam.rotation
    if r == 0:
        return _base_h2(fam, u, v)
    if r == 90:
        return _base_h2(fam, u, 1.0 - v)
    if r == 180:
        return 1.0 - _base_h2(fam, 1.0 - u, 1.0 - v)
    return 1.0 - _base_h2(fam, 1.0 - u, v)


def _h1(fam, u, v):
    # dC/du of the rotated copula.
    r = fam.rotation
    if r == 0:
        return _base_h2(fam, v, u)
    if r == 90:
        return 1.0 - _base_h2(fam, 1.0 - v, u)
    if r == 180:
        return 1.0 - _base_h2(fam, 1.0 - v, 1.0 - u)
    return _base_h2(fam, v, 1.0 - u)


def _equicorr(n: int, rho: float) -> np.ndarray:
    R = np.full((n, n), rho)
    np.fill_diagonal(R, 1.0)
    return R


def copula_cdf(fam: CopulaFamily, u) -> float:
    """Copula CDF at a point ``u`` in the open unit hypercube.

    Archimedean/Plackett families and rotations are two-dimensional; the
    elliptical and independence copulas accept any dimension (elliptical
    CDFs beyond N=2 are numerical and meant for diagnostics).
    """
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size < 2:
        raise ParamError("u must be a vector of at least two probabilities")
    _check_open_unit(u)
    n = u.size
    if n == 2:
        return float(_cdf2(fam, u[0], u[1]))
    if fam.rotation != 0:
        raise ParamError("rotations are defined for two-dimensional copulas only")
    if fam.tag == "independent":
        return float(np.prod(u))
    if fam.tag == "gaussian":
        R = _equicorr(n, fam.params[0])
        return float(stats.multivariate_normal(mean=np.zeros(n), cov=R).cdf(ndtri(u)))
    if fam.tag == "studentt":
        rho, nu = fam.params
        R = _equicorr(n, rho)
        x = stats.t.ppf(u, nu)
        return float(
            stats.multivariate_t(shape=R, df=nu).cdf(
                x, random_state=np.random.default_rng(1234), maxpts=200000
            )
        )
    raise ParamError(f"{fam.tag} copula is two-dimensional")


def copula_logdensity(fam: CopulaFamily, u) -> float:
    """Copula log-density at ``u``; boundary points raise ``DomainError``."""
    u = np.asarray(u, dtype=float)
    _check_open_unit(u)
    if u.size == 2:
        return float(_logpdf2(fam, u[0], u[1]))
    if fam.rotation != 0:
        raise ParamError("rotations are defined for two-dimensional copulas only")
    if fam.tag == "independent":
        return 0.0
    if fam.tag == "gaussian":
        return float(gaussian_copula_logdensity_nd(_equicorr(u.size, fam.params[0]), u))
    if fam.tag == "studentt":
        rho, nu = fam.params
        return float(t_copula_logdensity_nd(_equicorr(u.size, rho), nu, u))
    raise ParamError(f"{fam.tag} copula is two-dimensional")


def h_function(fam: CopulaFamily, u, v):
    """Conditional CDF ``dC(u, v)/dv`` of the first argument given the second."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_open_unit(u, v)
    out = _h2(fam, u, v)
    return float(out) if out.ndim == 0 else out


def h_function_first(fam: CopulaFamily, u, v):
    """Conditional CDF ``dC(u, v)/du`` of the second argument given the first."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_open_unit(u, v)
    out = _h1(fam, u, v)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# N-dimensional elliptical copula densities


def gaussian_copula_logdensity_nd(R: np.ndarray, u):
    """Gaussian copula log-density for a full correlation matrix ``R``.

    ``u`` may be a single point (N,) or a stack of points (M, N); the stacked
    form returns one value per row.
    """
    R = validate_corr_matrix(R)
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    pts = np.atleast_2d(u)
    _check_open_unit(pts)
    z = ndtri(pts)
    L = np.linalg.cholesky(R)
    half_logdet = np.sum(np.log(np.diag(L)))
    w = np.linalg.solve(R, z.T).T
    quad = np.einsum("ij,ij->i", z, w - z)
    out = -half_logdet - 0.5 * quad
    return float(out[0]) if single else out


def t_copula_logdensity_nd(R: np.ndarray, nu: float, u):
    """Student-t copula log-density for a full correlation matrix ``R``."""
    if not nu > NU_MIN:
        raise ParamError(f"nu must exceed {NU_MIN}")
    R = validate_corr_matrix(R)
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    pts = np.atleast_2d(u)
    _check_open_unit(pts)
    n = pts.shape[1]
    x = t_ppf(pts, nu)
    L = np.linalg.cholesky(R)
    half_logdet = np.sum(np.log(np.diag(L)))
    w = np.linalg.solve(R, x.T).T
    quad = np.einsum("ij,ij->i", x, w)
    log_joint = (
        special.gammaln((nu + n) / 2.0)
        + (n - 1.0) * special.gammaln(nu / 2.0)
        - n * special.gammaln((nu + 1.0) / 2.0)
        - half_logdet
        - (nu + n) / 2.0 * np.log1p(quad / nu)
    )
    log_marg = -(nu + 1.0) / 2.0 * np.sum(np.log1p(x * x / nu), axis=1)
    out = log_joint - log_marg
    return float(out[0]) if single else out
