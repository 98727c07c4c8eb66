"""Trivariate densities assembled from two-dimensional copulas.

A three-variable joint density factors into two unconditional bivariate
copulas plus one conditional copula whose arguments are h-function outputs.
There are three such factorizations depending on which variable conditions
the third copula; they are labelled Pivot1, Pivot2, and Pivot3 (the pivot is
the conditioning variable).  Edge order convention:

* Pivot1: edges = (c12, c13, c23|1)
* Pivot2: edges = (c12, c23, c13|2)
* Pivot3: edges = (c13, c23, c12|3)

The conditional copula's parameters do not depend on the conditioning value
(simplifying assumption; the conditional edge is a single parametric family).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .copulas import (
    FAMILY_MENU,
    CopulaFamily,
    _h1,
    _h2,
    _logpdf2,
    split_code,
)
from .errors import ParamError
from .skewt import SkewTParams, skewt_cdf, skewt_logpdf

CLAMP = 1e-12

__all__ = [
    "SpecTemplate",
    "PairCopulaSpec",
    "pair_copula_logdensity_u",
    "pair_logdensity",
    "pair_logdensity_rows",
    "enumerate_specs",
    "parse_spec_code",
]

_PIVOTS = (1, 2, 3)


@dataclass(frozen=True)
class SpecTemplate:
    """Structural choice of pivot and edge families, without parameters."""

    pivot: int
    edges: tuple[str, str, str]

    def __post_init__(self):
        if self.pivot not in _PIVOTS:
            raise ParamError(f"pivot must be one of {_PIVOTS}")
        for code in self.edges:
            split_code(code)  # raises on unknown codes

    @property
    def code(self) -> str:
        return f"P{self.pivot}:" + ":".join(self.edges)


@dataclass(frozen=True)
class PairCopulaSpec:
    """Fully parameterized trivariate model: pivot, 3 edge copulas, 3 marginals."""

    pivot: int
    edge_copulas: tuple[CopulaFamily, CopulaFamily, CopulaFamily]
    marginals: tuple[SkewTParams, SkewTParams, SkewTParams]

    def __post_init__(self):
        if self.pivot not in _PIVOTS:
            raise ParamError(f"pivot must be one of {_PIVOTS}")
        if len(self.edge_copulas) != 3 or len(self.marginals) != 3:
            raise ParamError("three edge copulas and three marginals are required")

    @property
    def code(self) -> str:
        return f"P{self.pivot}:" + ":".join(c.code for c in self.edge_copulas)

    @property
    def n_copula_params(self) -> int:
        return sum(c.n_params for c in self.edge_copulas)


def enumerate_specs(families=FAMILY_MENU, pivots=_PIVOTS) -> list[SpecTemplate]:
    """Cartesian product of pivots and per-edge family choices.

    Order is pivot-major, then edge1, edge2, edge3, so the first template of
    the default menu is ``P1:ga:ga:ga``.  The default 12-family menu over
    three pivots yields 5,184 templates.
    """
    families = tuple(families)
    for code in families:
        split_code(code)
    return [
        SpecTemplate(p, (e1, e2, e3))
        for p in pivots
        for e1, e2, e3 in itertools.product(families, repeat=3)
    ]


def parse_spec_code(code: str) -> SpecTemplate:
    parts = code.split(":")
    if len(parts) != 4 or not parts[0].startswith("P"):
        raise ParamError(f"malformed pair-copula code {code!r}")
    return SpecTemplate(int(parts[0][1:]), (parts[1], parts[2], parts[3]))


def _clip_count(a: np.ndarray) -> tuple[np.ndarray, int]:
    clipped = np.clip(a, CLAMP, 1.0 - CLAMP)
    return clipped, int(np.count_nonzero(clipped != a))


def pair_copula_logdensity_u(
    pivot: int,
    edges: tuple[CopulaFamily, CopulaFamily, CopulaFamily],
    u1,
    u2,
    u3,
) -> tuple[np.ndarray, int]:
    """Copula-only log-density on the unit cube, broadcast over arguments.

    ``u1, u2, u3`` may have any mutually broadcastable shapes (e.g. the three
    axes of a grid); h-function outputs that escape ``(CLAMP, 1 - CLAMP)``
    are clipped and counted.
    """
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    u3 = np.asarray(u3, dtype=float)
    e1, e2, e3 = edges
    if pivot == 1:
        ll = _logpdf2(e1, u1, u2) + _logpdf2(e2, u1, u3)
        a, c1 = _clip_count(_h1(e1, u1, u2))  # F(2|1)
        b, c2 = _clip_count(_h1(e2, u1, u3))  # F(3|1)
    elif pivot == 2:
        ll = _logpdf2(e1, u1, u2) + _logpdf2(e2, u2, u3)
        a, c1 = _clip_count(_h2(e1, u1, u2))  # F(1|2)
        b, c2 = _clip_count(_h1(e2, u2, u3))  # F(3|2)
    elif pivot == 3:
        ll = _logpdf2(e1, u1, u3) + _logpdf2(e2, u2, u3)
        a, c1 = _clip_count(_h2(e1, u1, u3))  # F(1|3)
        b, c2 = _clip_count(_h2(e2, u2, u3))  # F(2|3)
    else:
        raise ParamError(f"pivot must be one of {_PIVOTS}")
    return ll + _logpdf2(e3, a, b), c1 + c2


def pair_logdensity_rows(spec: PairCopulaSpec, x: np.ndarray) -> tuple[np.ndarray, int]:
    """Row-wise log-density over an (M, 3) array plus the clamp count.

    Marginal CDF values and h-function outputs are clipped into
    ``[CLAMP, 1 - CLAMP]`` before they feed a copula; the number of clipped
    entries is reported for diagnostics.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != 3:
        raise ParamError("pair-copula models are three-dimensional")
    clamped = 0
    u = np.empty_like(x)
    ll = np.zeros(x.shape[0])
    for i in range(3):
        u[:, i], c = _clip_count(skewt_cdf(x[:, i], spec.marginals[i]))
        clamped += c
        ll += skewt_logpdf(x[:, i], spec.marginals[i])
    cll, c = pair_copula_logdensity_u(
        spec.pivot, spec.edge_copulas, u[:, 0], u[:, 1], u[:, 2]
    )
    return ll + cll, clamped + c


def pair_logdensity(spec: PairCopulaSpec, x) -> float:
    """Joint log-density of the trivariate model at a single point."""
    ll, _ = pair_logdensity_rows(spec, np.asarray(x, dtype=float).reshape(1, 3))
    return float(ll[0])
