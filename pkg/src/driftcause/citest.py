"""Conditional independence tests on categorical records.

The g-square (likelihood-ratio) test is the workhorse; the d-separation
oracle answers the same queries from a known graph and is what discovery
is validated against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Protocol

import numpy as np

from .errors import DataError, UnknownFeatureError
from .graph import Dag
from .records import Records

DEFAULT_ALPHA = 0.05
DEFAULT_ADEQUACY = 10.0

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10000


def _gamma_p_series(a, x):
    # lower regularized gamma, converges fast for x < a + 1
    term = total = 1.0 / a
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_q_fraction(a, x):
    # upper regularized gamma by modified Lentz, for x >= a + 1
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gammaincc(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x)."""
    if a <= 0 or x < 0:
        raise ValueError(f"gammaincc needs a > 0 and x >= 0, got a={a}, x={x}")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _gamma_p_series(a, x))
    return min(1.0, _gamma_q_fraction(a, x))


def chi2_sf(x: float, k: int) -> float:
    """Survival function of the chi-square distribution with ``k`` degrees of freedom."""
    if k < 1 or int(k) != k:
        raise ValueError(f"degrees of freedom must be a positive integer, got {k}")
    if not x >= 0:
        raise ValueError(f"chi-square statistic must be non-negative, got {x}")
    if math.isinf(x):
        return 0.0
    return gammaincc(k / 2.0, x / 2.0)


@dataclass(frozen=True)
class CiResult:
    """Outcome of one conditional independence query.

    ``independent`` follows ``p_value > alpha`` unless the sample was too
    small for the table (``reliable`` is False), in which case the test
    defaults to independence.
    """

    x: str
    y: str
    z: tuple[str, ...]
    statistic: float
    dof: int
    p_value: float
    independent: bool
    reliable: bool = True


class CiTest(Protocol):
    features: tuple[str, ...]

    def __call__(self, x: str, y: str, z: Iterable[str] = ()) -> CiResult: ...


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    """Counts indexed by (z-stratum, x-state, y-state); only observed strata are kept."""

    counts: np.ndarray

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    def g_statistic(self) -> tuple[float, int]:
        """G statistic and structural-zero adjusted degrees of freedom."""
        counts = self.counts.astype(float)
        nx = counts.sum(axis=2)
        ny = counts.sum(axis=1)
        ns = nx.sum(axis=1)
        expected = nx[:, :, None] * ny[:, None, :] / ns[:, None, None]
        observed = counts > 0
        g = 2.0 * float(np.sum(counts[observed] * np.log(counts[observed] / expected[observed])))
        rx = np.count_nonzero(nx, axis=1) - 1
        ry = np.count_nonzero(ny, axis=1) - 1
        dof = int(np.sum(np.clip(rx * ry, 0, None)))
        return max(g, 0.0), dof


def contingency_table(data: Records, x: str, y: str, z: Iterable[str] = ()) -> ContingencyTable:
    z = list(z)
    ix, iy = data.column_index(x), data.column_index(y)
    cx, cy = data.cardinalities[ix], data.cardinalities[iy]
    if z:
        zi = [data.column_index(c) for c in z]
        block = data.values[:, zi]
        if math.prod(data.cardinalities[i] for i in zi) < 2 ** 62:
            codes = np.ravel_multi_index(block.T, [data.cardinalities[i] for i in zi])
            _, strata = np.unique(codes, return_inverse=True)
        else:
            _, strata = np.unique(block, axis=0, return_inverse=True)
        strata = strata.reshape(-1)
        ns = int(strata.max()) + 1
    else:
        strata = np.zeros(len(data), dtype=np.int64)
        ns = 1
    flat = (strata * cx + data.values[:, ix]) * cy + data.values[:, iy]
    counts = np.bincount(flat, minlength=ns * cx * cy).reshape(ns, cx, cy)
    return ContingencyTable(counts)


def g_square(data: Records, x: str, y: str, z: Iterable[str] = (),
             alpha: float = DEFAULT_ALPHA, adequacy: float = DEFAULT_ADEQUACY) -> CiResult:
    """Likelihood-ratio test of x independent of y given z.

    The result does not depend on the argument order of x and y or on the
    order of z: both are canonicalised by column position first.
    """
    z = tuple(z)
    if len(data) == 0:
        raise DataError("g-square test on empty data")
    if x == y or x in z or y in z:
        raise DataError(f"invalid query {x!r}, {y!r} | {list(z)}")
    a, b = sorted((x, y), key=data.column_index)
    zs = sorted(z, key=data.column_index)
    table = contingency_table(data, a, b, zs)
    g, dof = table.g_statistic()
    p = chi2_sf(g, dof) if dof > 0 else 1.0
    reliable = len(data) >= adequacy * dof
    independent = p > alpha if reliable else True
    return CiResult(x, y, z, g, dof, p, independent, reliable)


class GSquareTest:
    """g-square test bound to one data table."""

    def __init__(self, data: Records, alpha: float = DEFAULT_ALPHA,
                 adequacy: float = DEFAULT_ADEQUACY):
        if not 0 < alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
        self.data = data
        self.alpha = alpha
        self.adequacy = adequacy
        self.features = data.names

    def __call__(self, x, y, z=()):
        return g_square(self.data, x, y, z, self.alpha, self.adequacy)


class OracleTest:
    """Answers CI queries by d-separation in a known DAG."""

    def __init__(self, truth: Dag):
        self.truth = truth
        self.features = truth.nodes

    def __call__(self, x, y, z=()):
        z = tuple(z)
        for f in (x, y, *z):
            if f not in self.truth:
                raise UnknownFeatureError(f)
        sep = self.truth.d_separated(x, y, z)
        return CiResult(x, y, z, 0.0, 0, 1.0 if sep else 0.0, sep, True)


def oracle_ci(truth: Dag) -> OracleTest:
    return OracleTest(truth)
