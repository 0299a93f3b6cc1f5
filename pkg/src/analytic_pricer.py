# src/analytic_pricer.py

"""
Analytic Pricer Module
Closed-form results of the symmetry reduction:

    heat side:   u(x, t) = e^{(alpha+1)x + (alpha+1)^2 t} - e^{alpha x + alpha^2 t}
    barrier:     S = g(p) = K e^{-r(T-p)}   (heat side: x = -(2 alpha + 1) t)
    price:       V = S - K e^{-r(T-p)} for S >= g(p), 0 otherwise

The price is linear in S, so sensitivities are exact: delta = 1, gamma = 0,
theta = -r K e^{-r(T-p)}.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional

import numpy as np
import pandas as pd

from config import config
from src.coordinate_transform import ArrayLike, MarketParams, TransformParams, validate_market
from src.errors import DomainError, RegionError

logger = logging.getLogger(__name__)


# --- ENUMERATIONS AND DATA CLASSES ---

class Region(Enum):
    INTERIOR = "interior"
    BARRIER = "barrier"
    OUTSIDE = "outside"
    TERMINAL = "terminal"


@dataclass(frozen=True)
class PriceQuery:
    S: float
    p: float

    def validate(self, m: MarketParams) -> None:
        if not (isinstance(self.S, (int, float)) and math.isfinite(self.S) and self.S > 0):
            raise DomainError(f"S must be > 0, got S={self.S}")
        if not 0 <= self.p <= m.T:
            raise DomainError(f"p must lie in [0, T={m.T}], got p={self.p}")


@dataclass(frozen=True)
class PriceResult:
    value: float
    region: Region
    barrier_level: float

    @property
    def knocked_out(self) -> bool:
        return self.region in (Region.BARRIER, Region.OUTSIDE)


@dataclass(frozen=True)
class Greeks:
    delta: float
    gamma: float
    theta: float


# --- CLOSED FORMS ---

def payoff(S: ArrayLike, K: float) -> ArrayLike:
    """max{S - K, 0}."""
    values = np.maximum(np.asarray(S, dtype=float) - K, 0.0)
    return float(values) if np.ndim(S) == 0 else values


def heat_solution(x: ArrayLike, t: ArrayLike, tp: TransformParams) -> ArrayLike:
    """Invariant solution of u_t = u_xx with A = 1, B = -1."""
    x_arr = np.asarray(x, dtype=float)
    t_arr = np.asarray(t, dtype=float)
    a = tp.alpha
    values = np.exp((a + 1.0) * x_arr + (a + 1.0) ** 2 * t_arr) - np.exp(a * x_arr + a ** 2 * t_arr)
    return float(values) if np.ndim(values) == 0 else values


def barrier_level(p: ArrayLike, m: MarketParams) -> ArrayLike:
    """g(p) = K e^{-r(T-p)}, the discounted strike."""
    p_arr = np.asarray(p, dtype=float)
    if np.any((p_arr < 0) | (p_arr > m.T)):
        raise DomainError(f"p must lie in [0, T={m.T}], got range [{np.min(p_arr)}, {np.max(p_arr)}]")
    levels = m.K * np.exp(-m.r * (m.T - p_arr))
    return float(levels) if np.ndim(p) == 0 else levels


def classify(S: float, level: float, at_maturity: bool, rtol: Optional[float] = None) -> Region:
    """Region of (S, p) relative to the barrier, with a relative tolerance on S - g(p)."""
    gap = S - level
    if abs(gap) <= (config.BARRIER_RTOL if rtol is None else rtol) * level:
        return Region.BARRIER
    if gap < 0:
        return Region.OUTSIDE
    return Region.TERMINAL if at_maturity else Region.INTERIOR


def price(q: PriceQuery, m: MarketParams, rtol: Optional[float] = None) -> PriceResult:
    """
    Piecewise closed-form price.

    Returns S - K e^{-r(T-p)} in the interior, payoff(S, K) at p = T and
    0 on or below the barrier, with the matching region flag. rtol widens
    the barrier band (default BARRIER_RTOL).
    """
    validate_market(m)
    q.validate(m)
    level = barrier_level(q.p, m)
    at_maturity = q.p == m.T
    region = classify(q.S, level, at_maturity, rtol)

    if region in (Region.BARRIER, Region.OUTSIDE):
        value = 0.0
    elif region is Region.TERMINAL:
        value = payoff(q.S, m.K)
    else:
        value = q.S - level

    logger.debug(f"price(S={q.S}, p={q.p}) = {value} [{region.value}]")
    return PriceResult(value=value, region=region, barrier_level=level)


def greeks(q: PriceQuery, m: MarketParams, rtol: Optional[float] = None) -> Greeks:
    """Analytic delta, gamma and theta (derivative in calendar time p)."""
    result = price(q, m, rtol)
    if result.knocked_out:
        raise RegionError(
            f"greeks are undefined on or below the barrier (S={q.S}, g(p)={result.barrier_level}, "
            f"region={result.region.value})"
        )
    return Greeks(delta=1.0, gamma=0.0, theta=-m.r * result.barrier_level)


def price_surface(
    spots: Iterable[float],
    times: Iterable[float],
    m: MarketParams,
    include_barrier: bool = True,
    rtol: Optional[float] = None,
) -> pd.DataFrame:
    """
    Price over an (S, p) grid as a long table with columns S, p, V, region.

    With include_barrier, each time slice also carries the node S = g(p)
    so the knock-out line appears explicitly in the table.
    """
    rows = []
    spot_list = [float(s) for s in spots]
    for p in (float(p) for p in times):
        slice_spots = list(spot_list)
        if include_barrier:
            slice_spots.append(barrier_level(p, m))
        for S in sorted(slice_spots):
            result = price(PriceQuery(S=S, p=p), m, rtol)
            rows.append({"S": S, "p": p, "V": result.value, "region": result.region.value})

    frame = pd.DataFrame(rows, columns=["S", "p", "V", "region"])
    logger.info(f"Built price surface with {len(frame)} nodes")
    return frame


def default_spot_grid(m: MarketParams, n_spots: Optional[int] = None) -> np.ndarray:
    """Spots from the barrier at p=0 up to twice the strike."""
    n = n_spots or config.SURFACE_SPOTS
    return np.linspace(barrier_level(0.0, m), 2.0 * m.K, n)
