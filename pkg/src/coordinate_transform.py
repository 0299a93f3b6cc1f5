# src/coordinate_transform.py

"""
Coordinate Transform Module
Invertible change of variables between Black-Scholes coordinates (S, p, V)
and heat-equation coordinates (x, t, u):

    t = (sigma^2 / 2) (T - p)     scaled time-to-maturity, p = T maps to t = 0
    S = K e^x                     log-moneyness
    w = e^{alpha x} V
    y = e^{beta t} w
    u = y / K

With alpha = (2r/sigma^2 - 1) / 2 and beta = (2r/sigma^2 + 1)^2 / 4 the
Black-Scholes equation V_p + sigma^2 S^2 V_SS / 2 + r S V_S - r V = 0
becomes u_t = u_xx. The production path applies the three exponential
substitutions as one factor e^{alpha x + beta t} / K; per-stage values are
available from transform_stages() for debugging.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

from config import config
from src.errors import DomainError, InvalidParameterError, StepSizeError
from src.finite_differences import central_partials, stencil_reach

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]
ValueFn = Callable[[float, float], float]


# --- DATA STRUCTURES ---

@dataclass(frozen=True)
class MarketParams:
    """Black-Scholes problem data: rate r, volatility sigma, strike K, maturity T."""
    r: float
    sigma: float
    K: float
    T: float

    def __post_init__(self):
        validate_market(self)

    @property
    def time_scale(self) -> float:
        """sigma^2 / 2, the factor between calendar time and heat time."""
        return 0.5 * self.sigma ** 2

    @property
    def t_max(self) -> float:
        """Heat time at p = 0."""
        return self.time_scale * self.T


@dataclass(frozen=True)
class TransformParams:
    alpha: float
    beta: float

    @property
    def drift(self) -> float:
        """2 alpha + 1 = 2r / sigma^2, the heat-side speed of the moving barrier."""
        return 2.0 * self.alpha + 1.0

    @property
    def decay(self) -> float:
        """alpha (alpha + 1)."""
        return self.alpha * (self.alpha + 1.0)


@dataclass(frozen=True)
class BSPoint:
    S: float
    p: float
    V: float = 0.0

    def __post_init__(self):
        if not self.S > 0:
            raise DomainError(f"S must be > 0 (log map undefined), got S={self.S}")


@dataclass(frozen=True)
class HeatPoint:
    x: float
    t: float
    u: float = 0.0


class StageLabel(Enum):
    V = "V"
    W = "w"
    Y = "y"
    U = "u"


@dataclass(frozen=True)
class TransformStage:
    label: StageLabel
    value: float


# --- VALIDATION ---

def validate_market(m: MarketParams) -> None:
    """Raise InvalidParameterError naming the first violated market invariant."""
    for name, value in (("r", m.r), ("sigma", m.sigma), ("K", m.K), ("T", m.T)):
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise InvalidParameterError(f"{name} must be a finite number, got {value!r}")
    if m.sigma <= 0:
        raise InvalidParameterError(f"sigma must be > 0, got {m.sigma}")
    if m.K <= 0:
        raise InvalidParameterError(f"K must be > 0, got {m.K}")
    if m.T <= 0:
        raise InvalidParameterError(f"T must be > 0, got {m.T}")
    if m.r < 0:
        raise InvalidParameterError(f"r must be >= 0, got {m.r}")


def derive_params(m: MarketParams) -> TransformParams:
    """alpha = (2r/sigma^2 - 1)/2, beta = (2r/sigma^2 + 1)^2/4."""
    validate_market(m)
    k = 2.0 * m.r / m.sigma ** 2
    return TransformParams(alpha=0.5 * (k - 1.0), beta=0.25 * (k + 1.0) ** 2)


def _as_output(value: np.ndarray, like: ArrayLike) -> ArrayLike:
    return float(value) if np.ndim(like) == 0 else value


# --- FORWARD AND INVERSE MAPS ---

def to_heat_arrays(
    S: ArrayLike,
    p: ArrayLike,
    V: ArrayLike,
    m: MarketParams,
    tp: Optional[TransformParams] = None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised (S, p, V) -> (x, t, u)."""
    tp = tp or derive_params(m)
    S, p, V = (np.asarray(a, dtype=float) for a in (S, p, V))
    if np.any(~(S > 0)):
        raise DomainError(f"S must be > 0, got min S={np.min(S)}")
    if np.any((p < 0) | (p > m.T)):
        raise DomainError(f"p must lie in [0, T={m.T}], got range [{np.min(p)}, {np.max(p)}]")

    x = np.log(S / m.K)
    t = m.time_scale * (m.T - p)
    u = np.exp(tp.alpha * x + tp.beta * t) * V / m.K
    return x, t, u


def from_heat_arrays(
    x: ArrayLike,
    t: ArrayLike,
    u: ArrayLike,
    m: MarketParams,
    tp: Optional[TransformParams] = None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised (x, t, u) -> (S, p, V), the exact inverse of to_heat_arrays."""
    tp = tp or derive_params(m)
    x, t, u = (np.asarray(a, dtype=float) for a in (x, t, u))
    slack = 1e-12 * m.t_max
    if np.any((t < -slack) | (t > m.t_max + slack)):
        raise DomainError(f"t must lie in [0, sigma^2 T/2={m.t_max}], got range [{np.min(t)}, {np.max(t)}]")

    S = m.K * np.exp(x)
    p = np.clip(m.T - t / m.time_scale, 0.0, m.T)
    V = m.K * u * np.exp(-(tp.alpha * x + tp.beta * t))
    return S, p, V


def to_heat(pt: BSPoint, m: MarketParams) -> HeatPoint:
    x, t, u = to_heat_arrays(pt.S, pt.p, pt.V, m)
    return HeatPoint(x=float(x), t=float(t), u=float(u))


def from_heat(pt: HeatPoint, m: MarketParams) -> BSPoint:
    S, p, V = from_heat_arrays(pt.x, pt.t, pt.u, m)
    return BSPoint(S=float(S), p=float(p), V=float(V))


def transform_stages(pt: BSPoint, m: MarketParams) -> List[TransformStage]:
    """Per-stage values V -> w -> y -> u at one point (debug accessor)."""
    tp = derive_params(m)
    x, t, _ = to_heat_arrays(pt.S, pt.p, 0.0, m, tp)
    w = math.exp(tp.alpha * float(x)) * pt.V
    y = math.exp(tp.beta * float(t)) * w
    stages = [
        TransformStage(StageLabel.V, pt.V),
        TransformStage(StageLabel.W, w),
        TransformStage(StageLabel.Y, y),
        TransformStage(StageLabel.U, y / m.K),
    ]
    logger.debug(f"Transform stages at S={pt.S}, p={pt.p}: {[(s.label.value, s.value) for s in stages]}")
    return stages


def to_heat_function(value_fn: ValueFn, m: MarketParams) -> ValueFn:
    """Image u(x, t) of a Black-Scholes-side function V(S, p)."""
    tp = derive_params(m)

    def u_fn(x: float, t: float) -> float:
        S = m.K * math.exp(x)
        p = m.T - t / m.time_scale
        return math.exp(tp.alpha * x + tp.beta * t) * value_fn(S, p) / m.K

    return u_fn


def from_heat_function(u_fn: ValueFn, m: MarketParams) -> ValueFn:
    """Image V(S, p) of a heat-side function u(x, t)."""
    tp = derive_params(m)

    def value_fn(S: float, p: float) -> float:
        x = math.log(S / m.K)
        t = m.time_scale * (m.T - p)
        return m.K * u_fn(x, t) * math.exp(-(tp.alpha * x + tp.beta * t))

    return value_fn


def heat_barrier(t: ArrayLike, tp: TransformParams) -> ArrayLike:
    """Heat-side image x = -(2 alpha + 1) t of the barrier S = K e^{-r(T-p)}."""
    return _as_output(-tp.drift * np.asarray(t, dtype=float), t)


def terminal_condition_heat(x: ArrayLike, tp: TransformParams) -> ArrayLike:
    """u(x, 0) = max{e^{(alpha+1)x} - e^{alpha x}, 0}: the image of max{S - K, 0}."""
    xs = np.asarray(x, dtype=float)
    positive = np.maximum(xs, 0.0)
    values = np.where(xs >= 0, np.exp((tp.alpha + 1.0) * positive) - np.exp(tp.alpha * positive), 0.0)
    return _as_output(values, x)


# --- PDE RESIDUALS ---

def bs_residual(
    value_fn: ValueFn,
    S: float,
    p: float,
    m: MarketParams,
    h: Optional[Tuple[float, float]] = None,
    order: int = 2,
) -> float:
    """
    Central-difference estimate of V_p + sigma^2 S^2 V_SS / 2 + r S V_S - r V.

    Args:
        value_fn: V(S, p)
        S, p: Evaluation point
        m: Market parameters
        h: Absolute steps (h_S, h_p); defaults to FD_STEP relative to S and T
        order: Stencil order (2 or 4)
    """
    h_S, h_p = h if h is not None else (config.FD_STEP * S, config.FD_STEP * m.T)
    reach = stencil_reach(order)
    if h_S <= 0 or h_p <= 0:
        raise StepSizeError(f"step sizes must be > 0, got h=({h_S}, {h_p})")
    if S - reach * h_S <= 0 or p - reach * h_p < 0 or p + reach * h_p > m.T:
        raise StepSizeError(
            f"stencil at S={S}, p={p} with h=({h_S}, {h_p}) leaves S > 0, p in [0, {m.T}]"
        )

    d = central_partials(value_fn, S, p, h_S, h_p, order)
    return d.d2 + 0.5 * m.sigma ** 2 * S ** 2 * d.d11 + m.r * S * d.d1 - m.r * d.value


def heat_residual(
    u_fn: ValueFn,
    x: float,
    t: float,
    h: Optional[Tuple[float, float]] = None,
    order: int = 2,
) -> float:
    """Central-difference estimate of u_t - u_xx."""
    h_x, h_t = h if h is not None else (config.FD_STEP * max(1.0, abs(x)), config.FD_STEP)
    reach = stencil_reach(order)
    if h_x <= 0 or h_t <= 0:
        raise StepSizeError(f"step sizes must be > 0, got h=({h_x}, {h_t})")
    if t - reach * h_t < 0:
        raise StepSizeError(f"stencil at t={t} with h_t={h_t} reaches t < 0")

    d = central_partials(u_fn, x, t, h_x, h_t, order)
    return d.d2 - d.d11
