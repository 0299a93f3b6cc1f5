# src/fd_oracle.py

"""
Finite-Difference Oracle Module
Crank-Nicolson solve of the barrier problem, independent of the closed form.

Shifting the heat variable by the barrier speed, xi = x + (2 alpha + 1) t, gives
for v(xi, t) = u(x, t):

    u_t  = v_t + (2 alpha + 1) v_xi
    u_xx = v_xixi

so u_t = u_xx becomes the advected heat equation

    v_t = v_xixi - (2 alpha + 1) v_xi,   xi in [0, xi_max], t in [0, sigma^2 T / 2]

with the moving barrier pinned at xi = 0 (v = 0 there), initial data
v(xi, 0) = e^{(alpha+1) xi} - e^{alpha xi} and a far-field Dirichlet value taken
from the no-arbitrage asymptote V ~ S - K e^{-r(T-p)} mapped to heat coordinates.

Space uses second-order central differences (cell Peclet number kept below 2),
time uses Crank-Nicolson after one Rannacher pair of implicit-Euler half steps.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded

from config import config
from src.coordinate_transform import (
    MarketParams,
    TransformParams,
    derive_params,
    from_heat_arrays,
    to_heat_arrays,
)
from src.errors import DomainError, InstabilityError, InvalidParameterError

logger = logging.getLogger(__name__)

MIN_CELLS = 16
# queries beyond this share of xi_max are dominated by the far-field boundary
FAR_FIELD_WARNING_SHARE = 0.75


# --- DATA STRUCTURES ---

@dataclass(frozen=True)
class GridSpec:
    xi_max: float = config.FD_XI_MAX
    n_space: int = config.FD_N_SPACE
    n_time: int = config.FD_N_TIME

    def __post_init__(self):
        if not self.xi_max > 0:
            raise InvalidParameterError(f"xi_max must be > 0, got {self.xi_max}")
        if self.n_space < MIN_CELLS or self.n_time < MIN_CELLS:
            raise InvalidParameterError(
                f"n_space and n_time must be >= {MIN_CELLS}, got ({self.n_space}, {self.n_time})"
            )

    @property
    def dxi(self) -> float:
        return self.xi_max / self.n_space

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.xi_max, self.n_space * factor, self.n_time * factor)


@dataclass
class FdSolution:
    """Grid of v over (xi, t); row n holds time level t[n], row 0 the initial data."""
    xi: np.ndarray
    t: np.ndarray
    values: np.ndarray
    market: MarketParams
    params: TransformParams
    grid: GridSpec

    def value_at(self, xi: float, t: float) -> float:
        """Heat-side v(xi, t): cubic spline in xi, linear in t."""
        if xi < 0 or xi > self.grid.xi_max:
            raise DomainError(f"xi must lie in [0, xi_max={self.grid.xi_max}], got {xi}")
        if t < 0 or t > self.t[-1] * (1 + 1e-12):
            raise DomainError(f"t must lie in [0, {self.t[-1]}], got {t}")
        if xi > FAR_FIELD_WARNING_SHARE * self.grid.xi_max:
            logger.warning(
                f"Query xi={xi:.4g} lies in the outer quarter of the grid (xi_max={self.grid.xi_max}); "
                f"far-field truncation may dominate, consider a larger xi_max"
            )

        n = min(int(np.searchsorted(self.t, t, side="right")) - 1, len(self.t) - 2)
        n = max(n, 0)
        weight = (t - self.t[n]) / (self.t[n + 1] - self.t[n])
        lower = float(CubicSpline(self.xi, self.values[n])(xi))
        upper = float(CubicSpline(self.xi, self.values[n + 1])(xi))
        return (1.0 - weight) * lower + weight * upper

    def price(self, S: float, p: float) -> float:
        """V(S, p) read off the grid; 0 on or below the barrier."""
        x, t, _ = to_heat_arrays(S, p, 0.0, self.market, self.params)
        xi = float(x) + self.params.drift * float(t)
        if xi <= 0:
            return 0.0
        v = self.value_at(xi, float(t))
        _, _, V = from_heat_arrays(x, t, v, self.market, self.params)
        return float(V)

    def to_frame(self) -> pd.DataFrame:
        """Long table with columns xi, t, v."""
        xi_grid, t_grid = np.meshgrid(self.xi, self.t)
        return pd.DataFrame({"xi": xi_grid.ravel(), "t": t_grid.ravel(), "v": self.values.ravel()})

    def dump_csv(self, path: Union[str, Path]) -> Path:
        target = Path(path)
        try:
            self.to_frame().to_csv(target, index=False, lineterminator="\n")
        except OSError as e:
            raise OSError(f"could not write FD grid to {target}: {e}") from e
        logger.info(f"FD grid written to {target}")
        return target


# --- CLOSED FORMS IN (xi, t) ---

def analytic_xi_solution(xi, t, tp: TransformParams):
    """v*(xi, t) = e^{-alpha(alpha+1) t} (e^{(alpha+1) xi} - e^{alpha xi})."""
    a = tp.alpha
    xi, t = np.asarray(xi, dtype=float), np.asarray(t, dtype=float)
    return np.exp(-tp.decay * t) * (np.exp((a + 1.0) * xi) - np.exp(a * xi))


def far_field_value(xi_max: float, t, m: MarketParams, tp: Optional[TransformParams] = None):
    """Heat-side image of S - K e^{-r(T-p)} at xi = xi_max."""
    tp = tp or derive_params(m)
    t = np.asarray(t, dtype=float)
    x = xi_max - tp.drift * t
    S = m.K * np.exp(x)
    p = np.clip(m.T - t / m.time_scale, 0.0, m.T)
    V = S - m.K * np.exp(-m.r * (m.T - p))
    _, _, u = to_heat_arrays(S, p, V, m, tp)
    return u


# --- SCHEME ---

def _operator_coefficients(dxi: float, drift: float):
    """(lower, centre, upper) weights of v_xixi - drift v_xi on a uniform grid."""
    diffusion = 1.0 / dxi ** 2
    advection = drift / (2.0 * dxi)
    return diffusion + advection, -2.0 * diffusion, diffusion - advection


def _apply_operator(v: np.ndarray, coefficients) -> np.ndarray:
    lower, centre, upper = coefficients
    return lower * v[:-2] + centre * v[1:-1] + upper * v[2:]


def _theta_step(
    v: np.ndarray,
    dt: float,
    theta: float,
    coefficients,
    right_old: float,
    right_new: float,
) -> np.ndarray:
    """One theta-scheme step for the interior nodes; v[0] = 0 and v[-1] is the far-field value."""
    lower, centre, upper = coefficients
    m = v.size - 2

    rhs = v[1:-1] + (1.0 - theta) * dt * _apply_operator(v, coefficients)
    rhs[-1] += theta * dt * upper * right_new

    ab = np.zeros((3, m))
    ab[0, 1:] = -theta * dt * upper
    ab[1, :] = 1.0 - theta * dt * centre
    ab[2, :-1] = -theta * dt * lower

    new = np.empty_like(v)
    new[0] = 0.0
    new[1:-1] = solve_banded((1, 1), ab, rhs)
    new[-1] = right_new
    return new


def solve(m: MarketParams, g: Optional[GridSpec] = None) -> FdSolution:
    """
    Crank-Nicolson solve on [0, xi_max] x [0, sigma^2 T/2].

    Raises:
        InvalidParameterError: dxi >= 2 / |2 alpha + 1| (cell Peclet number >= 2)
        InstabilityError: a time level contains non-finite values
    """
    g = g or GridSpec()
    tp = derive_params(m)
    drift = tp.drift
    if abs(drift) > 0 and g.dxi >= 2.0 / abs(drift):
        raise InvalidParameterError(
            f"dxi={g.dxi:.4g} must be < 2/|2 alpha + 1| = {2.0 / abs(drift):.4g} (cell Peclet number < 2)"
        )

    xi = np.linspace(0.0, g.xi_max, g.n_space + 1)
    t = np.linspace(0.0, m.t_max, g.n_time + 1)
    dt = t[1] - t[0]
    boundary = far_field_value(g.xi_max, t, m, tp)
    coefficients = _operator_coefficients(g.dxi, drift)

    logger.info(f"FD solve: {g.n_space}x{g.n_time} grid, xi_max={g.xi_max}, alpha={tp.alpha:.6g}")

    values = np.empty((t.size, xi.size))
    values[0] = np.exp((tp.alpha + 1.0) * xi) - np.exp(tp.alpha * xi)
    values[0, 0] = 0.0

    # Rannacher start: two implicit-Euler half steps
    half_boundary = float(far_field_value(g.xi_max, 0.5 * dt, m, tp))
    v = _theta_step(values[0], 0.5 * dt, 1.0, coefficients, boundary[0], half_boundary)
    v = _theta_step(v, 0.5 * dt, 1.0, coefficients, half_boundary, boundary[1])
    values[1] = v

    for n in range(1, g.n_time):
        v = _theta_step(v, dt, 0.5, coefficients, boundary[n], boundary[n + 1])
        if not np.all(np.isfinite(v)):
            logger.error(f"FD solve produced non-finite values at step {n + 1}")
            raise InstabilityError(f"non-finite values at time level {n + 1} (t={t[n + 1]:.6g})")
        values[n + 1] = v
        logger.debug(f"FD step {n + 1}/{g.n_time} done")

    logger.info(f"FD solve finished, min v = {values.min():.3e}")
    return FdSolution(xi=xi, t=t, values=values, market=m, params=tp, grid=g)


def cn_residual(values: np.ndarray, xi: np.ndarray, t: np.ndarray, drift: float, theta: float = 0.5) -> float:
    """
    Max-norm residual of the theta scheme applied to a grid function:

        (v^{n+1} - v^n) / dt - theta L v^{n+1} - (1 - theta) L v^n   at interior nodes
    """
    dxi = xi[1] - xi[0]
    coefficients = _operator_coefficients(dxi, drift)
    worst = 0.0
    for n in range(t.size - 1):
        dt = t[n + 1] - t[n]
        residual = (values[n + 1, 1:-1] - values[n, 1:-1]) / dt - (
            theta * _apply_operator(values[n + 1], coefficients)
            + (1.0 - theta) * _apply_operator(values[n], coefficients)
        )
        worst = max(worst, float(np.max(np.abs(residual))))
    return worst


def convergence_study(m: MarketParams, grids: Sequence[GridSpec]) -> pd.DataFrame:
    """
    Max-norm error against the closed form on each grid, with the observed order
    log(e_prev / e) / log(dxi_prev / dxi) between consecutive grids.
    """
    if len(grids) < 3:
        raise InvalidParameterError(f"convergence study needs at least 3 grids, got {len(grids)}")
    for coarse, fine in zip(grids, grids[1:]):
        if fine.n_space != 2 * coarse.n_space or fine.n_time != 2 * coarse.n_time:
            logger.warning(f"Grids {coarse} -> {fine} are not a factor-2 refinement")

    tp = derive_params(m)
    rows = []
    for g in grids:
        sol = solve(m, g)
        xi_grid, t_grid = np.meshgrid(sol.xi, sol.t)
        error = float(np.max(np.abs(sol.values - analytic_xi_solution(xi_grid, t_grid, tp))))
        rows.append({
            "n_space": g.n_space,
            "n_time": g.n_time,
            "dxi": g.dxi,
            "dt": float(sol.t[1] - sol.t[0]),
            "max_error": error,
        })

    frame = pd.DataFrame(rows)
    ratios = frame["max_error"].shift(1) / frame["max_error"]
    steps = frame["dxi"].shift(1) / frame["dxi"]
    frame["observed_order"] = np.log(ratios) / np.log(steps)
    logger.info(f"Convergence study:\n{frame.to_string(index=False)}")
    return frame
