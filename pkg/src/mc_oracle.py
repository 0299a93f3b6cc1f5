# src/mc_oracle.py

"""
Monte Carlo Oracle Module
Risk-neutral GBM paths knocked out at the moving barrier S = g(p) = K e^{-r(T-p)}.

In log space the distance to the barrier, d(p) = ln S(p) - ln g(p), is a Brownian
motion with constant drift -sigma^2/2 and volatility sigma, because ln g is linear
in p. Conditional on its endpoints d0, d1 > 0 over a step of length dp, the
probability that it touched zero in between is exp(-2 d0 d1 / (sigma^2 dp)), so
continuous monitoring is recovered exactly by weighting each path with the
product of (1 - exp(-2 d0 d1 / (sigma^2 dp))) over its steps.

Each path draws from its own counter-based Philox stream keyed by (seed, path
index), so estimates do not depend on batch size or worker count.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.special import ndtri

from config import config
from src.analytic_pricer import barrier_level
from src.coordinate_transform import MarketParams, validate_market
from src.errors import DomainError, InvalidParameterError

logger = logging.getLogger(__name__)

MIN_PATHS = 1000
MIN_STEPS = 8
_UNIT = 2.0 ** -53


# --- DATA STRUCTURES ---

@dataclass(frozen=True)
class McConfig:
    n_paths: int = config.MC_PATHS
    n_steps: int = config.MC_STEPS
    seed: int = config.MC_SEED
    bridge_correction: bool = True
    binary_killing: bool = False
    batch_size: int = config.MC_BATCH_SIZE
    workers: int = config.MC_WORKERS

    def __post_init__(self):
        if self.n_paths < MIN_PATHS:
            raise InvalidParameterError(f"n_paths must be >= {MIN_PATHS}, got {self.n_paths}")
        if self.n_steps < MIN_STEPS:
            raise InvalidParameterError(f"n_steps must be >= {MIN_STEPS}, got {self.n_steps}")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidParameterError(f"seed must lie in [0, 2^64), got {self.seed}")
        if self.batch_size < 1 or self.workers < 1:
            raise InvalidParameterError(
                f"batch_size and workers must be >= 1, got ({self.batch_size}, {self.workers})"
            )

    def with_steps(self, n_steps: int) -> "McConfig":
        return McConfig(
            n_paths=self.n_paths, n_steps=n_steps, seed=self.seed,
            bridge_correction=self.bridge_correction, binary_killing=self.binary_killing,
            batch_size=self.batch_size, workers=self.workers,
        )


@dataclass(frozen=True)
class McEstimate:
    price: float
    std_error: float
    knockout_fraction: float
    n_paths: int
    n_steps: int
    bridge_correction: bool
    batch_means: Tuple[float, ...] = ()
    batch_sizes: Tuple[int, ...] = ()

    @property
    def relative_error(self) -> float:
        return self.std_error / self.price if self.price > 0 else float("inf")


# --- RANDOM NUMBERS ---

def path_uniforms(seed: int, path_index: int, count: int) -> np.ndarray:
    """Uniforms in (0, 1) from the Philox stream of one path: top 53 bits plus half an ulp."""
    bit_generator = np.random.Philox(key=(seed << 64) | path_index)
    raw = bit_generator.random_raw(count)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _UNIT


def _batch_draws(seed: int, start: int, stop: int, n_steps: int, extra_uniforms: bool) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    width = 2 * n_steps if extra_uniforms else n_steps
    uniforms = np.stack([path_uniforms(seed, i, width) for i in range(start, stop)])
    normals = ndtri(uniforms[:, :n_steps])
    return normals, (uniforms[:, n_steps:] if extra_uniforms else None)


# --- SIMULATION ---

def _barrier_distances(S0: float, m: MarketParams, normals: np.ndarray) -> np.ndarray:
    """d_i = ln S(p_i) - ln g(p_i) at the monitoring dates p_0 = 0 .. p_n = T."""
    n_steps = normals.shape[1]
    dp = m.T / n_steps
    increments = (m.r - 0.5 * m.sigma ** 2) * dp + m.sigma * np.sqrt(dp) * normals
    log_spot = np.log(S0) + np.concatenate([np.zeros((normals.shape[0], 1)), np.cumsum(increments, axis=1)], axis=1)
    p = np.linspace(0.0, m.T, n_steps + 1)
    log_barrier = np.log(m.K) - m.r * (m.T - p)
    return log_spot - log_barrier


def _crossing_probability(distances: np.ndarray, sigma: float, dp: float) -> np.ndarray:
    d0, d1 = distances[:, :-1], distances[:, 1:]
    inside = (d0 > 0) & (d1 > 0)
    exponent = np.where(inside, -2.0 * d0 * d1 / (sigma ** 2 * dp), 0.0)
    return np.where(inside, np.exp(exponent), 1.0)


def _simulate_batch(
    S0: float, m: MarketParams, cfg: McConfig, start: int, stop: int
) -> Dict[str, np.ndarray]:
    """Discounted payoffs and survival under both monitoring modes for paths [start, stop)."""
    extra = cfg.binary_killing and cfg.bridge_correction
    normals, uniforms = _batch_draws(cfg.seed, start, stop, cfg.n_steps, extra)
    distances = _barrier_distances(S0, m, normals)
    dp = m.T / cfg.n_steps

    alive_discrete = np.all(distances[:, 1:] > 0, axis=1).astype(float)
    crossing = _crossing_probability(distances, m.sigma, dp)
    if uniforms is not None:
        survival_bridge = np.all(uniforms >= crossing, axis=1).astype(float)
    else:
        survival_bridge = np.prod(1.0 - crossing, axis=1)

    S_T = m.K * np.exp(distances[:, -1])  # g(T) = K
    discounted = np.exp(-m.r * m.T) * np.maximum(S_T - m.K, 0.0)
    return {
        "discrete_payoff": discounted * alive_discrete,
        "discrete_survival": alive_discrete,
        "bridge_payoff": discounted * survival_bridge,
        "bridge_survival": survival_bridge,
    }


def _batches(n_paths: int, batch_size: int) -> List[Tuple[int, int]]:
    return [(start, min(start + batch_size, n_paths)) for start in range(0, n_paths, batch_size)]


def _run(S0: float, m: MarketParams, cfg: McConfig) -> List[Dict[str, np.ndarray]]:
    validate_market(m)
    level = barrier_level(0.0, m)
    if not S0 > level:
        raise DomainError(f"S0 must be > g(0) = {level:.10g} (start above the barrier), got S0={S0}")

    bounds = _batches(cfg.n_paths, cfg.batch_size)
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(lambda b: _simulate_batch(S0, m, cfg, *b), bounds))
    return [_simulate_batch(S0, m, cfg, *b) for b in bounds]


def _estimate(results: List[Dict[str, np.ndarray]], mode: str, cfg: McConfig, bridge: bool) -> McEstimate:
    payoffs = np.concatenate([r[f"{mode}_payoff"] for r in results])
    survival = np.concatenate([r[f"{mode}_survival"] for r in results])
    return McEstimate(
        price=float(np.mean(payoffs)),
        std_error=float(np.std(payoffs, ddof=1) / np.sqrt(payoffs.size)),
        knockout_fraction=float(1.0 - np.mean(survival)),
        n_paths=int(payoffs.size),
        n_steps=cfg.n_steps,
        bridge_correction=bridge,
        batch_means=tuple(float(np.mean(r[f"{mode}_payoff"])) for r in results),
        batch_sizes=tuple(int(r[f"{mode}_payoff"].size) for r in results),
    )


def simulate(S0: float, m: MarketParams, cfg: Optional[McConfig] = None) -> McEstimate:
    """
    Discounted mean payoff of the down-and-out call with its standard error.

    With bridge_correction paths are monitored continuously (survival weighting,
    or a uniform draw per step against the crossing probability under
    binary_killing); without it only the n_steps monitoring dates count.
    """
    cfg = cfg or McConfig()
    logger.info(
        f"MC: {cfg.n_paths} paths x {cfg.n_steps} steps, seed={cfg.seed}, "
        f"bridge={cfg.bridge_correction}, binary={cfg.binary_killing}, workers={cfg.workers}"
    )
    results = _run(S0, m, cfg)
    mode = "bridge" if cfg.bridge_correction else "discrete"
    estimate = _estimate(results, mode, cfg, cfg.bridge_correction)
    logger.info(
        f"MC estimate {estimate.price:.6g} +/- {estimate.std_error:.3g} ({estimate.relative_error:.2%}), "
        f"knockout fraction {estimate.knockout_fraction:.4f}"
    )
    return estimate


def discrete_vs_bridge(
    S0: float,
    m: MarketParams,
    cfg: Optional[McConfig] = None,
    steps: Optional[Sequence[int]] = None,
) -> pd.DataFrame:
    """
    Matched-path comparison of discrete and bridge-corrected monitoring.

    For each step count the same draws feed both estimators, so the columns
    differ only in how survival is weighted.
    """
    cfg = cfg or McConfig()
    rows = []
    for n_steps in steps or config.MC_MONITORING_STEPS:
        step_cfg = cfg.with_steps(n_steps)
        results = _run(S0, m, step_cfg)
        bridge = _estimate(results, "bridge", step_cfg, True)
        discrete = _estimate(results, "discrete", step_cfg, False)
        rows.append({
            "n_steps": n_steps,
            "bridge_price": bridge.price,
            "bridge_std_error": bridge.std_error,
            "discrete_price": discrete.price,
            "discrete_std_error": discrete.std_error,
            "discrete_bias": discrete.price - bridge.price,
            "bridge_knockout": bridge.knockout_fraction,
            "discrete_knockout": discrete.knockout_fraction,
        })
    frame = pd.DataFrame(rows)
    logger.info(f"Discrete vs bridge monitoring:\n{frame.to_string(index=False)}")
    return frame


def batch_frame(estimate: McEstimate) -> pd.DataFrame:
    """Per-batch partial means and the running mean, for convergence plots."""
    sizes = np.asarray(estimate.batch_sizes, dtype=float)
    means = np.asarray(estimate.batch_means, dtype=float)
    cumulative = np.cumsum(sizes)
    return pd.DataFrame({
        "batch": np.arange(1, means.size + 1),
        "paths": cumulative.astype(int),
        "batch_mean": means,
        "running_mean": np.cumsum(means * sizes) / cumulative,
    })
