"""Change-point localization via the unnormalized contrast D and the wild
sequential top-down algorithm.

D_{r}(w) = M_ST^(-1/2) |sum_{j in S_L,r} f_L(j/T, w) - sum_{j in S_R,r} f_R(j/T, w)|

is evaluated over candidate split times r and all grid frequencies; the
break estimator is the argmax.  The sequential algorithm alternates
(1) wild refinement of each candidate through K uniform draws from the
m_T points left of it, (2) a studentized stop test on the current
candidate set, (3) argmax estimation, (4) exclusion of a v_T-neighborhood.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .blocks import feasible_split_range, lr_sets
from .config import FrequencyGrid, SpectralConfig, TimeSeries
from .errors import AlgorithmError, ConfigError, NumericsError, SizeError
from .spectral import LEFT, RIGHT, local_spectra_batch
from .stats import (LEVEL_EXPONENT, contrast_panel, critical_value, gamma_mt,
                    pooled_relative_scale, variance_profile)


def _series_values(x) -> np.ndarray:
    vals = np.asarray(x.values if isinstance(x, TimeSeries) else x, dtype=float)
    return vals - vals.mean()


def _split_averages(vals: np.ndarray, r: int, config: SpectralConfig,
                    omegas: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Left/right block averages of the smoothed spectra around split r."""
    left, right = lr_sets(r, config, T=vals.size)
    fL = local_spectra_batch(vals, left.indices, LEFT, config, omegas).mean(axis=0)
    fR = local_spectra_batch(vals, right.indices, RIGHT, config, omegas).mean(axis=0)
    return fL, fR


def d_stat(x, r: int, omega: float, config: SpectralConfig) -> float:
    """Unnormalized contrast M_ST^(-1/2) |sum_L f_L - sum_R f_R| at split r."""
    vals = _series_values(x)
    fL, fR = _split_averages(vals, r, config, np.array([float(omega)]))
    return float(math.sqrt(config.M_ST) * abs(fL[0] - fR[0]))


def candidate_splits(T: int, config: SpectralConfig) -> List[int]:
    """Initial coarse candidate grid: multiples of m_T inside the valid range."""
    lo, hi = feasible_split_range(T, config)
    upper = (config.M_T - 1) * config.m_T - config.n_T
    out = []
    r = 2 * config.m_T
    while r < upper:
        if lo <= r <= hi:
            out.append(r)
        r += config.m_T
    return out


def _d_profile(vals: np.ndarray, splits: Sequence[int], config: SpectralConfig,
               omegas: np.ndarray) -> np.ndarray:
    """D values, shape (len(splits), len(omegas))."""
    out = np.empty((len(splits), omegas.size))
    root = math.sqrt(config.M_ST)
    for i, r in enumerate(splits):
        fL, fR = _split_averages(vals, r, config, omegas)
        out[i] = root * np.abs(fL - fR)
    return out


def d_profile(x, config: SpectralConfig, grid: FrequencyGrid) -> Tuple[np.ndarray, np.ndarray]:
    """(candidate splits, D values over the full grid) for diagnostics."""
    vals = _series_values(x)
    splits = candidate_splits(vals.size, config)
    if not splits:
        raise SizeError("no valid split candidates")
    return np.asarray(splits), _d_profile(vals, splits, config, np.asarray(grid.pi_full))


def single_break(x, config: SpectralConfig, grid: FrequencyGrid) -> Tuple[int, float]:
    """Argmax break estimator over the coarse grid; ties toward smallest r.

    Returns (t_hat, omega_hat).
    """
    vals = _series_values(x)
    splits = candidate_splits(vals.size, config)
    if len(splits) < 3:
        raise SizeError(f"need >= 3 split candidates, found {len(splits)}")
    prof = _d_profile(vals, splits, config, np.asarray(grid.pi_full))
    flat = int(np.argmax(prof))
    i, k = divmod(flat, prof.shape[1])
    return splits[i], float(np.asarray(grid.pi_full)[k])


def psi_threshold(config: SpectralConfig, T: Optional[int] = None,
                  D: float = 1.0) -> float:
    """Threshold 2 D* sqrt(log(M*) / m*) of the rate-optimal detection rule.

    m* solves m = (sqrt(log floor(T/m)) T^theta / D)^(2/(2 theta + 1)) by
    damped fixed-point iteration started at m_T.  When T is not given it is
    reconstructed from the block structure as (M_T + 1) * m_T.

    Raises
    ------
    NumericsError
        If the iteration has not settled after 100 steps.
    """
    if T is None:
        T = (config.M_T + 1) * config.m_T
    theta = config.theta
    if theta <= 0:
        raise ConfigError("theta must be positive")
    if config.D_star <= 2.0:
        raise ConfigError("D_star must exceed 2")
    m = float(config.m_T)
    expo = 2.0 / (2.0 * theta + 1.0)
    for _ in range(100):
        M = max(2.0, math.floor(T / m))
        new = (math.sqrt(math.log(M)) * T**theta / D) ** expo
        new = min(new, T / 2.0)
        if abs(new - m) < 1e-9 * max(1.0, m):
            m = new
            break
        m = 0.5 * (m + new)
    else:
        raise NumericsError("psi threshold fixed point did not converge")
    M_star = max(2.0, math.floor(T / m))
    return float(2.0 * config.D_star * math.sqrt(math.log(M_star) / m))


@dataclass(frozen=True)
class ThetaEstimate:
    theta: float
    at_boundary: bool
    s_dmax_star: float


def estimate_theta(x, config: SpectralConfig, grid: FrequencyGrid,
                   trim: float = 0.2) -> ThetaEstimate:
    """Preliminary regularity-exponent estimate from the trimmed block maxima.

    Per-block studentized contrasts are computed over Pi'; the top `trim`
    fraction of blocks (by their frequency max) is dropped, the Gumbel-type
    normalization is applied to the remaining maximum, and the resulting
    value s* is matched to the rate threshold 2 sqrt(log(M*(theta))/m*(theta))
    by bisection over theta in (0.05, 3].
    """
    vals = _series_values(x)
    omegas = np.asarray(grid.pi_prime, dtype=float)
    panel = contrast_panel(vals, config, omegas)
    vhat = pooled_relative_scale(panel, np.ones(omegas.size, dtype=bool))
    from .stats import _studentized_columns  # shared studentization

    svals = _studentized_columns(panel, config, vhat, np.arange(omegas.size))
    block_max = svals.max(axis=1)
    nb = block_max.size
    drop = min(nb - 1, max(1, int(math.floor(trim * nb))))
    keep = np.argsort(block_max)[: nb - drop]
    kept_max = float(svals[keep].max())
    s_star = (math.sqrt(math.log(config.M_T)) * (kept_max - gamma_mt(config.M_T))
              - math.log(grid.n_omega_prime))

    T = vals.size

    def threshold(theta: float) -> float:
        cfg = config.with_overrides(theta=theta)
        return psi_threshold(cfg, T) / config.D_star  # 2 sqrt(log M*/m*)

    lo, hi = 0.05, 3.0
    f_lo, f_hi = threshold(lo) - s_star, threshold(hi) - s_star
    if f_lo <= 0.0:  # s* above the roughest threshold: maximal roughness
        return ThetaEstimate(theta=lo, at_boundary=True, s_dmax_star=s_star)
    if f_hi >= 0.0:  # s* below the smoothest threshold
        return ThetaEstimate(theta=hi, at_boundary=True, s_dmax_star=s_star)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if threshold(mid) - s_star > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-8:
            break
    return ThetaEstimate(theta=0.5 * (lo + hi), at_boundary=False, s_dmax_star=s_star)


@dataclass(frozen=True)
class ChangePointSet:
    """Estimated break times in chronological order, with detection trace."""

    estimates: Tuple[Dict[str, float], ...]
    m_hat: int
    trace: Tuple[Dict[str, object], ...]

    def times(self) -> List[int]:
        return [int(e["t"]) for e in self.estimates]

    def to_dict(self) -> dict:
        return {
            "m_hat": self.m_hat,
            "estimates": [dict(e) for e in self.estimates],
            "trace": [dict(t) for t in self.trace],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _gate_statistic(vals: np.ndarray, splits: Sequence[int], config: SpectralConfig,
                    grid: FrequencyGrid, vhat: float) -> float:
    """Normalized studentized max contrast over the candidate splits and Pi'."""
    omegas = np.asarray(grid.pi_prime, dtype=float)
    q = np.array([variance_profile(config, om) for om in omegas])
    best = -math.inf
    lam_sqrt = math.sqrt(config.M_ST * vhat / 2.0)
    lam = LEVEL_EXPONENT
    for r in splits:
        fL, fR = _split_averages(vals, r, config, omegas)
        with np.errstate(invalid="ignore"):
            level = np.where((fL > 0) & (fR > 0),
                             fL**lam * fR ** (1.0 - lam), 0.5 * (fL + fR))
        denom = level * lam_sqrt * np.sqrt(q) + config.epsilon_f
        with np.errstate(divide="ignore", invalid="ignore"):
            stat = np.abs(fL - fR) / denom
        stat = stat[np.isfinite(stat)]
        if stat.size:
            best = max(best, float(stat.max()))
    if not math.isfinite(best):
        return -math.inf
    return (math.sqrt(math.log(config.M_T)) * (best - gamma_mt(config.M_T))
            - math.log(grid.n_omega_prime))


def algorithm1(x, config: SpectralConfig, grid: FrequencyGrid, seed: int,
               alpha: float = 0.05) -> ChangePointSet:
    """Wild sequential top-down multiple change-point estimation.

    Each iteration refines every candidate split with K uniform draws from
    the m_T points to its left (seeded per (seed, candidate), deterministic
    across thread counts), stops when the studentized gate falls below the
    level-alpha extreme-value critical value, otherwise records the argmax
    of the D contrast and excludes its v_T-neighborhood.
    """
    vals = _series_values(x)
    T = vals.size
    omegas = np.asarray(grid.pi_full, dtype=float)
    lo, hi = feasible_split_range(T, config)
    cands = candidate_splits(T, config)
    if not cands:
        raise SizeError("no valid split candidates")
    # pooled studentizing scale from the block panel, fixed across iterations
    panel = contrast_panel(vals, config, np.asarray(grid.pi_prime, dtype=float))
    vhat = pooled_relative_scale(panel, np.ones(len(grid.pi_prime), dtype=bool))

    estimates: List[Dict[str, float]] = []
    trace: List[Dict[str, object]] = []
    excluded: List[Tuple[int, int]] = []
    cv = critical_value(alpha)
    max_iter = math.ceil(T / config.v_T)

    for it in range(max_iter + 1):
        if it == max_iter:
            raise AlgorithmError("sequential loop exceeded its iteration guard")
        if not cands:
            trace.append({"iteration": it, "candidates": 0, "decision": "exhausted"})
            break
        # (1) wild refinement
        refined = []
        n_draws = 0
        for r in sorted(cands):
            low = max(r - config.m_T + 1, lo)
            high = min(r, hi)
            pool = np.arange(low, high + 1)
            pool = pool[[not any(a <= p <= b for a, b in excluded) for p in pool]]
            if pool.size == 0:
                continue
            rng = np.random.default_rng((seed, r))
            k = min(config.K, pool.size)
            draws = rng.choice(pool, size=k, replace=False)
            n_draws += k
            points = np.unique(np.concatenate((draws, [r]))) if lo <= r <= hi else np.unique(draws)
            prof = _d_profile(vals, points.tolist(), config, omegas)
            best = int(np.argmax(prof.max(axis=1)))
            refined.append(int(points[best]))
        cands = sorted(set(refined))
        if not cands:
            trace.append({"iteration": it, "candidates": 0, "decision": "exhausted"})
            break
        # (2) stop test
        gate = _gate_statistic(vals, cands, config, grid, vhat)
        if gate < cv:
            trace.append({
                "iteration": it, "candidates": len(cands), "draws": n_draws,
                "gate": gate, "decision": "stop",
            })
            break
        # (3) estimate
        prof = _d_profile(vals, cands, config, omegas)
        flat = int(np.argmax(prof))
        i, kk = divmod(flat, prof.shape[1])
        t_hat = int(cands[i])
        estimates.append({
            "t": t_hat,
            "lambda": t_hat / T,
            "omega": float(omegas[kk]),
            "d": float(prof[i, kk]),
        })
        trace.append({
            "iteration": it, "candidates": len(cands), "draws": n_draws,
            "gate": gate, "decision": "record", "t_hat": t_hat,
        })
        # (4) exclusion
        lo_x, hi_x = t_hat - config.v_T, t_hat + config.v_T
        excluded.append((lo_x, hi_x))
        cands = [r for r in cands if not (lo_x <= r <= hi_x)]

    estimates.sort(key=lambda e: e["t"])
    return ChangePointSet(estimates=tuple(estimates), m_hat=len(estimates),
                          trace=tuple(trace))
