"""Monte Carlo replication engine for size, power, and break estimation.

Replication i of a run seeded with `seed` draws its innovations from the
stream (seed, i), so results are independent of the worker count and are
reduced in replication order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import SpectralConfig, build_frequency_grid, default_config
from .detect import algorithm1
from .errors import ConfigError
from .simulate import MODELS, DgpSpec, simulate
from .stats import all_tests

STAT_KEYS = ("smax", "rmax", "sdmax", "rdmax")


def hardware_threads(explicit: Optional[int] = None) -> int:
    if explicit is not None and explicit > 0:
        return explicit
    env = os.environ.get("EVOSPEC_THREADS")
    if env:
        try:
            n = int(env)
            if n > 0:
                return n
        except ValueError:
            pass
    return os.cpu_count() or 1


def _test_chunk(args) -> List[Dict[str, bool]]:
    spec, cfg_overrides, seed, reps, omega, alpha = args
    config = default_config(spec.T)
    if cfg_overrides:
        config = config.with_overrides(**cfg_overrides)
    grid = build_frequency_grid(config)
    out = []
    for i in reps:
        x = simulate(spec, seed=(seed, i))
        reports = all_tests(x, config, grid, omega=omega, alpha=alpha)
        out.append({k: bool(reports[k].reject) for k in STAT_KEYS})
    return out


def _estimate_chunk(args) -> List[Tuple[int, List[int]]]:
    spec, cfg_overrides, seed, reps, alpha = args
    config = default_config(spec.T)
    if cfg_overrides:
        config = config.with_overrides(**cfg_overrides)
    grid = build_frequency_grid(config)
    out = []
    for i in reps:
        x = simulate(spec, seed=(seed, i))
        rep_seed = int(np.random.SeedSequence((seed, i)).generate_state(1)[0])
        cps = algorithm1(x, config, grid, seed=rep_seed, alpha=alpha)
        out.append((cps.m_hat, cps.times()))
    return out


def _chunks(n: int, k: int) -> List[List[int]]:
    size = max(1, math.ceil(n / k))
    return [list(range(s, min(s + size, n))) for s in range(0, n, size)]


def _run_pool(fn, argsets, threads):
    if threads <= 1 or len(argsets) <= 1:
        results = [fn(a) for a in argsets]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(fn, argsets))
    merged = []
    for r in results:
        merged.extend(r)
    return merged


@dataclass(frozen=True)
class SizePowerResult:
    model: str
    T: int
    alpha: float
    replications: int
    seed: int
    omega: float
    reject_rate: Dict[str, float]

    def rows(self) -> List[dict]:
        return [
            {
                "model": self.model, "T": self.T, "statistic": k,
                "alpha": self.alpha, "reject_rate": v,
                "replications": self.replications, "seed": self.seed,
            }
            for k, v in self.reject_rate.items()
        ]


def run_sizepower(model: str, T: int, replications: int, seed: int,
                  alpha: float = 0.05, omega: float = 0.0,
                  rho: float = 0.3, l1: float = 0.33, l2: float = 0.66,
                  threads: Optional[int] = None,
                  config_overrides: Optional[dict] = None) -> SizePowerResult:
    """Rejection frequencies of the four tests under one model."""
    if model not in MODELS:
        raise ConfigError(f"unknown model {model!r}")
    if replications < 1:
        raise ConfigError("need at least one replication")
    spec = DgpSpec(model=model, T=T, rho=rho, l1=l1, l2=l2)
    nthreads = hardware_threads(threads)
    argsets = [(spec, config_overrides, seed, chunk, omega, alpha)
               for chunk in _chunks(replications, nthreads * 4)]
    flags = _run_pool(_test_chunk, argsets, nthreads)
    rates = {k: float(np.mean([f[k] for f in flags])) for k in STAT_KEYS}
    return SizePowerResult(model=model, T=T, alpha=alpha,
                           replications=replications, seed=seed, omega=omega,
                           reject_rate=rates)


@dataclass(frozen=True)
class EstimationResult:
    model: str
    T: int
    alpha: float
    replications: int
    seed: int
    m0: int
    frac_correct: float
    m_hat_quantiles: Dict[str, float]
    break_quantiles: List[Dict[str, float]]

    def rows(self) -> List[dict]:
        row = {
            "model": self.model, "T": self.T, "alpha": self.alpha,
            "replications": self.replications, "seed": self.seed,
            "m0": self.m0, "percent_correct": 100.0 * self.frac_correct,
        }
        for i, q in enumerate(self.break_quantiles, start=1):
            row[f"T{i}_q25"] = q["q25"]
            row[f"T{i}_median"] = q["median"]
            row[f"T{i}_q75"] = q["q75"]
        return [row]


def run_estimation(model: str, T: int, replications: int, seed: int,
                   alpha: float = 0.05, l1: float = 0.33, l2: float = 0.66,
                   threads: Optional[int] = None,
                   config_overrides: Optional[dict] = None) -> EstimationResult:
    """Break-count accuracy and location quantiles of the sequential algorithm."""
    if model not in MODELS:
        raise ConfigError(f"unknown model {model!r}")
    spec = DgpSpec(model=model, T=T, l1=l1, l2=l2)
    m0 = len(spec.break_times)
    nthreads = hardware_threads(threads)
    argsets = [(spec, config_overrides, seed, chunk, alpha)
               for chunk in _chunks(replications, nthreads * 4)]
    results = _run_pool(_estimate_chunk, argsets, nthreads)
    m_hats = np.array([m for m, _ in results])
    frac = float(np.mean(m_hats == m0)) if m0 else float(np.mean(m_hats == 0))
    qs = {"q25": float(np.quantile(m_hats, 0.25)),
          "median": float(np.quantile(m_hats, 0.5)),
          "q75": float(np.quantile(m_hats, 0.75))}
    break_q = []
    for pos in range(m0):
        times = [t[pos] for m, t in results if m == m0]
        if times:
            arr = np.asarray(times, dtype=float)
            break_q.append({"q25": float(np.quantile(arr, 0.25)),
                            "median": float(np.quantile(arr, 0.5)),
                            "q75": float(np.quantile(arr, 0.75))})
        else:
            break_q.append({"q25": math.nan, "median": math.nan, "q75": math.nan})
    return EstimationResult(model=model, T=T, alpha=alpha,
                            replications=replications, seed=seed, m0=m0,
                            frac_correct=frac, m_hat_quantiles=qs,
                            break_quantiles=break_q)
