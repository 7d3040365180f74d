"""Data-generating processes M1-M7 with seeded Gaussian innovations.

All models are driven by AR(1)-type recursions with time-varying coefficient
rho(u) and innovation scale sigma(u), u = t/T:

    M1  rho constant, sigma = 1               (stationary; size)
    M2  rho(u) = 0.4 cos(0.8 - cos(2u))       (locally stationary; size)
    M3  (0.3, 1) -> (0.6, 0.7) -> (0.6, 1)    (two breaks; power)
    M4  (rho(u), 0.7) -> (0.8, 1) -> (rho(u), 0.7)
    M5  rho = 0, sigma^2(u) = max(1.5, 1 + cos(1 + cos(10u)))  (smooth change)
    M6  (0, 0.7) -> (0.6, 0.7) -> (0.6, 1)    (two breaks; estimation)
    M7  same as M4                            (estimation)

Breaks sit at floor(T * l); the new regime starts one sample later.  The
recursion is initialized with a burn-in run at the u = 1/T parameter values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .config import TimeSeries
from .errors import ConfigError

BURN_IN = 500

MODELS = ("M1", "M2", "M3", "M4", "M5", "M6", "M7")


@dataclass(frozen=True)
class DgpSpec:
    """Model choice plus its parameters."""

    model: str
    T: int
    rho: float = 0.3          # M1 only
    l1: float = 0.33
    l2: float = 0.66
    burn_in: int = BURN_IN

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}")
        if self.T < 2:
            raise ConfigError("T must be >= 2")
        if self.model == "M1" and not abs(self.rho) < 1:
            raise ConfigError("|rho| must be < 1")
        if self.model in ("M3", "M4", "M6", "M7"):
            if not (0.0 < self.l1 < self.l2 < 1.0):
                raise ConfigError("need 0 < l1 < l2 < 1")
        if self.burn_in < 100:
            raise ConfigError("burn_in must be >= 100")

    @property
    def break_times(self) -> Tuple[int, ...]:
        if self.model in ("M3", "M4", "M6", "M7"):
            return (int(self.T * self.l1), int(self.T * self.l2))
        return ()


def rho_smooth(u):
    """Time-varying AR coefficient of M2: 0.4 cos(0.8 - cos(2u))."""
    return 0.4 * np.cos(0.8 - np.cos(2.0 * np.asarray(u, dtype=float)))


def sigma2_smooth(u):
    """Innovation variance path of M5: max(1.5, 1 + cos(1 + cos(10u)))."""
    return np.maximum(1.5, 1.0 + np.cos(1.0 + np.cos(10.0 * np.asarray(u, dtype=float))))


def _paths(spec: DgpSpec) -> Tuple[np.ndarray, np.ndarray]:
    """(rho_t, sigma_t) for t = 1..T (as rescaled time u = t/T)."""
    T = spec.T
    u = np.arange(1, T + 1) / T
    model = spec.model
    if model == "M1":
        rho = np.full(T, spec.rho)
        sig = np.ones(T)
    elif model == "M2":
        rho = rho_smooth(u)
        sig = np.ones(T)
    elif model == "M3":
        b1, b2 = spec.break_times
        t = np.arange(1, T + 1)
        rho = np.where(t <= b1, 0.3, 0.6)
        sig = np.where(t <= b1, 1.0, np.where(t <= b2, 0.7, 1.0))
    elif model in ("M4", "M7"):
        b1, b2 = spec.break_times
        t = np.arange(1, T + 1)
        mid = (t > b1) & (t <= b2)
        rho = np.where(mid, 0.8, rho_smooth(u))
        sig = np.where(mid, 1.0, 0.7)
    elif model == "M5":
        rho = np.zeros(T)
        sig = np.sqrt(sigma2_smooth(u))
    elif model == "M6":
        b1, b2 = spec.break_times
        t = np.arange(1, T + 1)
        rho = np.where(t <= b1, 0.0, 0.6)
        sig = np.where(t <= b2, 0.7, 1.0)
    else:  # pragma: no cover
        raise ConfigError(f"unknown model {model!r}")
    return rho, sig


def simulate(spec: DgpSpec, seed: int) -> TimeSeries:
    """Draw one sample path; bit-identical for equal (spec, seed)."""
    rng = np.random.default_rng(seed)
    rho, sig = _paths(spec)
    n = spec.T + spec.burn_in
    e = rng.standard_normal(n)
    x = np.empty(n)
    # burn-in frozen at the t = 1 parameter values
    x[0] = sig[0] * e[0]
    for t in range(1, spec.burn_in):
        x[t] = rho[0] * x[t - 1] + sig[0] * e[t]
    for t in range(spec.burn_in, n):
        i = t - spec.burn_in
        x[t] = rho[i] * x[t - 1] + sig[i] * e[t]
    truth = tuple((b, 0.0) for b in spec.break_times) or None
    return TimeSeries(values=x[spec.burn_in:], truth=truth)


def _regime_params(spec: DgpSpec, u: float) -> Tuple[float, float]:
    """(rho, sigma) active at rescaled time u, left-continuous at breaks."""
    model = spec.model
    if model == "M1":
        return spec.rho, 1.0
    if model == "M2":
        return float(rho_smooth(u)), 1.0
    if model == "M5":
        return 0.0, float(math.sqrt(sigma2_smooth(u)))
    if model == "M3":
        if u <= spec.l1:
            return 0.3, 1.0
        if u <= spec.l2:
            return 0.6, 0.7
        return 0.6, 1.0
    if model in ("M4", "M7"):
        if spec.l1 < u <= spec.l2:
            return 0.8, 1.0
        return float(rho_smooth(u)), 0.7
    if model == "M6":
        rho = 0.0 if u <= spec.l1 else 0.6
        sig = 0.7 if u <= spec.l2 else 1.0
        return rho, sig
    raise ConfigError(f"unknown model {model!r}")  # pragma: no cover


def theoretical_spectrum(spec: DgpSpec, u: float, omega: float) -> float:
    """AR(1) spectral density sigma^2 / (2 pi (1 - 2 rho cos w + rho^2)) at u."""
    rho, sig = _regime_params(spec, u)
    denom = 1.0 - 2.0 * rho * math.cos(omega) + rho * rho
    return sig * sig / (2.0 * math.pi * denom)
