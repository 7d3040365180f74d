"""Domain types, tuning-parameter defaults, and the frequency grid.

All tuning quantities follow power-of-T rules; the block structure is

    m_T  = floor(T^0.66)          block length
    m_ST = floor(sqrt(m_T))       sub-sampling stride
    M_ST = floor(m_T / m_ST)      points kept per block
    M_T  = floor(T / m_T) - 1     number of blocks

The local window length uses n_T = even(floor(WINDOW_COEF * T^0.62)).
WINDOW_COEF < 1 keeps the overlap of adjacent sub-sampled windows moderate,
which the block sub-sampling needs to deliver weakly dependent local
estimates (see README, calibration notes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, GridError

# Constant in n_T = even(floor(WINDOW_COEF * T^0.62)). The exponent follows the
# m_T/n_T rate conditions; the constant trades frequency resolution against
# overlap of the sub-sampled local windows.
WINDOW_COEF = 1.0 / 3.0

# Smallest usable local window (below this there are no interior Fourier
# frequencies left to smooth over).
MIN_WINDOW = 8

MIN_SAMPLE_SIZE = 64


@dataclass(frozen=True)
class TimeSeries:
    """Univariate real-valued sample with optional break ground truth.

    Parameters
    ----------
    values : ndarray
        Observations, length T >= 2, all finite.
    truth : tuple of (int, float), optional
        Known (break_time, frequency) pairs from a simulation, break times
        strictly increasing and inside (1, T).
    """

    values: np.ndarray
    truth: Optional[Tuple[Tuple[int, float], ...]] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise ConfigError("series must be 1-d with at least 2 observations")
        if not np.all(np.isfinite(v)):
            raise ConfigError("series contains non-finite values")
        object.__setattr__(self, "values", v)
        if self.truth is not None:
            t = tuple((int(b), float(w)) for b, w in self.truth)
            times = [b for b, _ in t]
            if any(b <= 1 or b >= v.size for b in times):
                raise ConfigError("truth break times must lie in (1, T)")
            if any(b2 <= b1 for b1, b2 in zip(times, times[1:])):
                raise ConfigError("truth break times must be strictly increasing")
            object.__setattr__(self, "truth", t)

    @property
    def T(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class SpectralConfig:
    """All tuning parameters of the spectral change-point machinery."""

    m_T: int
    n_T: int
    b_WT: float
    m_ST: int
    M_ST: int
    M_T: int
    taper: str = "rectangular"
    smoother_kernel: str = "parzen"
    lrv_kernel: str = "bartlett"
    b_1T: float = 0.0
    n_omega: int = 0
    epsilon_grid: float = 0.0
    K: int = 10
    v_T: int = 0
    theta: float = 1.0
    D_star: float = 2.1
    epsilon_f: float = 0.0

    def __post_init__(self):
        if self.n_T % 2 != 0 or not (2 <= self.n_T):
            raise ConfigError(f"n_T must be even and >= 2, got {self.n_T}")
        if self.m_T < 4:
            raise ConfigError(f"m_T must be >= 4, got {self.m_T}")
        if self.m_ST != int(math.isqrt(self.m_T)):
            raise ConfigError("m_ST must equal floor(sqrt(m_T))")
        if self.M_ST != self.m_T // self.m_ST:
            raise ConfigError("M_ST must equal floor(m_T / m_ST)")
        if self.m_ST < 1 or self.M_ST < 2 or self.M_T < 3:
            raise ConfigError("degenerate block structure")
        if not (0.0 < self.b_WT < 1.0):
            raise ConfigError(f"b_WT must be in (0, 1), got {self.b_WT}")
        expected_b1 = self.M_ST ** (-1.0 / 3.0)
        if abs(self.b_1T - expected_b1) > 1e-12:
            raise ConfigError("b_1T must equal M_ST^(-1/3)")
        if not (1 <= self.K <= self.m_T):
            raise ConfigError(f"K must be in [1, m_T], got {self.K}")
        if not (self.m_T < self.v_T):
            raise ConfigError("v_T must exceed m_T")
        if self.theta <= 0:
            raise ConfigError("theta must be positive")
        if self.D_star <= 2.0:
            raise ConfigError("D_star must be strictly greater than 2")
        if self.epsilon_f < 0:
            raise ConfigError("epsilon_f must be >= 0")
        if self.taper != "rectangular":
            raise ConfigError(f"unsupported taper {self.taper!r}")
        if self.smoother_kernel not in ("parzen", "bartlett", "uniform"):
            raise ConfigError(f"unsupported smoother kernel {self.smoother_kernel!r}")
        if self.lrv_kernel != "bartlett":
            raise ConfigError(f"unsupported LRV kernel {self.lrv_kernel!r}")

    def with_overrides(self, **kwargs) -> "SpectralConfig":
        """Return a copy with the given fields replaced (re-validated)."""
        return replace(self, **kwargs)


def default_config(T: int, theta: Optional[float] = None) -> SpectralConfig:
    """Build the default configuration for a sample of length T.

    Tuning rules: m_T = floor(T^0.66), n_T = even(floor(T^0.62 / 3)),
    b_WT = n_T^(-1/6), v_T = floor(T^0.666), K = 10 for T <= 1000 and
    floor(m_T / 3) above, b_1T = M_ST^(-1/3), n_omega = n_T,
    epsilon_grid = pi / n_omega.

    Raises
    ------
    ConfigError
        If T < 64 (the block structure degenerates below that).
    """
    if T < MIN_SAMPLE_SIZE:
        raise ConfigError(f"need T >= {MIN_SAMPLE_SIZE}, got {T}")
    m_T = int(T ** 0.66)
    m_ST = int(math.isqrt(m_T))
    M_ST = m_T // m_ST
    M_T = T // m_T - 1
    n_T = max(MIN_WINDOW, (int(WINDOW_COEF * T ** 0.62) // 2) * 2)
    b_WT = n_T ** (-1.0 / 6.0)
    # floor collisions between T^0.666 and T^0.66 happen for small T
    v_T = max(int(T ** 0.666), m_T + 1)
    K = 10 if T <= 1000 else m_T // 3
    n_omega = n_T
    return SpectralConfig(
        m_T=m_T,
        n_T=n_T,
        b_WT=b_WT,
        m_ST=m_ST,
        M_ST=M_ST,
        M_T=M_T,
        b_1T=M_ST ** (-1.0 / 3.0),
        n_omega=n_omega,
        epsilon_grid=math.pi / n_omega,
        K=K,
        v_T=v_T,
        theta=1.0 if theta is None else float(theta),
    )


@dataclass(frozen=True)
class FrequencyGrid:
    """Evenly spaced frequencies on [-pi, pi - eps] with a thinned subset.

    pi_full has n_omega points from -pi to pi - eps.  pi_prime keeps every
    (floor(n_T * b_WT) + 1)-th point and always contains both endpoints;
    n_omega_prime = floor(n_omega / stride).
    """

    pi_full: np.ndarray
    pi_prime: np.ndarray
    prime_indices: np.ndarray
    n_omega_prime: int
    stride: int

    def __post_init__(self):
        object.__setattr__(self, "pi_full", np.asarray(self.pi_full, dtype=float))
        object.__setattr__(self, "pi_prime", np.asarray(self.pi_prime, dtype=float))
        object.__setattr__(self, "prime_indices", np.asarray(self.prime_indices, dtype=int))


def build_frequency_grid(config: SpectralConfig) -> FrequencyGrid:
    """Construct the frequency grid prescribed by the configuration.

    Raises
    ------
    GridError
        If n_omega < 4, epsilon_grid is outside (0, pi), or the thinning
        stride is at least n_omega.
    """
    n_omega = config.n_omega
    eps = config.epsilon_grid
    if n_omega < 4:
        raise GridError(f"need n_omega >= 4, got {n_omega}")
    if not (0.0 < eps < math.pi):
        raise GridError(f"epsilon_grid must be in (0, pi), got {eps}")
    stride = int(config.n_T * config.b_WT) + 1
    if stride >= n_omega:
        raise GridError(f"thinning stride {stride} >= n_omega {n_omega}")
    pi_full = np.linspace(-math.pi, math.pi - eps, n_omega)
    idx = sorted(set(range(0, n_omega, stride)) | {0, n_omega - 1})
    prime_indices = np.array(idx, dtype=int)
    return FrequencyGrid(
        pi_full=pi_full,
        pi_prime=pi_full[prime_indices],
        prime_indices=prime_indices,
        n_omega_prime=max(1, n_omega // stride),
        stride=stride,
    )


# -- flat key = value config files ------------------------------------------

_CONFIG_FIELDS = {
    "m_T": int,
    "n_T": int,
    "b_WT": float,
    "m_ST": int,
    "M_ST": int,
    "M_T": int,
    "taper": str,
    "smoother_kernel": str,
    "lrv_kernel": str,
    "b_1T": float,
    "n_omega": int,
    "epsilon_grid": float,
    "K": int,
    "v_T": int,
    "theta": float,
    "D_star": float,
    "epsilon_f": float,
}


def config_to_text(config: SpectralConfig) -> str:
    """Serialize to one `key = value` pair per line."""
    lines = []
    for name in _CONFIG_FIELDS:
        val = getattr(config, name)
        lines.append(f"{name} = {val}")
    return "\n".join(lines) + "\n"


def config_from_text(text: str) -> SpectralConfig:
    """Parse the flat key-value format produced by :func:`config_to_text`."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected `key = value`, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _CONFIG_FIELDS[key](val.strip())
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
    missing = set(_CONFIG_FIELDS) - set(values)
    if missing:
        raise ConfigError(f"missing keys: {sorted(missing)}")
    return SpectralConfig(**values)


def apply_overrides(config: SpectralConfig, overrides: Sequence[str]) -> SpectralConfig:
    """Apply `key=value` override strings to a config, re-validating."""
    updates = {}
    for item in overrides:
        key, _, val = item.partition("=")
        key = key.strip()
        if key not in _CONFIG_FIELDS:
            raise ConfigError(f"unknown config key {key!r}")
        updates[key] = _CONFIG_FIELDS[key](val.strip())
    return config.with_overrides(**updates) if updates else config
