"""Max-type change-point test statistics and extreme-value critical values.

Four statistics are provided.  For a fixed frequency w:

    S_max(w) = max_r |ftilde_L,r(w) - ftilde_R,r+1(w)| / sigma_used_r(w)
    R_max(w) = max_r |ftilde_L,r(w) / ftilde_R,r+1(w) - 1|

with r running over 1..M_T-2, and the normalized quantity

    sqrt(log M_T) * (sqrt(M_ST) * max - gamma_MT),   gamma_MT =
    sqrt(4 log M_T - 2 log log M_T),

compared against the critical value v_a of the extreme value law
P(V <= v) = exp(-pi^(-1/2) e^(-v)).  The double-sup variants take the
maximum of the per-frequency normalized values over the thinned grid Pi'
and subtract log(n'_omega).

Studentization.  The in-block long-run variance estimator (blocks.lrv_estimate)
is exposed and tested, but with ~M_ST skewed values per block it is far too
unstable to studentize a max statistic: its sampling noise inflates the size
of the test several-fold.  The statistics therefore studentize with a pooled
scale: squared relative contrasts z_r(w)^2 (pair-level standardized) are
divided by the exact chi-square variance profile q(w) of the smoothed
estimate, pooled over blocks and thinned frequencies, trimmed of their
largest values (robustness against break blocks), and rescaled by the exact
Gaussian trim factor.  The local denominator is then

    sigma_used_r(w) = level_r(w) * sqrt(M_ST * q(w) * vhat / 2),

where level_r = ftilde_L,r^LEVEL_EXPONENT * ftilde_R,r+1^(1-LEVEL_EXPONENT)
tracks the local spectral level.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate
from scipy import stats as scipy_stats

from .blocks import block_set
from .config import FrequencyGrid, SpectralConfig, TimeSeries, build_frequency_grid
from .errors import (ConfigError, DegenerateDenominatorError,
                     DegenerateVarianceError, SizeError)
from .spectral import LEFT, RIGHT, local_spectra_batch, smoothing_weights

# Fraction of pooled squared contrasts trimmed from the top before averaging;
# protects the scale estimate against break-contaminated blocks.
TRIM_FRACTION = 0.25

# Geometric interpolation between the left block level (1.0) and the right
# block level (0.0) in the studentizing denominator.
LEVEL_EXPONENT = 1.0

STAT_SMAX = "Smax"
STAT_SDMAX = "SDmax"
STAT_RMAX = "Rmax"
STAT_RDMAX = "RDmax"


def gamma_mt(M_T: int) -> float:
    """Centering constant sqrt(4 log M_T - 2 log log M_T); needs M_T >= 3."""
    if M_T < 3:
        raise ConfigError(f"need M_T >= 3, got {M_T}")
    return math.sqrt(4.0 * math.log(M_T) - 2.0 * math.log(math.log(M_T)))


def critical_value(alpha: float) -> float:
    """Upper alpha quantile of P(V <= v) = exp(-pi^(-1/2) e^(-v))."""
    if not (0.0 < alpha < 1.0):
        raise ConfigError(f"alpha must be in (0, 1), got {alpha}")
    return -math.log(math.sqrt(math.pi) * (-math.log1p(-alpha)))


def pvalue_proxy(normalized: float) -> float:
    """1 - exp(-pi^(-1/2) e^(-v)); complement of the limiting CDF."""
    return float(-math.expm1(-math.exp(-normalized) / math.sqrt(math.pi)))


@lru_cache(maxsize=None)
def trimmed_chi2_factor(n: int, k: int) -> float:
    """E[mean of the n-k smallest of n iid chi-square(1) variables].

    Exact Gaussian-reference constant that makes the trimmed mean of squared
    standardized contrasts an unbiased variance estimate.
    """
    if k <= 0:
        return 1.0
    if k >= n:
        raise ConfigError("cannot trim every pooled value")

    def integrand(x):
        F = scipy_stats.chi2.cdf(x, 1)
        kept = scipy_stats.binom.cdf(n - k - 1, n - 1, F)
        return x * scipy_stats.chi2.pdf(x, 1) * n * kept

    val, _ = integrate.quad(integrand, 0.0, 400.0, limit=400)
    return val / (n - k)


def variance_profile(config: SpectralConfig, omega: float) -> float:
    """Relative variance q(w) of the smoothed estimate under a flat spectrum.

    Periodogram ordinates at s and n_T - s coincide for real data, and the
    ordinate at pi behaves as chi-square(1).  Collecting mirrored weights,

        q(w) = [sum_{s<n/2} (w_s + w_{n-s})^2 + 2 w_{n/2}^2] / (sum_s w_s)^2.

    q doubles at w = 0 and +-pi relative to well-separated frequencies.
    """
    w = smoothing_weights(config, omega)  # ordinates s = 1..n_T-1
    n = config.n_T
    total = w.sum()
    if total <= 0.0:
        return float("nan")
    half = n // 2
    s = np.arange(1, n)
    paired = np.zeros(half - 1)
    for i, ss in enumerate(range(1, half)):
        paired[i] = w[ss - 1] + w[n - ss - 1]
    q = float(np.sum(paired**2) + 2.0 * w[half - 1] ** 2)
    return q / float(total**2)


@dataclass(frozen=True)
class ContrastPanel:
    """Block averages entering the contrasts, at a set of frequencies.

    f_left[i, k]  = ftilde_L at block r = i+1, frequency omegas[k]
    f_right[i, k] = ftilde_R at block r = i+2, frequency omegas[k]
    """

    omegas: np.ndarray
    f_left: np.ndarray
    f_right: np.ndarray
    q: np.ndarray  # variance profile per frequency


def contrast_panel(x, config: SpectralConfig, omegas) -> ContrastPanel:
    """Compute all adjacent-block contrasts at the given frequencies.

    The series is globally demeaned before any spectral computation.
    """
    vals = np.asarray(x.values if isinstance(x, TimeSeries) else x, dtype=float)
    T = vals.size
    nb = config.M_T - 2
    if nb < 1:
        raise SizeError("need at least 3 blocks for a contrast")
    vals = vals - vals.mean()
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    fL = np.empty((nb, omegas.size))
    fR = np.empty((nb, omegas.size))
    for i in range(nb):
        left_set = block_set(i + 1, config, T=None)
        right_set = block_set(i + 2, config, T=None)
        if left_set.indices[0] - config.n_T + 1 < 1:
            raise SizeError("left windows leave the sample")
        if right_set.indices[-1] + config.n_T > T:
            raise SizeError("right windows leave the sample")
        fL[i] = local_spectra_batch(vals, left_set.indices, LEFT, config, omegas).mean(axis=0)
        fR[i] = local_spectra_batch(vals, right_set.indices, RIGHT, config, omegas).mean(axis=0)
    q = np.array([variance_profile(config, om) for om in omegas])
    return ContrastPanel(omegas=omegas, f_left=fL, f_right=fR, q=q)


def _pool_frequencies(config: SpectralConfig, omega: Optional[float]) -> np.ndarray:
    """Frequencies used for the pooled scale: the thinned grid Pi'."""
    try:
        grid = build_frequency_grid(config)
        pool = list(grid.pi_prime)
    except Exception:
        pool = []
    if omega is not None and not any(abs(p - omega) < 1e-12 for p in pool):
        pool.append(float(omega))
    return np.asarray(pool, dtype=float)


def pooled_relative_scale(panel: ContrastPanel, pool_mask: np.ndarray) -> float:
    """Trimmed pooled estimate vhat of Var(z)/q from the panel's contrasts.

    z uses the symmetric pair level (mean of the two block averages); cells
    with a nonpositive level are skipped.
    """
    fL = panel.f_left[:, pool_mask]
    fR = panel.f_right[:, pool_mask]
    q = panel.q[pool_mask]
    lev = 0.5 * (fL + fR)
    with np.errstate(divide="ignore", invalid="ignore"):
        y = ((fL - fR) / lev) ** 2 / q[None, :]
    y = y[np.isfinite(y)]
    if y.size == 0:
        return 0.0
    n = y.size
    k = min(n - 1, max(1, int(math.floor(TRIM_FRACTION * n))))
    kept = np.sort(y)[: n - k]
    return float(kept.mean() / trimmed_chi2_factor(n, k))


@dataclass(frozen=True)
class TestReport:
    """Outcome of one max-type test."""

    statistic: str
    omega: Optional[float]
    raw_max: float
    normalized: float
    gamma_MT: float
    critical_value: float
    alpha: float
    reject: bool
    p_value: float
    argmax_r: int
    argmax_omega: Optional[float] = None
    detail: Dict[str, list] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "statistic": self.statistic,
            "omega": self.omega,
            "raw_max": self.raw_max,
            "normalized": self.normalized,
            "gamma_MT": self.gamma_MT,
            "critical_value": self.critical_value,
            "alpha": self.alpha,
            "reject": bool(self.reject),
            "p_value": self.p_value,
            "argmax_r": int(self.argmax_r),
            "argmax_omega": self.argmax_omega,
        }
        if self.detail:
            d["detail"] = self.detail
        return d

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _studentized_columns(panel: ContrastPanel, config: SpectralConfig,
                         vhat: float, cols: np.ndarray) -> np.ndarray:
    """sqrt(M_ST)-scaled studentized contrasts for the given frequency columns."""
    fL = panel.f_left[:, cols]
    fR = panel.f_right[:, cols]
    q = panel.q[cols]
    lam = LEVEL_EXPONENT
    with np.errstate(divide="ignore", invalid="ignore"):
        level = np.where(
            (fL > 0) & (fR > 0), fL**lam * fR ** (1.0 - lam), 0.5 * (fL + fR)
        )
    denom = level * np.sqrt(config.M_ST * q[None, :] * vhat / 2.0) + config.epsilon_f
    if np.any(denom <= 0.0):
        raise DegenerateVarianceError(
            "studentizing scale collapsed to zero; set epsilon_f > 0"
        )
    return np.abs(fL - fR) / denom


def _normalize(value: float, config: SpectralConfig) -> Tuple[float, float]:
    g = gamma_mt(config.M_T)
    return math.sqrt(math.log(config.M_T)) * (value - g), g


def s_max(x, omega: float, config: SpectralConfig, alpha: float = 0.05,
          panel: Optional[ContrastPanel] = None) -> TestReport:
    """Studentized max-contrast test at a single frequency."""
    if panel is None:
        panel = contrast_panel(x, config, _pool_frequencies(config, omega))
    cols = np.where(np.abs(panel.omegas - omega) < 1e-12)[0]
    if cols.size == 0:
        raise ConfigError("panel does not contain the requested frequency")
    pool_mask = np.ones(panel.omegas.size, dtype=bool)
    vhat = pooled_relative_scale(panel, pool_mask)
    svals = _studentized_columns(panel, config, vhat, cols[:1])[:, 0]
    # svals are already on the sqrt(M_ST) * S_max scale
    raw = float(svals.max() / math.sqrt(config.M_ST))
    arg_r = int(np.argmax(svals)) + 1
    normalized, g = _normalize(float(svals.max()), config)
    cv = critical_value(alpha)
    return TestReport(
        statistic=STAT_SMAX, omega=float(omega), raw_max=raw,
        normalized=normalized, gamma_MT=g, critical_value=cv, alpha=alpha,
        reject=bool(normalized >= cv), p_value=pvalue_proxy(normalized),
        argmax_r=arg_r,
    )


def r_max(x, omega: float, config: SpectralConfig, alpha: float = 0.05,
          panel: Optional[ContrastPanel] = None) -> TestReport:
    """Self-normalized max ratio-contrast test at a single frequency."""
    if panel is None:
        panel = contrast_panel(x, config, np.array([omega]))
    cols = np.where(np.abs(panel.omegas - omega) < 1e-12)[0]
    if cols.size == 0:
        raise ConfigError("panel does not contain the requested frequency")
    fL = panel.f_left[:, cols[0]]
    fR = panel.f_right[:, cols[0]]
    denom = fR + config.epsilon_f
    if np.any(denom <= 0.0):
        raise DegenerateDenominatorError(
            "ratio denominator collapsed to zero; set epsilon_f > 0"
        )
    rvals = np.abs((fL + config.epsilon_f) / denom - 1.0)
    raw = float(rvals.max())
    arg_r = int(np.argmax(rvals)) + 1
    normalized, g = _normalize(math.sqrt(config.M_ST) * raw, config)
    cv = critical_value(alpha)
    return TestReport(
        statistic=STAT_RMAX, omega=float(omega), raw_max=raw,
        normalized=normalized, gamma_MT=g, critical_value=cv, alpha=alpha,
        reject=bool(normalized >= cv), p_value=pvalue_proxy(normalized),
        argmax_r=arg_r,
    )


def _dmax(x, config: SpectralConfig, grid: FrequencyGrid, alpha: float,
          kind: str, panel: Optional[ContrastPanel]) -> TestReport:
    omegas = np.asarray(grid.pi_prime, dtype=float)
    if panel is None:
        panel = contrast_panel(x, config, omegas)
    cols = np.array([
        int(np.where(np.abs(panel.omegas - om) < 1e-12)[0][0]) for om in omegas
    ])
    g = gamma_mt(config.M_T)
    sqlog = math.sqrt(math.log(config.M_T))
    if kind == STAT_SDMAX:
        vhat = pooled_relative_scale(panel, np.ones(panel.omegas.size, bool))
        vals = _studentized_columns(panel, config, vhat, cols)
        per_freq = sqlog * (vals.max(axis=0) - g)
        raw_rows = vals
    else:
        fL = panel.f_left[:, cols]
        fR = panel.f_right[:, cols] + config.epsilon_f
        if np.any(fR <= 0.0):
            raise DegenerateDenominatorError(
                "ratio denominator collapsed to zero; set epsilon_f > 0"
            )
        raw_rows = np.abs((fL + config.epsilon_f) / fR - 1.0)
        per_freq = sqlog * (math.sqrt(config.M_ST) * raw_rows.max(axis=0) - g)
    k_star = int(np.argmax(per_freq))
    normalized = float(per_freq[k_star] - math.log(grid.n_omega_prime))
    arg_r = int(np.argmax(raw_rows[:, k_star])) + 1
    cv = critical_value(alpha)
    return TestReport(
        statistic=kind, omega=None,
        raw_max=float(raw_rows[:, k_star].max()
                      / (math.sqrt(config.M_ST) if kind == STAT_SDMAX else 1.0)),
        normalized=normalized, gamma_MT=g, critical_value=cv, alpha=alpha,
        reject=bool(normalized >= cv), p_value=pvalue_proxy(normalized),
        argmax_r=arg_r, argmax_omega=float(omegas[k_star]),
        detail={"pi_prime": omegas.tolist(), "per_frequency_normalized": per_freq.tolist()},
    )


def s_dmax(x, config: SpectralConfig, grid: FrequencyGrid,
           alpha: float = 0.05, panel: Optional[ContrastPanel] = None) -> TestReport:
    """Double-sup studentized test over the thinned frequency grid."""
    return _dmax(x, config, grid, alpha, STAT_SDMAX, panel)


def r_dmax(x, config: SpectralConfig, grid: FrequencyGrid,
           alpha: float = 0.05, panel: Optional[ContrastPanel] = None) -> TestReport:
    """Double-sup ratio test over the thinned frequency grid."""
    return _dmax(x, config, grid, alpha, STAT_RDMAX, panel)


def all_tests(x, config: SpectralConfig, grid: FrequencyGrid, omega: float = 0.0,
              alpha: float = 0.05) -> Dict[str, TestReport]:
    """Run all four tests sharing one spectral panel (single frequency omega
    for the max tests, Pi' for the double-sup tests)."""
    omegas = np.asarray(grid.pi_prime, dtype=float)
    if not np.any(np.abs(omegas - omega) < 1e-12):
        omegas = np.concatenate((omegas, [omega]))
    panel = contrast_panel(x, config, omegas)
    return {
        "smax": s_max(x, omega, config, alpha, panel=panel),
        "rmax": r_max(x, omega, config, alpha, panel=panel),
        "sdmax": s_dmax(x, config, grid, alpha, panel=panel),
        "rdmax": r_dmax(x, config, grid, alpha, panel=panel),
    }
