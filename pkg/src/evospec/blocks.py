"""Block index sets, block averages, and the local long-run variance.

A block r covers roughly [r m_T - m_T/2, r m_T + m_T/2].  Within it, the
anchors kept for averaging start at r m_T - floor(m_T/2) + floor(n_T/2) + 1
and advance in steps of m_ST; exactly M_ST anchors are kept.  The
floor(n_T/2) offset recenters the left-sided windows onto the block.

Around a candidate split time r, the left set starts at r - m_T + 1 and the
right set at r + 1, both with stride m_ST and M_ST elements.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .config import SpectralConfig
from .errors import ConfigError
from .spectral import LocalSpectrum

KIND_SR = "Sr"
KIND_SLR = "SLr"
KIND_SRR = "SRr"


@dataclass(frozen=True)
class BlockIndexSet:
    """M_ST ascending time indices with constant stride m_ST."""

    kind: str
    anchor: int
    indices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "indices", np.asarray(self.indices, dtype=int))


def block_set(r: int, config: SpectralConfig, T: Optional[int] = None) -> BlockIndexSet:
    """Sub-sampling anchors of block r (1-indexed block number).

    Raises
    ------
    IndexError
        If r is outside [1, M_T], the anchors reach below n_T, or (when T is
        given) above T - n_T.
    """
    if not (1 <= r <= config.M_T):
        raise IndexError(f"block number {r} outside [1, {config.M_T}]")
    start = r * config.m_T - config.m_T // 2 + config.n_T // 2 + 1
    idx = start + config.m_ST * np.arange(config.M_ST)
    if idx[0] < config.n_T:
        raise IndexError(f"block {r} anchors reach below n_T={config.n_T}")
    if T is not None and idx[-1] > T - config.n_T:
        raise IndexError(f"block {r} anchors reach above T - n_T")
    return BlockIndexSet(kind=KIND_SR, anchor=r, indices=idx)


def lr_sets(r: int, config: SpectralConfig,
            T: Optional[int] = None) -> Tuple[BlockIndexSet, BlockIndexSet]:
    """Left and right index sets around a candidate split time r.

    Left: {r - m_T + 1 + j m_ST}; right: {r + 1 + j m_ST}, j = 0..M_ST-1.

    Raises
    ------
    IndexError
        If the left set reaches below n_T or (when T is given) the right
        set's windows leave the sample.
    """
    left_start = r - config.m_T + 1
    right_start = r + 1
    left = left_start + config.m_ST * np.arange(config.M_ST)
    right = right_start + config.m_ST * np.arange(config.M_ST)
    if left[0] < config.n_T:
        raise IndexError(f"split {r}: left set reaches below n_T={config.n_T}")
    if T is not None and right[-1] + config.n_T > T:
        raise IndexError(f"split {r}: right windows leave the sample")
    return (
        BlockIndexSet(kind=KIND_SLR, anchor=r, indices=left),
        BlockIndexSet(kind=KIND_SRR, anchor=r, indices=right),
    )


def feasible_split_range(T: int, config: SpectralConfig) -> Tuple[int, int]:
    """Smallest and largest split times r for which lr_sets fits in [1, T]."""
    lo = config.n_T + config.m_T - 1
    hi = T - config.n_T - config.m_ST * (config.M_ST - 1) - 1
    return lo, hi


def _positions(spectrum: LocalSpectrum, index_set: BlockIndexSet) -> np.ndarray:
    pos = np.searchsorted(spectrum.time_indices, index_set.indices)
    ok = (pos < spectrum.time_indices.size)
    if not np.all(ok) or np.any(spectrum.time_indices[pos[ok]] != index_set.indices[ok]) \
            or ok.sum() != index_set.indices.size:
        raise IndexError("index set not covered by spectrum")
    return pos


def block_average(spectrum: LocalSpectrum, index_set: BlockIndexSet,
                  omega: float) -> float:
    """Arithmetic mean of the spectrum over the set's anchors at omega."""
    col = spectrum.column(omega)
    return float(col[_positions(spectrum, index_set)].mean())


def _gamma_hat(values: np.ndarray, lag: int) -> float:
    """Lag autocovariance of the demeaned sub-sampled sequence, divisor M_ST."""
    M = values.size
    centered = values - values.mean()
    if lag >= M:
        return 0.0
    return float(np.dot(centered[lag:], centered[: M - lag]) / M)


def lrv_estimate(spectrum: LocalSpectrum, index_set: BlockIndexSet, omega: float,
                 config: SpectralConfig) -> float:
    """Bartlett-weighted long-run variance of the block's spectral estimates.

    sum_{|j| < M_ST} K1(b_1T j) Gamma_hat(j) with K1 the Bartlett kernel and
    Gamma_hat(j) the lag-j autocovariance (divisor M_ST) of the sub-sampled,
    block-demeaned sequence.  Floored at zero.
    """
    if index_set.indices.size < 2:
        raise ConfigError("need at least 2 sub-sampled points")
    vals = spectrum.column(omega)[_positions(spectrum, index_set)]
    total = _gamma_hat(vals, 0)
    for j in range(1, index_set.indices.size):
        w = 1.0 - config.b_1T * j
        if w <= 0.0:
            break
        total += 2.0 * w * _gamma_hat(vals, j)
    return max(total, 0.0)


def values_at(spectrum: LocalSpectrum, index_set: BlockIndexSet,
              omega: float) -> np.ndarray:
    """Spectrum values over the set's anchors at omega (helper for stats)."""
    return spectrum.column(omega)[_positions(spectrum, index_set)]
