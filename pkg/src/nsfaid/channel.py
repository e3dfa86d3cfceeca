"""BPSK over AWGN, the gain-factor quantizer and its exact output pmf."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def sigma_from_snr(snr_db: float) -> float:
    """Noise standard deviation for ``SNR(dB) = 10 log10(1 / sigma^2)``."""
    return 10.0 ** (-snr_db / 20.0)


def snr_from_sigma(sigma: float) -> float:
    return -20.0 * math.log10(sigma)


@dataclass(frozen=True)
class ChannelParams:
    sigma: float
    mu: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")

    @classmethod
    def from_snr(cls, snr_db: float, mu: float) -> "ChannelParams":
        return cls(sigma_from_snr(snr_db), mu)

    @property
    def snr_db(self) -> float:
        return snr_from_sigma(self.sigma)


def bpsk(bits) -> np.ndarray:
    """Map bit 0 to +1 and bit 1 to -1."""
    return 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)


def transmit(bits, sigma: float, rng: np.random.Generator) -> np.ndarray:
    x = bpsk(bits)
    return x + sigma * rng.standard_normal(x.shape)


def quantize(y, mu: float, Q: int):
    """``[mu * y]_M``: nearest integer, halves away from zero, saturated to ``[-Q, Q]``."""
    v = mu * np.asarray(y, dtype=np.float64)
    r = np.sign(v) * np.floor(np.abs(v) + 0.5)
    out = np.clip(r, -Q, Q).astype(np.int64)
    return int(out) if out.ndim == 0 else out


def _upper_tail(t: float, mean: float, sigma: float) -> float:
    """``P(y >= t)`` for ``y ~ N(mean, sigma^2)``."""
    p = 0.5 * math.erfc((t - mean) / (sigma * math.sqrt(2.0)))
    return p if p >= 1e-300 else 0.0


def channel_pmf(sigma: float, mu: float, Q: int, x: float = 1.0) -> np.ndarray:
    """Exact pmf of the quantized channel output, indexed ``m + Q`` for ``m`` in ``[-Q, Q]``.

    Bin ``m`` collects ``y`` in ``[(m - 1/2)/mu, (m + 1/2)/mu)``; the outer bins
    absorb the tails. Each bin is integrated on the tail side of the mean so
    that small bins keep full relative precision.
    """
    def sf(t):
        return 0.0 if t == math.inf else 1.0 if t == -math.inf else _upper_tail(t, x, sigma)

    def cdf(t):
        return 1.0 if t == math.inf else 0.0 if t == -math.inf else _upper_tail(-t, -x, sigma)

    pmf = np.empty(2 * Q + 1)
    for i, m in enumerate(range(-Q, Q + 1)):
        lo = -math.inf if m == -Q else (m - 0.5) / mu
        hi = math.inf if m == Q else (m + 0.5) / mu
        if lo >= x:
            p = sf(lo) - sf(hi)
        elif hi <= x:
            p = cdf(hi) - cdf(lo)
        else:
            p = 1.0 - cdf(lo) - sf(hi)
        pmf[i] = max(p, 0.0)
    return pmf / pmf.sum()
