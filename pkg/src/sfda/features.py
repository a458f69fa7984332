"""Frequency-domain wavelet featurization of multichannel curves.

Each channel is mapped to the magnitudes of its first frequency bins
(unnormalized FFT after zero-padding to a power of two) and then through a
full-depth orthonormal discrete wavelet transform; the per-channel
coefficient vectors are concatenated in channel order.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class MultichannelRecord:
    """c curves of T time points each (rows = channels)."""

    channels: np.ndarray

    def __post_init__(self):
        arr = np.atleast_2d(np.asarray(self.channels, dtype=float))
        if arr.shape[1] < 2:
            raise ValidationError("curves need at least two time points")
        if not np.isfinite(arr).all():
            raise ValidationError("curves contain non-finite entries")
        object.__setattr__(self, "channels", arr)

    @property
    def n_channels(self) -> int:
        return self.channels.shape[0]


class WaveletFamily(Enum):
    HAAR = "haar"
    D4 = "d4"


_SQRT3 = np.sqrt(3.0)
_FILTERS = {
    WaveletFamily.HAAR: np.array([1.0, 1.0]) / np.sqrt(2.0),
    WaveletFamily.D4: np.array([1.0 + _SQRT3, 3.0 + _SQRT3,
                                3.0 - _SQRT3, 1.0 - _SQRT3]) / (4.0 * np.sqrt(2.0)),
}


def _filters(family: WaveletFamily):
    low = _FILTERS[family]
    high = (low[::-1] * (-1.0) ** np.arange(low.size))
    return low, high


def _next_pow2(n: int) -> int:
    return 1 << (int(n - 1)).bit_length()


def spectrum(curve: np.ndarray, n_freq: int) -> np.ndarray:
    """Magnitudes of the first n_freq bins of the unnormalized DFT.

    The curve is zero-padded to the next power of two before transforming;
    higher-frequency bins are discarded.
    """
    curve = np.asarray(curve, dtype=float)
    if curve.ndim != 1:
        raise ValidationError("curve must be one-dimensional")
    padded_len = _next_pow2(curve.size)
    if n_freq < 1 or n_freq > padded_len:
        raise ValidationError(
            f"n_freq must lie in 1..{padded_len} (padded length)")
    padded = np.zeros(padded_len)
    padded[:curve.size] = curve
    return np.abs(np.fft.fft(padded)[:n_freq])


def wavelet_transform(signal: np.ndarray,
                      family: WaveletFamily = WaveletFamily.HAAR) -> np.ndarray:
    """Full-depth orthonormal periodic DWT of a power-of-two-length signal.

    Output ordering is coarsest first: the single scaling coefficient, then
    detail coefficients from the coarsest to the finest level.  Energy is
    preserved exactly up to round-off.
    """
    signal = np.asarray(signal, dtype=float)
    n = signal.size
    if n < 2 or n & (n - 1):
        raise ValidationError("signal length must be a power of two >= 2")
    low, high = _filters(family)
    approx = signal
    details = []
    while approx.size > 1:
        m = approx.size
        smooth = np.zeros(m // 2)
        detail = np.zeros(m // 2)
        for k in range(low.size):
            rolled = np.roll(approx, -k)[::2]
            smooth += low[k] * rolled
            detail += high[k] * rolled
        details.append(detail)
        approx = smooth
    return np.concatenate([approx] + details[::-1])


def inverse_wavelet_transform(coeffs: np.ndarray,
                              family: WaveletFamily = WaveletFamily.HAAR) -> np.ndarray:
    """Inverse of :func:`wavelet_transform`."""
    coeffs = np.asarray(coeffs, dtype=float)
    n = coeffs.size
    if n < 2 or n & (n - 1):
        raise ValidationError("coefficient length must be a power of two >= 2")
    low, high = _filters(family)
    approx = coeffs[:1]
    pos = 1
    while pos < n:
        m = approx.size
        detail = coeffs[pos:pos + m]
        pos += m
        out = np.zeros(2 * m)
        for k in range(low.size):
            idx = (2 * np.arange(m) + k) % (2 * m)
            np.add.at(out, idx, low[k] * approx + high[k] * detail)
        approx = out
    return approx


def dwt64(signal: np.ndarray,
          family: WaveletFamily = WaveletFamily.HAAR) -> np.ndarray:
    """Orthonormal DWT of a length-64 signal (the default feature width)."""
    signal = np.asarray(signal, dtype=float)
    if signal.shape != (64,):
        raise ValidationError("dwt64 requires a signal of length exactly 64")
    return wavelet_transform(signal, family)


def featurize(rec: MultichannelRecord, n_coeff: int = 64,
              family: WaveletFamily = WaveletFamily.HAAR) -> np.ndarray:
    """Concatenated per-channel wavelet coefficients of the channel spectra.

    Output length is c * n_coeff; n_coeff must be a power of two (64 by
    default, 16 for narrower pipelines).
    """
    if n_coeff < 2 or n_coeff & (n_coeff - 1):
        raise ValidationError("n_coeff must be a power of two >= 2")
    parts = [wavelet_transform(spectrum(ch, n_coeff), family)
             for ch in rec.channels]
    return np.concatenate(parts)
