"""PAPR/CCDF estimation, bit-error counting and analytic BER references."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

Z95 = 1.959963984540054


def papr(s, axis: int = -1) -> np.ndarray:
    """Peak-to-average power ratio (linear) of each block along ``axis``."""
    p = np.abs(np.asarray(s, dtype=np.complex128)) ** 2
    mean = p.mean(axis=axis)
    if np.any(mean == 0):
        raise ValueError("PAPR is undefined for an all-zero block")
    out = p.max(axis=axis) / mean
    return float(out) if np.ndim(out) == 0 else out


def papr_db(s, axis: int = -1):
    return 10.0 * np.log10(papr(s, axis=axis))


def oversample(s, factor: int) -> np.ndarray:
    """Band-limited interpolation of each block by ``factor``.

    The block spectrum is zero-padded in the middle (Nyquist bin split in
    two), which for conventional OFDM equals the zero-padded IFFT of the
    subcarrier symbols. Original samples reappear at every ``factor``-th
    position; power per sample is preserved when the Nyquist bin is empty.
    """
    s = np.asarray(s, dtype=np.complex128)
    if factor == 1:
        return s
    if factor < 1 or int(factor) != factor:
        raise ValueError("oversampling factor must be a positive integer")
    n = s.shape[-1]
    S = np.fft.fft(s, axis=-1)
    padded = np.zeros(s.shape[:-1] + (n * factor,), dtype=np.complex128)
    half = n // 2
    padded[..., :half] = S[..., :half]
    padded[..., -half:] = S[..., -half:]
    padded[..., half] = S[..., half] / 2
    padded[..., n * factor - half] = S[..., half] / 2
    return np.fft.ifft(padded, axis=-1) * factor


@dataclass(frozen=True)
class CcdfCurve:
    thresholds_db: np.ndarray
    probabilities: np.ndarray
    sample_count: int

    def at(self, threshold_db: float) -> float:
        i = int(np.searchsorted(self.thresholds_db, threshold_db))
        if i >= len(self.thresholds_db) or self.thresholds_db[i] != threshold_db:
            raise KeyError(threshold_db)
        return float(self.probabilities[i])


def ccdf(papr_samples_db: Sequence[float], thresholds_db: Sequence[float]) -> CcdfCurve:
    """Empirical ``Pr(PAPR > threshold)`` at each threshold."""
    samples = np.sort(np.asarray(papr_samples_db, dtype=float).ravel())
    if samples.size == 0:
        raise ValueError("CCDF needs at least one PAPR sample")
    thresholds = np.asarray(thresholds_db, dtype=float).ravel()
    above = samples.size - np.searchsorted(samples, thresholds, side="right")
    return CcdfCurve(thresholds, above / samples.size, int(samples.size))


@dataclass(frozen=True)
class BerPoint:
    ebn0_db: float
    bit_errors: int
    bits_tested: int

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_tested if self.bits_tested else float("nan")

    @property
    def sigma(self) -> float:
        p = self.ber
        return math.sqrt(p * (1 - p) / self.bits_tested)

    @property
    def ci95(self) -> float:
        """Normal-approximation binomial 95% half-width."""
        return Z95 * self.sigma

    def merge(self, other: "BerPoint") -> "BerPoint":
        return BerPoint(self.ebn0_db, self.bit_errors + other.bit_errors, self.bits_tested + other.bits_tested)

    def as_dict(self) -> dict:
        return {
            "ebn0_db": self.ebn0_db,
            "ber": self.ber,
            "ci95": self.ci95,
            "bits": self.bits_tested,
            "errors": self.bit_errors,
        }


def ber_count(tx_bits, rx_bits, ebn0_db: float = float("nan")) -> BerPoint:
    tx_bits = np.asarray(tx_bits)
    rx_bits = np.asarray(rx_bits)
    if tx_bits.shape != rx_bits.shape:
        raise ValueError(f"bit streams differ in shape: {tx_bits.shape} vs {rx_bits.shape}")
    errors = int(np.count_nonzero(tx_bits != rx_bits))
    return BerPoint(ebn0_db, errors, int(tx_bits.size))


def q_function(x):
    return 0.5 * np.vectorize(math.erfc)(np.asarray(x, dtype=float) / math.sqrt(2.0))


def qpsk_awgn_theory(ebn0_db):
    """Gray QPSK over AWGN: ``Q(sqrt(2 Eb/N0))``."""
    ebn0 = 10.0 ** (np.asarray(ebn0_db, dtype=float) / 10.0)
    out = q_function(np.sqrt(2.0 * ebn0))
    return float(out) if np.ndim(out) == 0 else out


def ebn0_to_noise_var(ebn0_db: float, bits_per_symbol: int) -> float:
    """Complex noise variance per sample for unit-energy symbols (Es = 1)."""
    return 1.0 / (bits_per_symbol * 10.0 ** (ebn0_db / 10.0))
