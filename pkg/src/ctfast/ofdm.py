"""Conventional OFDM and CT-OFDM transmitter/receiver chains.

Both systems use unitary transforms in the link: the conventional modulator
is the ``1/sqrt(N)`` IFFT, the CT modulator is the inverse fast CT transform
(already unitary). The receiver removes the cyclic prefix, equalizes each
subcarrier with MMSE weights and, for CT-OFDM, returns to the time domain and
applies the forward CT transform before slicing.

Arrays carry frames along leading axes and samples along the last axis.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .transforms import FctPlan, fct, ifct, plan_fct

SYSTEMS = ("conventional", "ct")
_SYSTEM_ALIASES = {"conv": "conventional", "conventional": "conventional", "ct": "ct"}


@functools.lru_cache(maxsize=None)
def cached_plan(n: int) -> FctPlan:
    """Plans are immutable, so one per length is shared process-wide."""
    return plan_fct(n)


# ---------------------------------------------------------------------------
# constellations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Constellation:
    """Square Gray-labeled QAM with unit average energy.

    Labels are read MSB first; the first half of the bits of a symbol drives
    the in-phase axis, the second half the quadrature axis. On each axis the
    first bit picks the sign (0 -> positive) and the remaining bits pick the
    magnitude in Gray order.
    """

    name: str
    bits_per_symbol: int

    @property
    def bits_per_axis(self) -> int:
        return self.bits_per_symbol // 2

    @property
    def scale(self) -> float:
        m = 2 ** self.bits_per_axis
        return float(np.sqrt(2 * (m * m - 1) / 3))

    def _axis_levels(self, axis_bits: np.ndarray) -> np.ndarray:
        # axis_bits: (..., k) -> PAM level in {+-1, +-3, ...}
        k = axis_bits.shape[-1]
        sign = 1 - 2 * axis_bits[..., 0].astype(np.int64)
        if k == 1:
            return sign
        # Gray-coded magnitude: 0 -> largest
        gray = np.zeros(axis_bits.shape[:-1], dtype=np.int64)
        acc = np.zeros_like(gray)
        for i in range(1, k):
            acc ^= axis_bits[..., i].astype(np.int64)
            gray = (gray << 1) | acc
        m = 2 ** (k - 1)
        return sign * (2 * (m - 1 - gray) + 1)

    @property
    def points(self) -> np.ndarray:
        """All ``2**bits_per_symbol`` points indexed by their integer label."""
        b = self.bits_per_symbol
        labels = np.arange(2 ** b)
        bits = (labels[:, None] >> np.arange(b - 1, -1, -1)) & 1
        return self.map(bits.reshape(-1))

    def map(self, bits) -> np.ndarray:
        bits = np.asarray(bits)
        if bits.shape[-1] % self.bits_per_symbol:
            raise ValueError(
                f"bit count {bits.shape[-1]} is not a multiple of {self.bits_per_symbol}"
            )
        groups = bits.reshape(*bits.shape[:-1], -1, self.bits_per_symbol)
        k = self.bits_per_axis
        re = self._axis_levels(groups[..., :k])
        im = self._axis_levels(groups[..., k:])
        return (re + 1j * im) / self.scale

    def demap(self, symbols) -> np.ndarray:
        """Minimum-distance hard decisions, one axis at a time."""
        symbols = np.asarray(symbols) * self.scale
        out = np.concatenate(
            [self._axis_bits(symbols.real), self._axis_bits(symbols.imag)], axis=-1
        )
        return out.reshape(*symbols.shape[:-1], -1).astype(np.uint8)

    def _axis_bits(self, level: np.ndarray) -> np.ndarray:
        k = self.bits_per_axis
        m = 2 ** (k - 1)
        bits = [(level < 0)]
        if k > 1:
            # nearest magnitude index 0..m-1 (0 = largest)
            mag = np.clip(np.rint((np.abs(level) - 1) / 2), 0, m - 1).astype(np.int64)
            gray_index = m - 1 - mag
            gray = gray_index ^ (gray_index >> 1)
            for i in range(k - 2, -1, -1):
                bits.append((gray >> i) & 1)
        return np.stack(bits, axis=-1)


QPSK = Constellation("qpsk", 2)
QAM16 = Constellation("16qam", 4)
_CONSTELLATIONS = {"qpsk": QPSK, "16qam": QAM16, "qam16": QAM16, "16-qam": QAM16}


def get_constellation(name: str) -> Constellation:
    try:
        return _CONSTELLATIONS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown constellation {name!r}; expected qpsk or 16qam") from None


def map_bits(bits, constellation) -> np.ndarray:
    if isinstance(constellation, str):
        constellation = get_constellation(constellation)
    return constellation.map(bits)


def demap_hard(symbols, constellation) -> np.ndarray:
    if isinstance(constellation, str):
        constellation = get_constellation(constellation)
    return constellation.demap(symbols)


# ---------------------------------------------------------------------------
# link
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OfdmConfig:
    n: int = 1024
    cp_len: int = 256
    constellation: str = "qpsk"
    system: str = "ct"
    sample_time_ns: float = 88.0

    def __post_init__(self):
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError(f"subcarrier count must be a power of two >= 8, got {self.n}")
        if not 0 <= self.cp_len < self.n:
            raise ValueError(f"cp_len must satisfy 0 <= cp_len < N, got {self.cp_len}")
        system = _SYSTEM_ALIASES.get(self.system)
        if system is None:
            raise ValueError(f"unknown system {self.system!r}")
        object.__setattr__(self, "system", system)
        object.__setattr__(self, "constellation", get_constellation(self.constellation).name)
        if self.sample_time_ns <= 0:
            raise ValueError("sample_time_ns must be positive")

    @property
    def modem(self) -> Constellation:
        return get_constellation(self.constellation)

    @property
    def bits_per_frame(self) -> int:
        return self.n * self.modem.bits_per_symbol

    @property
    def plan(self) -> FctPlan:
        return cached_plan(self.n)


def unitary_fft(x) -> np.ndarray:
    return np.fft.fft(x, axis=-1, norm="ortho")


def unitary_ifft(x) -> np.ndarray:
    return np.fft.ifft(x, axis=-1, norm="ortho")


def modulate(config: OfdmConfig, X) -> np.ndarray:
    """Frequency-domain symbols to one time-domain block (no prefix)."""
    X = np.asarray(X, dtype=np.complex128)
    if X.shape[-1] != config.n:
        raise ValueError(f"expected {config.n} symbols per frame, got {X.shape[-1]}")
    if config.system == "conventional":
        return unitary_ifft(X)
    return ifct(config.plan, X)


def add_cp(config: OfdmConfig, s: np.ndarray) -> np.ndarray:
    if config.cp_len == 0:
        return s
    return np.concatenate([s[..., -config.cp_len:], s], axis=-1)


def tx(config: OfdmConfig, X) -> np.ndarray:
    """Symbols to transmitted samples with cyclic prefix prepended."""
    return add_cp(config, modulate(config, X))


def mmse_weights(H, snr_linear: float) -> np.ndarray:
    """Per-subcarrier MMSE gains ``conj(H) / (|H|^2 + 1/snr)``.

    ``snr_linear = inf`` gives zero forcing; subcarriers with ``H = 0`` get 0.
    """
    if not snr_linear > 0:
        raise ValueError("snr_linear must be positive")
    H = np.asarray(H, dtype=np.complex128)
    denom = np.abs(H) ** 2 + 1.0 / snr_linear
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.where(denom > 0, np.conj(H) / np.where(denom > 0, denom, 1.0), 0.0)
    return g


def equalize(config: OfdmConfig, r, H, noise_var: float, unbiased: bool = True) -> np.ndarray:
    """Receiver front end up to (but excluding) the slicer.

    ``unbiased`` divides out the MMSE shrinkage (per subcarrier for
    conventional OFDM, the subcarrier average for CT-OFDM) so decision
    regions of multi-level constellations stay put; QPSK decisions are
    unaffected by it.
    """
    r = np.asarray(r, dtype=np.complex128)
    n, cp = config.n, config.cp_len
    if r.shape[-1] < cp + n:
        raise ValueError(f"stream of {r.shape[-1]} samples is shorter than cp + N = {cp + n}")
    Z = unitary_fft(r[..., cp:cp + n])
    snr = np.inf if noise_var == 0 else 1.0 / noise_var
    H = np.asarray(H, dtype=np.complex128)
    G = mmse_weights(H, snr)
    Zhat = G * Z
    bias = (G * H).real
    if config.system == "conventional":
        if unbiased:
            Zhat = np.where(bias > 0, Zhat / np.where(bias > 0, bias, 1.0), 0.0)
        return Zhat
    y = fct(config.plan, unitary_ifft(Zhat))
    if unbiased:
        y = y / np.mean(bias, axis=-1, keepdims=True)
    return y


def rx(config: OfdmConfig, r, H, noise_var: float, unbiased: bool = True) -> np.ndarray:
    """Received samples to hard-decision bits."""
    return config.modem.demap(equalize(config, r, H, noise_var, unbiased))
