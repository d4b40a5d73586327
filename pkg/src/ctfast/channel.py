"""Quasi-static multipath (tapped delay line) and AWGN channel models."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

DEFAULT_SAMPLE_TIME_NS = 88.0


@dataclass(frozen=True)
class ChannelProfile:
    """Power-delay profile: tap delays in ns and relative powers in dB.

    With ``fading=False`` every realization uses the deterministic tap
    amplitudes ``sqrt(power)`` instead of Rayleigh draws.
    """

    tap_delays: tuple
    tap_powers: tuple
    fading: bool = True

    def __post_init__(self):
        delays = tuple(float(d) for d in self.tap_delays)
        powers = tuple(float(p) for p in self.tap_powers)
        if len(delays) != len(powers) or not delays:
            raise ValueError("delays and powers must be nonempty and of equal length")
        if delays[0] != 0.0:
            raise ValueError("first tap delay must be 0")
        if any(b <= a for a, b in zip(delays, delays[1:])):
            raise ValueError("tap delays must be strictly increasing")
        object.__setattr__(self, "tap_delays", delays)
        object.__setattr__(self, "tap_powers", powers)

    def linear_powers(self) -> np.ndarray:
        """Tap powers normalized to unit total."""
        p = 10.0 ** (np.asarray(self.tap_powers) / 10.0)
        return p / p.sum()

    def sample_indices(self, sample_time_ns: float) -> np.ndarray:
        if sample_time_ns <= 0:
            raise ValueError("sample_time must be positive")
        return np.rint(np.asarray(self.tap_delays) / sample_time_ns).astype(int)

    def max_delay_samples(self, sample_time_ns: float) -> int:
        return int(self.sample_indices(sample_time_ns)[-1])

    def to_json(self) -> str:
        return json.dumps(
            {"delays_ns": list(self.tap_delays), "powers_db": list(self.tap_powers), "fading": self.fading}
        )


def itu_pedb_profile() -> ChannelProfile:
    """ITU-R M.1225 Pedestrian B, six taps."""
    return ChannelProfile(
        tap_delays=(0.0, 200.0, 800.0, 1200.0, 2300.0, 3700.0),
        tap_powers=(0.0, -0.9, -4.9, -8.0, -7.8, -23.9),
    )


def flat_profile(fading: bool = True) -> ChannelProfile:
    """Single tap; ``fading=False`` is the pure AWGN channel."""
    return ChannelProfile(tap_delays=(0.0,), tap_powers=(0.0,), fading=fading)


def load_profile(source: Union[str, Path, dict]) -> ChannelProfile:
    """Profile from ``{"delays_ns": [...], "powers_db": [...]}`` (dict or JSON file).

    An optional boolean ``"fading"`` (default true) selects Rayleigh taps.
    """
    if not isinstance(source, dict):
        source = json.loads(Path(source).read_text())
    try:
        return ChannelProfile(
            tuple(source["delays_ns"]), tuple(source["powers_db"]), bool(source.get("fading", True))
        )
    except KeyError as exc:
        raise ValueError(f"channel profile is missing key {exc}") from None


@dataclass(frozen=True)
class ChannelRealization:
    """Sampled impulse response; ``taps`` may carry leading batch axes."""

    taps: np.ndarray

    @property
    def max_delay_samples(self) -> int:
        return self.taps.shape[-1] - 1


@dataclass(frozen=True)
class NoiseSpec:
    """Complex AWGN with ``variance`` per sample (``variance/2`` per component)."""

    variance: float

    def __post_init__(self):
        if not self.variance >= 0:
            raise ValueError("noise variance must be nonnegative")


def realize(
    profile: ChannelProfile,
    sample_time_ns: float,
    rng: np.random.Generator,
    count: Union[int, None] = None,
) -> ChannelRealization:
    """Draw Rayleigh tap gains for ``profile`` on the sample grid.

    Each profile tap is a zero-mean circular complex Gaussian whose variance
    is its normalized linear power, placed at the nearest sample. Taps that
    round onto the same sample are summed, so their powers add. A profile
    with ``fading=False`` draws nothing from ``rng``. With
    ``count`` a batch of independent realizations is drawn along axis 0.
    """
    idx = profile.sample_indices(sample_time_ns)
    power = profile.linear_powers()
    shape = (len(idx),) if count is None else (count, len(idx))
    if profile.fading:
        gains = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(power / 2)
    else:
        gains = np.broadcast_to(np.sqrt(power), shape).astype(np.complex128)
    taps = np.zeros(shape[:-1] + (idx[-1] + 1,), dtype=np.complex128)
    for j, d in enumerate(idx):
        taps[..., d] += gains[..., j]
    return ChannelRealization(taps)


def complex_noise(rng: np.random.Generator, shape, variance: float) -> np.ndarray:
    if variance == 0:
        return np.zeros(shape, dtype=np.complex128)
    scale = np.sqrt(variance / 2)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def convolve(taps: np.ndarray, tx: np.ndarray) -> np.ndarray:
    """Full linear convolution along the last axis, batch axes broadcast."""
    tx = np.asarray(tx, dtype=np.complex128)
    taps = np.asarray(taps, dtype=np.complex128)
    length = tx.shape[-1] + taps.shape[-1] - 1
    shape = np.broadcast_shapes(tx.shape[:-1], taps.shape[:-1]) + (length,)
    out = np.zeros(shape, dtype=np.complex128)
    for d in np.flatnonzero(np.any(taps.reshape(-1, taps.shape[-1]) != 0, axis=0)):
        out[..., d:d + tx.shape[-1]] += taps[..., d:d + 1] * tx
    return out


def apply(
    realization: ChannelRealization,
    tx: np.ndarray,
    noise: NoiseSpec,
    rng: Union[np.random.Generator, None] = None,
) -> np.ndarray:
    """Convolve ``tx`` with the taps and add AWGN.

    Output length is ``len(tx) + max_delay_samples``.
    """
    tx = np.asarray(tx, dtype=np.complex128)
    if tx.shape[-1] == 0:
        raise ValueError("tx stream is empty")
    out = convolve(realization.taps, tx)
    if noise.variance > 0:
        if rng is None:
            raise ValueError("a random generator is required when noise variance > 0")
        out += complex_noise(rng, out.shape, noise.variance)
    return out


def freq_response(realization: ChannelRealization, n: int) -> np.ndarray:
    """``n``-point DFT of the zero-padded tap vector (natural order)."""
    if realization.max_delay_samples >= n:
        raise ValueError(f"channel memory {realization.max_delay_samples} does not fit in {n} samples")
    return np.fft.fft(realization.taps, n=n, axis=-1)


def profile_from_spec(spec: str) -> ChannelProfile:
    """Resolve a CLI channel string: ``awgn``, ``pedb`` or ``file:<path>``."""
    if spec == "awgn":
        return flat_profile(fading=False)
    if spec == "pedb":
        return itu_pedb_profile()
    if spec.startswith("file:"):
        return load_profile(spec[len("file:"):])
    raise ValueError(f"unknown channel {spec!r}; expected awgn, pedb or file:<path>")
