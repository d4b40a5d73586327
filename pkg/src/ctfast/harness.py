"""Experiment orchestration: seeding, chunked parallel Monte Carlo, persistence.

Work is split into fixed-size chunks of frames. Chunk ``c`` of sweep point
``j`` draws all its randomness from ``SeedSequence(seed, spawn_key=(tag, j, c))``
so results depend only on the master seed and the spec, never on how many
workers ran the chunks or in which order they finished. Both systems consume
the same chunk streams (same bits, channel draws and noise), which keeps the
comparison between them paired.
"""

from __future__ import annotations

import concurrent.futures
import csv
import io
import json
import os
import subprocess
import time
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .channel import NoiseSpec, apply, freq_response, profile_from_spec, realize
from .metrics import BerPoint, ccdf, ebn0_to_noise_var, oversample, papr_db
from .ofdm import OfdmConfig, modulate, rx, tx

PAPR_TAG = 0
BER_TAG = 1

DEFAULT_THRESHOLDS_DB = tuple(np.round(np.arange(0.0, 14.0001, 0.25), 2))

# conventions that affect how numbers in a result should be read
RUN_NOTES = {
    "sample_time": "default 88 ns sample time; a 10 MHz channel spacing would imply 100 ns",
    "ebn0": "Es = 1 per subcarrier symbol, Eb = Es / bits_per_symbol, cyclic prefix energy not charged to Eb",
    "transforms": "unitary 1/sqrt(N) scaling in the link",
}


class SpecError(ValueError):
    """The experiment spec cannot be run as given."""


def trial_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for one chunk, derived from the master seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def worker_count() -> int:
    env = os.environ.get("CTFAST_THREADS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise SpecError(f"CTFAST_THREADS must be an integer, got {env!r}") from None
        return max(1, value)
    return max(1, min(os.cpu_count() or 1, 8))


def git_describe() -> Optional[str]:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            capture_output=True,
            text=True,
            timeout=5,
            cwd=os.path.dirname(os.path.abspath(__file__)),
        )
    except (OSError, subprocess.SubprocessError):
        return None
    if out.returncode != 0:
        return None
    return out.stdout.strip() or None


@dataclass(frozen=True)
class ExperimentSpec:
    command: str
    n: int = 1024
    cp_len: int = 256
    constellation: str = "qpsk"
    systems: Tuple[str, ...] = ("conventional", "ct")
    channel: str = "pedb"
    sample_time_ns: float = 88.0
    ebn0_db: Tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0)
    frames: int = 1000
    seed: int = 1
    oversample: int = 1
    chunk_frames: int = 64
    min_errors: int = 100
    max_bits: int = 10 ** 8
    thresholds_db: Tuple[float, ...] = DEFAULT_THRESHOLDS_DB

    def __post_init__(self):
        if self.frames < 1:
            raise SpecError("frames must be >= 1")
        if self.chunk_frames < 1:
            raise SpecError("chunk_frames must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise SpecError("seed must be a 64-bit unsigned integer")
        if self.oversample not in (1, 2, 4, 8):
            raise SpecError("oversample must be one of 1, 2, 4, 8")
        for system in self.systems:
            self.config(system)

    def config(self, system: str) -> OfdmConfig:
        try:
            return OfdmConfig(self.n, self.cp_len, self.constellation, system, self.sample_time_ns)
        except ValueError as exc:
            raise SpecError(str(exc)) from None

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d


@dataclass
class RunResult:
    spec: ExperimentSpec
    payload: dict
    wall_time_s: float = 0.0
    version: str = __version__
    git: Optional[str] = field(default_factory=git_describe)

    def header(self) -> dict:
        return {"spec": self.spec.to_dict(), "seed": self.spec.seed, "version": self.version, "notes": RUN_NOTES}

    def to_json(self) -> str:
        envelope = dict(self.header(), git_describe=self.git, wall_time_s=self.wall_time_s, payload=self.payload)
        return json.dumps(envelope, indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.header(), sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        if self.spec.command == "papr":
            w.writerow(["system", "threshold_db", "ccdf"])
            for system, curve in self.payload["curves"].items():
                for t, p in zip(curve["thresholds_db"], curve["ccdf"]):
                    w.writerow([system, repr(float(t)), repr(float(p))])
        elif self.spec.command == "ber":
            w.writerow(["system", "ebn0_db", "ber", "ci95", "bits"])
            for system, points in self.payload["points"].items():
                for pt in points:
                    w.writerow([system, repr(pt["ebn0_db"]), repr(pt["ber"]), repr(pt["ci95"]), pt["bits"]])
        else:
            raise ValueError(f"no CSV layout for command {self.spec.command!r}")
        return buf.getvalue()

    def write(self, path: str, fmt: str) -> None:
        text = self.to_csv() if fmt == "csv" else self.to_json()
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _map_ordered(fn, items: Sequence, workers: int) -> List:
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# PAPR
# ---------------------------------------------------------------------------


def _papr_chunk(spec: ExperimentSpec, chunk: int) -> Dict[str, np.ndarray]:
    first = chunk * spec.chunk_frames
    count = min(spec.chunk_frames, spec.frames - first)
    rng = trial_rng(spec.seed, PAPR_TAG, chunk)
    modem = spec.config(spec.systems[0]).modem
    bits = rng.integers(0, 2, size=(count, spec.n * modem.bits_per_symbol), dtype=np.uint8)
    symbols = modem.map(bits)
    out = {}
    for system in spec.systems:
        s = modulate(spec.config(system), symbols)
        out[system] = papr_db(oversample(s, spec.oversample))
    return out


def run_papr(spec: ExperimentSpec, workers: Optional[int] = None) -> RunResult:
    """PAPR samples for every system and their CCDF curves."""
    start = time.perf_counter()
    workers = worker_count() if workers is None else workers
    n_chunks = -(-spec.frames // spec.chunk_frames)
    parts = _map_ordered(lambda c: _papr_chunk(spec, c), list(range(n_chunks)), workers)
    curves = {}
    for system in spec.systems:
        samples = np.concatenate([p[system] for p in parts])
        curve = ccdf(samples, spec.thresholds_db)
        curves[system] = {
            "thresholds_db": [float(t) for t in curve.thresholds_db],
            "ccdf": [float(p) for p in curve.probabilities],
            "frames": curve.sample_count,
            "mean_papr_db": float(np.mean(samples)),
            "max_papr_db": float(np.max(samples)),
        }
    return RunResult(spec, {"curves": curves}, wall_time_s=time.perf_counter() - start)


# ---------------------------------------------------------------------------
# BER
# ---------------------------------------------------------------------------


def check_feasible(spec: ExperimentSpec):
    try:
        profile = profile_from_spec(spec.channel)
    except (OSError, ValueError) as exc:
        raise SpecError(f"cannot load channel {spec.channel!r}: {exc}") from None
    memory = profile.max_delay_samples(spec.sample_time_ns)
    if memory > spec.cp_len:
        raise SpecError(
            f"channel memory of {memory} samples exceeds the cyclic prefix of {spec.cp_len}; "
            "raise --cp or shorten the channel"
        )
    return profile


def _ber_chunk(spec, profile, system, j, chunk):
    config = spec.config(system)
    ebn0 = spec.ebn0_db[j]
    rng = trial_rng(spec.seed, BER_TAG, j, chunk)
    count = spec.chunk_frames
    bits = rng.integers(0, 2, size=(count, config.bits_per_frame), dtype=np.uint8)
    realization = realize(profile, spec.sample_time_ns, rng, count=count)
    noise_var = ebn0_to_noise_var(ebn0, config.modem.bits_per_symbol)
    sent = tx(config, config.modem.map(bits))
    received = apply(realization, sent, NoiseSpec(noise_var), rng)
    H = freq_response(realization, config.n)
    decided = rx(config, received, H, noise_var)
    return int(np.count_nonzero(decided != bits)), int(bits.size)


def ber_point(spec: ExperimentSpec, profile, system: str, j: int, workers: int) -> BerPoint:
    """Accumulate chunks in order until the stopping rule is met.

    Stop once at least ``frames`` frames and ``min_errors`` errors are in, or
    the bit budget ``max_bits`` is spent. Chunks are computed in waves of
    ``workers`` and the tally is truncated at the first chunk satisfying the
    rule, so the point is identical for any worker count.
    """
    errors = bits = frames = 0
    chunk = 0
    while True:
        wave = list(range(chunk, chunk + workers))
        results = _map_ordered(lambda c: _ber_chunk(spec, profile, system, j, c), wave, workers)
        for e, b in results:
            errors += e
            bits += b
            frames += spec.chunk_frames
            chunk += 1
            if (frames >= spec.frames and errors >= spec.min_errors) or bits >= spec.max_bits:
                return BerPoint(float(spec.ebn0_db[j]), errors, bits)


def run_ber(spec: ExperimentSpec, workers: Optional[int] = None) -> RunResult:
    start = time.perf_counter()
    workers = worker_count() if workers is None else workers
    profile = check_feasible(spec)
    points = {}
    for system in spec.systems:
        points[system] = [
            ber_point(spec, profile, system, j, workers).as_dict() for j in range(len(spec.ebn0_db))
        ]
    return RunResult(spec, {"points": points}, wall_time_s=time.perf_counter() - start)
