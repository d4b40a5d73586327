import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.stats import norm

from ctfast.harness import ExperimentSpec, run_papr
from ctfast.metrics import (
    BerPoint,
    ber_count,
    ccdf,
    ebn0_to_noise_var,
    oversample,
    papr,
    papr_db,
    q_function,
    qpsk_awgn_theory,
)
from ctfast.ofdm import OfdmConfig, modulate

# conventional OFDM, N=64 QPSK, 1e5 frames, seed 7: Pr(PAPR > 6 dB)
CCDF_6DB_N64_SEED7 = 0.75075


def test_papr_constant_and_impulse():
    assert papr(np.full(16, 3 - 4j)) == 1.0
    assert papr(np.eye(32)[5]) == 32.0


def test_papr_ct_impulse():
    s = modulate(OfdmConfig(8, 0, system="ct"), np.eye(8)[0])
    assert papr(s) == pytest.approx(8)
    assert papr_db(s) == pytest.approx(9.03, abs=5e-3)


def test_papr_zero_block():
    with pytest.raises(ValueError):
        papr(np.zeros(8))


def test_papr_batched():
    s = np.array([np.ones(4), [2, 0, 0, 0]])
    assert_allclose(papr(s), [1, 4])


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False), min_size=2, max_size=64),
    st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False, allow_infinity=False),
)
def test_papr_scale_invariant(values, c):
    s = np.array(values)
    if not np.any(np.abs(s) > 1e-6):
        return
    assert papr(c * s) == pytest.approx(papr(s), rel=1e-9)


def test_oversample_preserves_samples_and_power(rng):
    s = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    up = oversample(s, 4)
    assert up.shape == (256,)
    assert_allclose(up[::4], s, atol=1e-12)
    S = np.fft.fft(s)
    S[32] = 0
    s = np.fft.ifft(S)
    up = oversample(s, 4)
    assert np.mean(np.abs(up) ** 2) == pytest.approx(np.mean(np.abs(s) ** 2), rel=1e-12)


def test_oversample_conventional_matches_zero_padded_ifft(rng):
    n, L = 32, 4
    X = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    X[n // 2] = 0  # Nyquist bin split is a convention, keep it out of the comparison
    padded = np.zeros(n * L, complex)
    padded[: n // 2] = X[: n // 2]
    padded[-(n // 2):] = X[n // 2:]
    want = np.fft.ifft(padded) * L * np.sqrt(n)
    got = oversample(modulate(OfdmConfig(n, 0, system="conventional"), X), L)
    assert_allclose(got, want, atol=1e-12)


def test_ccdf_examples():
    c = ccdf([2, 4, 8], [0, 3, 8, 9])
    assert_allclose(c.probabilities, [1, 2 / 3, 0, 0])
    assert c.at(3) == pytest.approx(2 / 3)
    assert c.sample_count == 3
    with pytest.raises(KeyError):
        c.at(5)


def test_ccdf_empty():
    with pytest.raises(ValueError):
        ccdf([], [1.0])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-20, 20), min_size=1, max_size=200))
def test_ccdf_monotone_and_bounded(samples):
    c = ccdf(samples, np.linspace(-25, 25, 41))
    p = c.probabilities
    assert np.all((p >= 0) & (p <= 1))
    assert np.all(np.diff(p) <= 0)


def test_ccdf_conventional_n64_regression():
    spec = ExperimentSpec("papr", n=64, cp_len=16, systems=("conventional",), frames=100_000, seed=7, thresholds_db=(6.0,))
    p = run_papr(spec, workers=1).payload["curves"]["conventional"]["ccdf"][0]
    assert 0.1 < p < 0.9
    assert p == CCDF_6DB_N64_SEED7


def test_ber_count_examples():
    rng = np.random.default_rng(0)
    bits = rng.integers(0, 2, 10_000)
    assert ber_count(bits, bits).ber == 0
    assert ber_count(bits, 1 - bits).ber == 1.0
    flipped = bits.copy()
    flipped[1234] ^= 1
    pt = ber_count(bits, flipped)
    assert (pt.bit_errors, pt.bits_tested, pt.ber) == (1, 10_000, 1e-4)


def test_ber_count_length_mismatch():
    with pytest.raises(ValueError):
        ber_count([0, 1], [0])


def test_ber_point_ci_and_merge():
    pt = BerPoint(3.0, 100, 10_000)
    assert pt.ci95 == pytest.approx(norm.ppf(0.975) * math.sqrt(0.01 * 0.99 / 1e4))
    both = pt.merge(BerPoint(3.0, 50, 10_000))
    assert (both.bit_errors, both.bits_tested) == (150, 20_000)
    assert set(pt.as_dict()) == {"ebn0_db", "ber", "ci95", "bits", "errors"}


def test_qpsk_theory_examples():
    assert qpsk_awgn_theory(0) == pytest.approx(0.0786, abs=5e-5)
    assert qpsk_awgn_theory(4) == pytest.approx(0.0125, abs=5e-5)
    assert qpsk_awgn_theory(200) == 0.0


@pytest.mark.parametrize("ebn0", [-3, 0, 2, 4, 6, 9.6])
def test_qpsk_theory_against_scipy(ebn0):
    assert qpsk_awgn_theory(ebn0) == pytest.approx(norm.sf(math.sqrt(2 * 10 ** (ebn0 / 10))), rel=1e-12)


def test_q_function_vectorized():
    assert_allclose(q_function([0, 1]), norm.sf([0, 1]), rtol=1e-12)


def test_noise_var():
    assert ebn0_to_noise_var(0, 2) == 0.5
    assert ebn0_to_noise_var(10, 4) == pytest.approx(0.025)
