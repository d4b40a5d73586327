import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from ctfast.transforms import (
    Butterfly,
    FctPlan,
    InvalidLengthError,
    bit_reverse,
    butterfly_apply,
    butterfly_matrix,
    cascaded_cht_fft,
    cht_matrix,
    ct_matrix,
    dft_matrix,
    fcht,
    fct,
    fct_scalar,
    fft,
    fwht,
    ifct,
    ifft,
    plan_fct,
    stage_matrices,
    twiddle,
    wht_matrix,
)

from conftest import random_block

W8 = cmath.exp(-1j * cmath.pi / 4)
J = 1j


def rel_err(got, want, ref):
    return np.linalg.norm(got - want) / np.linalg.norm(ref)


def naive_dft(n, bitrev=False):
    bits = n.bit_length() - 1
    return np.array(
        [[cmath.exp(-2j * cmath.pi * (bit_reverse(k, bits) if bitrev else k) * m / n) for m in range(n)] for k in range(n)]
    )


def row_form_cht(n):
    """Row-split recursion written out with scipy-free Kronecker products."""
    if n == 1:
        return np.ones((1, 1), dtype=complex)
    if n == 2:
        return np.array([[1, 1], [1, -1]], dtype=complex)
    h = row_form_cht(n // 2)
    walsh = np.ones((1, 1))
    while walsh.shape[0] < n // 4:
        walsh = np.block([[walsh, walsh], [walsh, -walsh]])
    lk = np.kron(np.array([[1, -1j], [1, 1j]]), walsh)
    return np.block([[h, h], [lk, -lk]])


# --- dense oracles ---------------------------------------------------------


class TestDftMatrix:
    def test_bit_reversed_rows_n4(self):
        want = [[1, 1, 1, 1], [1, -1, 1, -1], [1, -J, -1, J], [1, J, -1, -J]]
        assert_allclose(dft_matrix(4, bit_reversed_rows=True), want, atol=0)

    @pytest.mark.parametrize("flag", [False, True])
    def test_n2(self, flag):
        assert_allclose(dft_matrix(2, flag), [[1, 1], [1, -1]], atol=0)

    def test_natural_row1(self):
        assert_allclose(dft_matrix(4)[1], [1, -J, -1, J], atol=0)

    @pytest.mark.parametrize("n", [2, 8, 32])
    @pytest.mark.parametrize("flag", [False, True])
    def test_matches_definition(self, n, flag):
        assert_allclose(dft_matrix(n, flag), naive_dft(n, flag), atol=1e-13)

    @pytest.mark.parametrize("n", [0, 3, 6, 1])
    def test_invalid_length(self, n):
        with pytest.raises(InvalidLengthError):
            dft_matrix(n)


class TestWhtMatrix:
    def test_n2(self):
        assert_array_equal(wht_matrix(2), [[1, 1], [1, -1]])

    def test_n4(self):
        want = [[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]]
        assert_array_equal(wht_matrix(4), want)

    def test_orthogonal(self):
        h = wht_matrix(4)
        assert_array_equal(h @ h, 4 * np.eye(4))

    def test_invalid(self):
        with pytest.raises(InvalidLengthError):
            wht_matrix(12)


class TestChtMatrix:
    def test_row_form_n4_is_bit_reversed_dft(self):
        assert_array_equal(cht_matrix(4, form="row"), dft_matrix(4, bit_reversed_rows=True))

    def test_column_form_n4_is_its_conjugate_transpose(self):
        assert_array_equal(cht_matrix(4), dft_matrix(4, bit_reversed_rows=True).conj().T)

    def test_row_form_n8_row4(self):
        assert_array_equal(cht_matrix(8, form="row")[4], [1, 1, -J, -J, -1, -1, J, J])

    def test_row_form_n8_column2(self):
        assert_array_equal(cht_matrix(8, form="row")[:, 2], [1, 1, -1, -1, -J, -J, J, J])

    @pytest.mark.parametrize("n", [1, 2, 4, 8, 16, 64])
    def test_forms_are_conjugate_transposes(self, n):
        assert_array_equal(cht_matrix(n, form="row"), row_form_cht(n))
        assert_array_equal(cht_matrix(n), row_form_cht(n).conj().T)

    @pytest.mark.parametrize("n", [2, 8, 32])
    def test_entries_and_orthogonality(self, n):
        h = cht_matrix(n)
        assert set(np.unique(h).tolist()) <= {1, -1, 1j, -1j}
        assert_allclose(h @ h.conj().T, n * np.eye(n), atol=0)

    def test_unknown_form(self):
        with pytest.raises(ValueError):
            cht_matrix(4, form="diagonal")


class TestCtMatrix:
    def test_n4_identity(self):
        assert np.max(np.abs(ct_matrix(4) - np.eye(4))) <= 1e-15

    def test_n8_entry_4_4(self):
        assert abs(ct_matrix(8)[4, 4] - (1 + W8) / 2) <= 1e-15
        assert abs(ct_matrix(8)[4, 4] - (0.853553 - 0.353553j)) < 1e-6

    def test_n8_block_zero(self):
        assert abs(ct_matrix(8)[0, 5]) <= 1e-15

    @pytest.mark.parametrize("n", [4, 8, 16, 32, 64])
    def test_unitary(self, n):
        c = ct_matrix(n)
        assert_allclose(c @ c.conj().T, np.eye(n), atol=1e-13)

    @pytest.mark.parametrize("n", [8, 16, 32, 64, 128])
    def test_row_sparsity(self, n):
        nnz = np.sum(np.abs(ct_matrix(n)) > 1e-12, axis=1)
        assert nnz.max() <= n // 4

    @pytest.mark.parametrize("n", [8, 16, 32, 64])
    def test_block_structure(self, n):
        # irreducible diagonal blocks: four 1x1 passthroughs, then two
        # blocks of each size 2, 4, ..., n/4
        support = np.abs(ct_matrix(n)) > 1e-12
        sizes, i = [], 0
        while i < n:
            j = i + 1
            while j < n and (support[i:j, j:].any() or support[j:, i:j].any()):
                j += 1
            assert not support[i:j, j:].any() and not support[j:, i:j].any()
            sizes.append(j - i)
            i = j
        want = [1, 1, 1, 1]
        k = 2
        while k <= n // 4:
            want += [k, k]
            k *= 2
        assert sizes == want

    def test_invalid(self):
        with pytest.raises(InvalidLengthError):
            ct_matrix(2)


# --- fast kernels ----------------------------------------------------------


class TestFft:
    def test_impulse(self):
        assert_allclose(fft([1, 0, 0, 0]), [1, 1, 1, 1], atol=0)

    def test_constant(self):
        assert_allclose(fft([1, 1, 1, 1]), [4, 0, 0, 0], atol=0)

    @pytest.mark.parametrize("n", [2, 16, 256])
    def test_matches_dense(self, rng, n):
        x = random_block(rng, n)
        assert rel_err(fft(x), naive_dft(n) @ x, x) < 1e-12

    @pytest.mark.parametrize("n", [4, 64, 1024])
    def test_round_trip(self, rng, n):
        x = random_block(rng, n, count=3)
        assert rel_err(ifft(fft(x)), x, x) < 1e-12

    def test_batched_matches_numpy(self, rng):
        x = random_block(rng, 128, count=5)
        assert_allclose(fft(x), np.fft.fft(x, axis=-1), atol=1e-11)

    def test_invalid(self):
        with pytest.raises(InvalidLengthError):
            fft(np.ones(6))


class TestFcht:
    def test_e0(self):
        assert_array_equal(fcht(np.eye(8)[0]), np.ones(8))

    def test_two_point(self):
        assert_array_equal(fcht([1, 1]), [2, 0])

    def test_column2_of_column_form(self):
        assert_array_equal(fcht(np.eye(8)[2]), cht_matrix(8)[:, 2])
        assert_array_equal(fcht(np.eye(8)[2]), np.conj(row_form_cht(8)[2]))

    @pytest.mark.parametrize("n", [2, 4, 8, 16, 32, 64])
    def test_matches_dense(self, rng, n):
        x = random_block(rng, n, count=10)
        assert rel_err(fcht(x), x @ row_form_cht(n).conj(), x) < 1e-12

    def test_fwht(self, rng):
        x = random_block(rng, 32)
        assert rel_err(fwht(x), wht_matrix(32) @ x, x) < 1e-12


class TestTwiddle:
    def test_axis_values_exact(self):
        assert twiddle(0, 8) == 1
        assert twiddle(2, 8) == -1j
        assert twiddle(4, 8) == -1
        assert twiddle(6, 8) == 1j
        assert twiddle(-2, 8) == 1j

    def test_general(self):
        assert abs(twiddle(1, 8) - W8) < 1e-16


class TestPlan:
    def test_n4_empty(self):
        plan = plan_fct(4)
        assert plan.stages == ()
        assert plan.passthrough_count == 4

    def test_n8(self):
        plan = plan_fct(8)
        assert len(plan.stages) == 1
        pairs = [(b.index_a, b.index_b) for b in plan.stages[0]]
        assert pairs == [(4, 5), (6, 7)]
        ws = [twiddle(b.twiddle_exponent, b.twiddle_denominator) for b in plan.stages[0]]
        assert_allclose(ws, [W8, W8 ** 3], atol=1e-15)

    def test_n16_butterflies(self):
        plan = plan_fct(16)
        assert plan.butterfly_count == 10
        big = [sorted(b.twiddle_exponent for b in s if b.twiddle_denominator == 16) for s in plan.stages]
        assert big == [[2, 2, 6, 6], [1, 3, 5, 7]]

    @pytest.mark.parametrize("n", [4, 8, 16, 64, 256, 4096])
    def test_invariants(self, n):
        plan = plan_fct(n)
        m = n.bit_length() - 1
        assert len(plan.stages) == (m - 2 if n >= 8 else 0)
        assert plan.butterfly_count == n * m // 2 - 3 * n // 2 + 2
        for stage in plan.stages:
            idx = [i for b in stage for i in (b.index_a, b.index_b)]
            assert len(idx) == len(set(idx))
            assert min(idx, default=4) >= 4
            for b in stage:
                assert abs(abs(1 - 2 * b.coeff) - 1) < 1e-12

    def test_immutable(self):
        plan = plan_fct(16)
        with pytest.raises(Exception):
            plan.n = 8
        with pytest.raises(ValueError):
            plan._arrays[0][2][0] = 0

    def test_butterfly_rejects_same_index(self):
        with pytest.raises(ValueError):
            Butterfly(3, 3, 1, 8)

    def test_invalid(self):
        with pytest.raises(InvalidLengthError):
            plan_fct(2)


class TestButterfly:
    def test_equal_inputs(self):
        c = 0.3 - 2j
        assert butterfly_apply(c, c, 0.2 + 0.7j) == (c, c)

    def test_minus_j_twiddle(self):
        v = (1 - (-1j)) / 2
        a, b = butterfly_apply(1, 0, v)
        assert a == pytest.approx((1 - 1j) / 2)
        assert b == pytest.approx((1 + 1j) / 2)
        assert abs(a) ** 2 + abs(b) ** 2 == pytest.approx(1)

    def test_identity(self):
        assert butterfly_apply(1, -1, 0) == (1, -1)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0, 2 * np.pi, allow_nan=False))
    def test_unitary_for_unit_twiddle(self, theta):
        v = (1 - cmath.exp(-1j * theta)) / 2
        m = butterfly_matrix(v)
        assert_allclose(m @ m.conj().T, np.eye(2), atol=1e-14)


class TestFct:
    def test_n4_passthrough(self, rng):
        x = random_block(rng, 4)
        assert_array_equal(fct(plan_fct(4), x), x)
        assert_array_equal(ifct(plan_fct(4), x), x)

    def test_ramp_n8(self):
        y = fct(plan_fct(8), np.arange(1, 9))
        want = [1, 2, 3, 4, 5.5 - 0.5 * W8, 5.5 + 0.5 * W8, 7.5 - 0.5 * W8 ** 3, 7.5 + 0.5 * W8 ** 3]
        assert_allclose(y, want, atol=1e-14)
        assert_allclose(
            y[4:],
            [5.146447 + 0.353553j, 5.853553 - 0.353553j, 7.853553 + 0.353553j, 7.146447 - 0.353553j],
            atol=1e-6,
        )

    def test_e4_n8(self):
        assert_allclose(fct(plan_fct(8), np.eye(8)[4]), [0, 0, 0, 0, (1 + W8) / 2, (1 - W8) / 2, 0, 0], atol=1e-16)

    @pytest.mark.parametrize("n", [4, 8, 16, 32, 64])
    def test_oracle(self, rng, n):
        oracle = naive_dft(n, bitrev=True) @ row_form_cht(n).conj().T / n
        x = random_block(rng, n, count=100)
        y = fct(plan_fct(n), x)
        errs = np.linalg.norm(y - x @ oracle.T, axis=1) / np.linalg.norm(x, axis=1)
        assert errs.max() <= 1e-12

    @pytest.mark.parametrize("n", [4, 8, 16, 64])
    def test_round_trip(self, rng, n):
        plan = plan_fct(n)
        x = random_block(rng, n, count=20)
        assert rel_err(ifct(plan, fct(plan, x)), x, x) <= 1e-12

    @pytest.mark.parametrize("n", [8, 16, 32])
    def test_inverse_is_conjugate_transpose(self, rng, n):
        y = random_block(rng, n, count=10)
        assert rel_err(ifct(plan_fct(n), y), y @ ct_matrix(n).conj(), y) <= 1e-12

    @pytest.mark.parametrize("n", [8, 128, 4096])
    def test_passthrough_exact(self, rng, n):
        x = random_block(rng, n)
        assert_array_equal(fct(plan_fct(n), x)[:4], x[:4])

    def test_in_place(self, rng):
        plan = plan_fct(64)
        x = random_block(rng, 64, count=3)
        want = fct(plan, x)
        buf = x.copy()
        out = fct(plan, buf, out=buf)
        assert out is buf
        assert_allclose(buf, want, atol=0)
        back = ifct(plan, buf, out=buf)
        assert back is buf
        assert rel_err(buf, x, x) <= 1e-12

    def test_scalar_in_place_matches(self, rng):
        plan = plan_fct(32)
        x = random_block(rng, 32)
        buf = x.copy()
        fct_scalar(plan, buf)
        assert_allclose(buf, fct(plan, x), atol=1e-15)

    def test_stage_matrices_compose(self):
        plan = plan_fct(32)
        prod = np.eye(32)
        for m in stage_matrices(plan):
            prod = m @ prod
        assert_allclose(prod, ct_matrix(32), atol=1e-14)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            fct(plan_fct(8), np.ones(16))
        with pytest.raises(ValueError):
            ifct(plan_fct(8), np.ones(4))

    def test_does_not_mutate_input(self, rng):
        x = random_block(rng, 16)
        keep = x.copy()
        fct(plan_fct(16), x)
        assert_array_equal(x, keep)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 10), st.integers(0, 2 ** 32 - 1))
    def test_parseval(self, log_n, seed):
        n = 2 ** log_n
        x = random_block(np.random.default_rng(seed), n)
        y = fct(plan_fct(n), x)
        assert abs(np.linalg.norm(y) - np.linalg.norm(x)) <= 1e-12 * np.linalg.norm(x)


class TestCascade:
    @pytest.mark.parametrize("n", [4, 8, 16, 32, 64])
    def test_matches_oracle_and_fct(self, rng, n):
        x = random_block(rng, n, count=20)
        y = cascaded_cht_fft(x)
        assert rel_err(y, x @ ct_matrix(n).T, x) <= 1e-12
        assert rel_err(y, fct(plan_fct(n), x), x) <= 1e-12

    def test_n4_identity(self):
        assert_allclose(cascaded_cht_fft([1, 2, 3, 4]), [1, 2, 3, 4], atol=1e-15)

    def test_invalid(self):
        with pytest.raises(InvalidLengthError):
            cascaded_cht_fft([1, 2])


def test_plan_equality_ignores_cached_arrays():
    assert plan_fct(16) == FctPlan(16, plan_fct(16).stages)
