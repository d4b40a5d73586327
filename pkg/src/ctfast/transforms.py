"""Transform kernels for the complex transition (CT) transform.

Dense matrix oracles (DFT, WHT, complex Hadamard, CT), fast radix-2 FFT and
complex Hadamard networks, and the sparse butterfly algorithm (FCT) with its
inverse. Blocks are numpy complex arrays; every fast kernel operates along the
last axis so a batch of blocks can be pushed through in one call.

Conventions
-----------
* ``W_N^i = exp(-2j*pi*i/N)``.
* ``dft_matrix`` is unnormalized; ``ct_matrix`` carries the ``1/N`` so that the
  CT transform is unitary.
* ``cht_matrix`` defaults to the column-split recursion
  ``H_c[N] = [[H_c[N/2], S H[N/2]], [H_c[N/2], -S H[N/2]]]`` with
  ``S = diag(I, jI)``. The row-split recursion with ``L = [[1, -j], [1, j]]``
  is its conjugate transpose and is available as ``form="row"``.

Kernels accept an optional ``counter`` object exposing
``record_stage(mults, adds)``; see :mod:`ctfast.opcount`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "InvalidLengthError",
    "Butterfly",
    "FctPlan",
    "bit_reverse",
    "bit_reverse_permutation",
    "twiddle",
    "dft_matrix",
    "wht_matrix",
    "cht_matrix",
    "ct_matrix",
    "fft",
    "ifft",
    "fft_bit_reversed",
    "fwht",
    "fcht",
    "plan_fct",
    "butterfly_apply",
    "butterfly_matrix",
    "fct",
    "ifct",
    "cascaded_cht_fft",
    "fct_scalar",
    "stage_matrices",
]

# W_N^e for e a multiple of N/4, indexed by 4e/N
_AXIS_TWIDDLES = (1.0 + 0.0j, -1.0j, -1.0 + 0.0j, 1.0j)


class InvalidLengthError(ValueError):
    """Raised for transform lengths that are not an admissible power of two."""


def _log2(n: int, minimum: int = 1) -> int:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise InvalidLengthError(f"length must be an integer, got {n!r}")
    n = int(n)
    if n < 1 or n & (n - 1):
        raise InvalidLengthError(f"length must be a power of two, got {n}")
    if n < minimum:
        raise InvalidLengthError(f"length must be >= {minimum}, got {n}")
    return n.bit_length() - 1


def _as_block(x, minimum: int = 1) -> np.ndarray:
    arr = np.asarray(x, dtype=np.complex128)
    if arr.ndim == 0:
        raise InvalidLengthError("expected at least one axis of samples")
    _log2(arr.shape[-1], minimum)
    return arr


def bit_reverse(k: int, bits: int) -> int:
    """Reverse the lowest ``bits`` bits of ``k``."""
    r = 0
    for _ in range(bits):
        r = (r << 1) | (k & 1)
        k >>= 1
    return r


def bit_reverse_permutation(n: int) -> np.ndarray:
    bits = _log2(n)
    return np.array([bit_reverse(k, bits) for k in range(n)], dtype=np.intp)


def twiddle(exponent, n: int):
    """``W_n^exponent``, exact when the exponent is a multiple of ``n/4``.

    Accepts a scalar or an integer array of exponents.
    """
    e = np.mod(np.asarray(exponent, dtype=np.int64), n)
    w = np.exp(-2j * np.pi * e / n)
    quarter = (4 * e) % n == 0
    if np.any(quarter):
        w = np.where(quarter, np.take(_AXIS_TWIDDLES, (4 * e // n) % 4), w)
    return complex(w) if np.ndim(w) == 0 else w


# ---------------------------------------------------------------------------
# dense oracles
# ---------------------------------------------------------------------------


def dft_matrix(n: int, bit_reversed_rows: bool = False) -> np.ndarray:
    """Unnormalized DFT matrix, entry ``(k, m) = W_n^{k' m}``.

    With ``bit_reversed_rows`` the row index ``k'`` is the bit reversal of
    ``k``, which is the ordering a decimation-in-frequency FFT emits.
    """
    _log2(n, 2)
    rows = bit_reverse_permutation(n) if bit_reversed_rows else np.arange(n)
    return twiddle(np.outer(rows, np.arange(n)) % n, n)


def _walsh(n: int) -> np.ndarray:
    h = np.ones((1, 1), dtype=np.complex128)
    while h.shape[0] < n:
        h = np.block([[h, h], [h, -h]])
    return h


def wht_matrix(n: int) -> np.ndarray:
    """Natural (Hadamard-ordered) Walsh-Hadamard matrix with entries +-1."""
    _log2(n, 2)
    return _walsh(n)


def cht_matrix(n: int, form: str = "column") -> np.ndarray:
    """Complex Walsh-Hadamard matrix with entries in {+-1, +-j}.

    ``form="column"`` builds ``[[H_c, S H], [H_c, -S H]]`` (the layout under
    which ``dft_matrix(n, True) @ cht_matrix(n) / n`` is block diagonal).
    ``form="row"`` builds ``[[H_c, H_c], [L (x) H, -L (x) H]]``; the two
    forms are conjugate transposes of each other.
    """
    _log2(n, 1)
    if form not in ("column", "row"):
        raise ValueError(f"form must be 'column' or 'row', got {form!r}")
    h = np.ones((1, 1), dtype=np.complex128)
    size = 1
    while size < n:
        size *= 2
        if size == 2:
            h = np.array([[1, 1], [1, -1]], dtype=np.complex128)
            continue
        half = size // 2
        if form == "column":
            s = np.diag(np.r_[np.ones(half // 2), 1j * np.ones(half // 2)])
            sh = s @ _walsh(half)
            h = np.block([[h, sh], [h, -sh]])
        else:
            lk = np.kron(np.array([[1, -1j], [1, 1j]]), _walsh(half // 2))
            h = np.block([[h, h], [lk, -lk]])
    return h


def ct_matrix(n: int) -> np.ndarray:
    """Dense CT transform ``dft_matrix(n, True) @ cht_matrix(n) / n``."""
    _log2(n, 4)
    return dft_matrix(n, bit_reversed_rows=True) @ cht_matrix(n) / n


# ---------------------------------------------------------------------------
# fast FFT / Hadamard networks
# ---------------------------------------------------------------------------


def _rotate_j(z: np.ndarray) -> np.ndarray:
    """Multiply by +j as a component swap (no arithmetic)."""
    out = np.empty_like(z)
    out.real = -z.imag
    out.imag = z.real
    return out


def fft_bit_reversed(x, counter=None) -> np.ndarray:
    """Radix-2 decimation-in-frequency FFT, natural in, bit-reversed out.

    Returns ``dft_matrix(n, True) @ x``. Every stage except the last applies
    its twiddle table to the difference path; the last stage only has unit
    twiddles and is multiplication free.
    """
    y = _as_block(x).copy()
    n = y.shape[-1]
    lead = y.shape[:-1]
    h = n // 2
    while h >= 1:
        v = y.reshape(*lead, n // (2 * h), 2, h)
        a = v[..., 0, :].copy()
        b = v[..., 1, :]
        v[..., 0, :] = a + b
        if h > 1:
            v[..., 1, :] = (a - b) * twiddle(np.arange(h), 2 * h)
            mults = n // 2
        else:
            v[..., 1, :] = a - b
            mults = 0
        if counter is not None:
            counter.record_stage(mults=mults, adds=n)
        h //= 2
    return y


def fft(x, counter=None) -> np.ndarray:
    """Unnormalized DFT along the last axis, natural order in and out."""
    y = fft_bit_reversed(x, counter)
    inv = np.argsort(bit_reverse_permutation(y.shape[-1]))
    return y[..., inv]


def ifft(x) -> np.ndarray:
    """Inverse of :func:`fft` (carries the ``1/N``)."""
    arr = _as_block(x)
    return np.conj(fft(np.conj(arr))) / arr.shape[-1]


def fwht(x, counter=None) -> np.ndarray:
    """Natural-order fast Walsh-Hadamard transform (unnormalized)."""
    y = _as_block(x).copy()
    n = y.shape[-1]
    lead = y.shape[:-1]
    h = 1
    while h < n:
        v = y.reshape(*lead, n // (2 * h), 2, h)
        a = v[..., 0, :].copy()
        v[..., 0, :] = a + v[..., 1, :]
        v[..., 1, :] = a - v[..., 1, :]
        if counter is not None:
            counter.record_stage(mults=0, adds=n)
        h *= 2
    return y


def fcht(x, counter=None) -> np.ndarray:
    """Fast complex Hadamard transform, ``cht_matrix(n) @ x``.

    ``log2(n)`` stages of add/subtract butterflies. The block anchored at
    index 0 is the only complex one; before its butterflies the top quarter
    of its lower half is rotated by ``j`` (a swap, not a multiplication).
    """
    y = _as_block(x).copy()
    n = y.shape[-1]
    lead = y.shape[:-1]
    h = 1
    while h < n:
        v = y.reshape(*lead, n // (2 * h), 2, h)
        if h >= 2:
            v[..., 0, 1, h // 2:] = _rotate_j(v[..., 0, 1, h // 2:])
        a = v[..., 0, :].copy()
        v[..., 0, :] = a + v[..., 1, :]
        v[..., 1, :] = a - v[..., 1, :]
        if counter is not None:
            counter.record_stage(mults=0, adds=n)
        h *= 2
    return y


# ---------------------------------------------------------------------------
# FCT
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Butterfly:
    """One in-place butterfly: ``A = a - (a-b) v``, ``B = b + (a-b) v``.

    ``coeff`` is ``v = (1 - W)/2`` with ``W = W_{twiddle_denominator}^{twiddle_exponent}``.
    """

    index_a: int
    index_b: int
    twiddle_exponent: int
    twiddle_denominator: int
    coeff: complex = field(default=None)

    def __post_init__(self):
        if self.index_a == self.index_b:
            raise ValueError("butterfly indices must differ")
        if self.coeff is None:
            w = twiddle(self.twiddle_exponent, self.twiddle_denominator)
            object.__setattr__(self, "coeff", (1 - w) / 2)

    @property
    def twiddle(self) -> complex:
        return 1 - 2 * self.coeff


@dataclass(frozen=True)
class FctPlan:
    """Immutable staged butterfly schedule for the length-``n`` CT transform.

    Butterflies within one stage touch disjoint indices, so each stage can be
    applied in place and vectorized. Indices 0..3 are never touched.
    """

    n: int
    stages: tuple
    passthrough_count: int = 4
    _arrays: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        arrays = []
        for stage in self.stages:
            ia = np.array([b.index_a for b in stage], dtype=np.intp)
            ib = np.array([b.index_b for b in stage], dtype=np.intp)
            v = np.array([b.coeff for b in stage], dtype=np.complex128)
            for a in (ia, ib, v):
                a.flags.writeable = False
            arrays.append((ia, ib, v))
        object.__setattr__(self, "_arrays", tuple(arrays))

    @property
    def butterfly_count(self) -> int:
        return sum(len(s) for s in self.stages)

    def __iter__(self):
        return iter(self.stages)


def _mixing_block(n, c, k, offset, depth, levels):
    # size-k block built from M2(W_n^{c k/2}) (x) I[k/2] followed by two
    # size-k/2 blocks with twiddle seeds c and c + n/k
    half = k // 2
    while len(levels) <= depth:
        levels.append([])
    e = (c * half) % n
    levels[depth].extend(Butterfly(offset + i, offset + i + half, e, n) for i in range(half))
    if k > 2:
        _mixing_block(n, c, half, offset, depth + 1, levels)
        _mixing_block(n, c + n // k, half, offset + half, depth + 1, levels)


def _ct_block(n, offset, levels):
    if n == 4:
        return
    _ct_block(n // 2, offset, levels)
    q = n // 4
    _mixing_block(n, 1, q, offset + 2 * q, 0, levels)
    _mixing_block(n, 3, q, offset + 3 * q, 0, levels)


def plan_fct(n: int) -> FctPlan:
    """Build the butterfly schedule realizing ``ct_matrix(n)``.

    ``CT[n] = diag(CT[n/2], G_1, G_3)`` where each ``G`` is a size ``n/4``
    mixing block; the sub-block schedules are aligned stage by stage, giving
    ``log2(n) - 2`` stages in total.
    """
    _log2(n, 4)
    levels: list = []
    _ct_block(n, 0, levels)
    stages = tuple(tuple(sorted(lv, key=lambda b: b.index_a)) for lv in levels)
    return FctPlan(n=n, stages=stages)


def butterfly_apply(a: complex, b: complex, coeff: complex):
    """Single butterfly: one complex multiplication and three additions."""
    d = a - b
    t = d * coeff
    return a - t, b + t


def butterfly_matrix(coeff: complex) -> np.ndarray:
    return np.array([[1 - coeff, coeff], [coeff, 1 - coeff]], dtype=np.complex128)


def _check_plan(plan: FctPlan, x) -> np.ndarray:
    arr = np.asarray(x)
    if arr.ndim == 0 or arr.shape[-1] != plan.n:
        raise ValueError(f"plan length {plan.n} does not match block length {np.shape(x)[-1:]}")
    return arr


def _run_stages(plan, y, stage_arrays, counter):
    for ia, ib, v in stage_arrays:
        a = y[..., ia]
        b = y[..., ib]
        t = (a - b) * v
        y[..., ia] = a - t
        y[..., ib] = b + t
        if counter is not None:
            counter.record_stage(mults=len(v), adds=3 * len(v))
    return y


def _prepare_output(arr, out):
    if out is None:
        return np.array(arr, dtype=np.complex128, copy=True)
    if out.shape != arr.shape or out.dtype != np.complex128:
        raise ValueError("out must be a complex128 array with the block's shape")
    if out is not arr:
        out[...] = arr
    return out


def fct(plan: FctPlan, x, out: Optional[np.ndarray] = None, counter=None) -> np.ndarray:
    """Fast CT transform, equal to ``ct_matrix(plan.n) @ x``.

    Pass ``out=x`` (a complex128 array) to overwrite the input in place.
    """
    arr = _check_plan(plan, x)
    y = _prepare_output(arr, out)
    return _run_stages(plan, y, plan._arrays, counter)


def ifct(plan: FctPlan, y, out: Optional[np.ndarray] = None, counter=None) -> np.ndarray:
    """Inverse fast CT transform: stages reversed, twiddles conjugated.

    Each butterfly matrix is symmetric and unitary, so its inverse is the
    butterfly built from the conjugate twiddle: ``v -> (1 - conj(W))/2 = conj(v)``.
    """
    arr = _check_plan(plan, y)
    z = _prepare_output(arr, out)
    inverse = [(ia, ib, np.conj(v)) for ia, ib, v in reversed(plan._arrays)]
    return _run_stages(plan, z, inverse, counter)


def fct_scalar(plan: FctPlan, x: np.ndarray) -> np.ndarray:
    """Butterfly-by-butterfly in-place FCT over a 1-D complex128 array.

    Uses only two scalar temporaries per butterfly; mostly useful as a
    readable reference for the vectorized path.
    """
    _check_plan(plan, x)
    for stage in plan.stages:
        for bf in stage:
            x[bf.index_a], x[bf.index_b] = butterfly_apply(x[bf.index_a], x[bf.index_b], bf.coeff)
    return x


def cascaded_cht_fft(x, counter=None) -> np.ndarray:
    """Baseline CT transform: fast complex Hadamard, then bit-reversed FFT, then ``1/N``.

    The final real scaling is not tallied as a complex multiplication.
    """
    arr = _as_block(x, 4)
    n = arr.shape[-1]
    return fft_bit_reversed(fcht(arr, counter), counter) / n



def stage_matrices(plan: FctPlan) -> Sequence[np.ndarray]:
    """Dense matrix of every stage, in application order (debugging aid)."""
    mats = []
    for ia, ib, v in plan._arrays:
        m = np.eye(plan.n, dtype=np.complex128)
        m[ia, ia] = 1 - v
        m[ia, ib] = v
        m[ib, ia] = v
        m[ib, ib] = 1 - v
        mats.append(m)
    return mats

