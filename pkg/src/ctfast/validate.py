"""Self-check suites run by ``ctfast validate``.

Every check compares a fast kernel against an independent dense oracle or
a closed form and reports N, seed and the worst error on failure. When the
FCT disagrees with the oracle, :func:`locate_faulty_stage` names the stage
that would have to change for the plan to match.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from .opcount import CASCADE, REFERENCE_TABLE, cascade_counts, fct_counts, measure, table1_report
from .transforms import (
    FctPlan,
    cascaded_cht_fft,
    cht_matrix,
    ct_matrix,
    dft_matrix,
    fcht,
    fct,
    fft,
    ifct,
    plan_fct,
    stage_matrices,
)

TOL = 1e-12


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.suite}/{self.name}" + (f": {self.detail}" if self.detail else "")


def _lengths(lo: int, hi: int) -> List[int]:
    out, n = [], lo
    while n <= hi:
        out.append(n)
        n *= 2
    return out


def _random_blocks(rng, count, n):
    return rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))


def _rel_err(got, want, ref) -> float:
    return float(np.max(np.linalg.norm(got - want, axis=-1) / np.linalg.norm(ref, axis=-1)))


def _is_stage_shaped(matrix: np.ndarray, ia, ib, atol: float = 1e-9) -> Optional[np.ndarray]:
    """Coefficients if ``matrix`` is a butterfly stage on pairs ``(ia, ib)``."""
    n = matrix.shape[0]
    expected_support = np.eye(n, dtype=bool)
    expected_support[ia, ib] = expected_support[ib, ia] = True
    if np.max(np.abs(matrix[~expected_support]), initial=0.0) > atol:
        return None
    v = matrix[ia, ib]
    ok = (
        np.allclose(matrix[ib, ia], v, atol=atol)
        and np.allclose(matrix[ia, ia], 1 - v, atol=atol)
        and np.allclose(matrix[ib, ib], 1 - v, atol=atol)
        and np.allclose(np.abs(1 - 2 * v), 1.0, atol=atol)
    )
    rest = np.setdiff1d(np.arange(n), np.r_[ia, ib])
    if not ok or not np.allclose(np.diag(matrix)[rest], 1.0, atol=atol):
        return None
    return v


def locate_faulty_stage(plan: FctPlan) -> Optional[tuple]:
    """Find the single stage whose replacement makes ``plan`` match the oracle.

    For each stage ``s`` the oracle fixes what that stage must be given all
    the others: ``(later stages)^H @ CT @ (earlier stages)^H``. Only for the
    faulty stage is this a valid butterfly stage on the same index pairs.
    Returns ``(stage, [(index_a, index_b), ...])`` or ``None``.
    """
    mats = stage_matrices(plan)
    target = ct_matrix(plan.n)
    hits = []
    for s, (ia, ib, v) in enumerate(plan._arrays):
        before = np.eye(plan.n, dtype=np.complex128)
        for m in mats[:s]:
            before = m @ before
        after = np.eye(plan.n, dtype=np.complex128)
        for m in mats[s + 1:]:
            after = m @ after
        implied = after.conj().T @ target @ before.conj().T
        want = _is_stage_shaped(implied, ia, ib)
        if want is not None:
            bad = np.flatnonzero(np.abs(want - v) > 1e-9)
            if bad.size:
                hits.append((s, [(int(ia[k]), int(ib[k])) for k in bad]))
    return hits[0] if len(hits) == 1 else None


def check_oracles(
    max_n: int, seed: int, blocks: int, plan_factory: Callable[[int], FctPlan] = plan_fct
) -> List[CheckResult]:
    out = []
    rng = np.random.default_rng(seed)
    for n in _lengths(4, max_n):
        x = _random_blocks(rng, blocks, n)
        ct = ct_matrix(n)
        want = x @ ct.T
        plan = plan_factory(n)
        err = _rel_err(fct(plan, x), want, x)
        detail = f"N={n} seed={seed} max rel error {err:.2e}"
        if err > TOL:
            where = locate_faulty_stage(plan)
            if where is None:
                detail += "; offending stage could not be isolated"
            else:
                detail += f"; offending stage {where[0]} (butterflies {where[1]})"
        out.append(CheckResult("oracle", f"fct[N={n}]", err <= TOL, detail))

        err = _rel_err(ifct(plan, x), x @ ct.conj(), x)
        out.append(CheckResult("oracle", f"ifct[N={n}]", err <= TOL, f"N={n} seed={seed} max rel error {err:.2e}"))
        err = _rel_err(cascaded_cht_fft(x), want, x)
        out.append(CheckResult("oracle", f"cascade[N={n}]", err <= TOL, f"N={n} seed={seed} max rel error {err:.2e}"))
        err = _rel_err(fcht(x), x @ cht_matrix(n).T, x)
        out.append(CheckResult("oracle", f"fcht[N={n}]", err <= TOL, f"N={n} seed={seed} max rel error {err:.2e}"))
        err = _rel_err(fft(x), x @ dft_matrix(n).T, x)
        out.append(CheckResult("oracle", f"fft[N={n}]", err <= TOL, f"N={n} seed={seed} max rel error {err:.2e}"))
    return out


def check_unitarity(
    max_n: int, seed: int, blocks: int, plan_factory: Callable[[int], FctPlan] = plan_fct
) -> List[CheckResult]:
    out = []
    rng = np.random.default_rng(seed)
    for n in _lengths(4, max_n):
        x = _random_blocks(rng, blocks, n)
        plan = plan_factory(n)
        y = fct(plan, x)
        norm_x = np.linalg.norm(x, axis=-1)
        err = float(np.max(np.abs(np.linalg.norm(y, axis=-1) - norm_x) / norm_x))
        out.append(CheckResult("unitarity", f"parseval[N={n}]", err <= TOL, f"N={n} seed={seed} max rel error {err:.2e}"))
        err = _rel_err(ifct(plan, y), x, x)
        out.append(CheckResult("unitarity", f"roundtrip[N={n}]", err <= TOL, f"N={n} seed={seed} max rel error {err:.2e}"))
        exact = bool(np.array_equal(y[:, :4], x[:, :4]))
        out.append(CheckResult("structure", f"passthrough[N={n}]", exact, f"N={n} seed={seed}"))
    return out


def check_structure(
    max_dense_n: int, max_n: int, plan_factory: Callable[[int], FctPlan] = plan_fct
) -> List[CheckResult]:
    out = []
    for n in _lengths(4, max_n):
        plan = plan_factory(n)
        expected = 0 if n == 4 else n.bit_length() - 3
        out.append(CheckResult("structure", f"stages[N={n}]", len(plan.stages) == expected, f"{len(plan.stages)} stages, expected {expected}"))
        disjoint = all(len({i for b in st for i in (b.index_a, b.index_b)}) == 2 * len(st) for st in plan.stages)
        untouched = all(min(b.index_a, b.index_b) >= 4 for st in plan.stages for b in st)
        out.append(CheckResult("structure", f"schedule[N={n}]", disjoint and untouched, "disjoint stages, indices 0..3 untouched"))
        worst = max((abs(abs(b.twiddle) - 1.0) for st in plan.stages for b in st), default=0.0)
        out.append(CheckResult("structure", f"butterfly-unitary[N={n}]", worst <= TOL, f"max ||1-2v|-1| = {worst:.1e}"))
    for n in _lengths(8, max_dense_n):
        nnz = int(np.max(np.sum(np.abs(ct_matrix(n)) > 1e-12, axis=1)))
        out.append(CheckResult("structure", f"sparsity[N={n}]", nnz <= n // 4, f"max {nnz} nonzeros per row, bound {n // 4}"))
    return out


def check_opcounts(max_n: int, plan_factory: Callable[[int], FctPlan] = plan_fct) -> List[CheckResult]:
    out = []
    for n in _lengths(4, max_n):
        x = np.ones(n, dtype=np.complex128)
        plan = plan_factory(n)
        got = measure(plan, x)
        want = fct_counts(n)
        ok = got == want and plan.butterfly_count == want.mults and want.adds == 3 * want.mults
        out.append(CheckResult("opcount", f"fct[N={n}]", ok, f"measured ({got.mults}, {got.adds}), closed form ({want.mults}, {want.adds})"))
        got = measure(CASCADE, x)
        want = cascade_counts(n)
        out.append(CheckResult("opcount", f"cascade[N={n}]", got == want, f"measured ({got.mults}, {got.adds}), closed form ({want.mults}, {want.adds})"))
    rows = {r.n: r for r in table1_report()}
    for ref in REFERENCE_TABLE:
        row = rows[ref[0]]
        counts = (row.fct.mults, row.fct.adds, row.baseline.mults, row.baseline.adds)
        ok = counts == tuple(ref[1:5]) and abs(row.saving_percent - ref[5]) <= 1
        out.append(CheckResult("opcount", f"table[N={ref[0]}]", ok, f"{counts + (row.saving_percent,)} vs {tuple(ref[1:])}"))
    return out


def run_validation(
    max_n: int = 64,
    fast_max_n: int = 4096,
    seed: int = 0,
    blocks: int = 100,
    plan_factory: Callable[[int], FctPlan] = plan_fct,
) -> List[CheckResult]:
    """All suites; dense oracles stop at ``max_n``, fast-path checks at ``fast_max_n``."""
    results: List[CheckResult] = []
    results += check_oracles(max_n, seed, blocks, plan_factory)
    results += check_unitarity(fast_max_n, seed, max(1, min(blocks, 10)), plan_factory)
    results += check_structure(max_n, fast_max_n, plan_factory)
    results += check_opcounts(fast_max_n, plan_factory)
    return results


def summarize(results: Sequence[CheckResult]) -> str:
    failed = [r for r in results if not r.passed]
    lines = [r.line() for r in results if not r.passed or len(results) <= 40]
    lines.append(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return "\n".join(lines)
