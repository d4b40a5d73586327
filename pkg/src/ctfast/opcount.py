"""Arithmetic-cost accounting for the FCT and the cascaded CHT-FFT baseline.

Closed forms for both algorithms, an instrumented run that tallies the
complex multiplications and additions the kernels actually perform, and the
savings table comparing the two.

Counting rules: multiplications by +-1 and +-j are component moves and are
free; the real ``1/N`` normalization of the baseline is not a complex
multiplication. Counters are created per run, never shared.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Union

import numpy as np

from .transforms import FctPlan, _log2, cascaded_cht_fft, fct, plan_fct

TABLE1_LENGTHS = (8, 16, 32, 64, 128, 256, 512, 1024)

CASCADE = "cascade"

# published savings table: N, FCT mults, FCT adds, cascade mults, cascade adds, saving %
REFERENCE_TABLE = (
    (8, 2, 6, 8, 48, 86),
    (16, 10, 30, 24, 128, 74),
    (32, 34, 102, 64, 320, 65),
    (64, 98, 294, 160, 768, 58),
    (128, 258, 774, 384, 1792, 53),
    (256, 642, 1926, 896, 4096, 48),
    (512, 1538, 4614, 2048, 9216, 45),
    (1024, 3586, 10758, 4608, 20480, 43),
)


@dataclass(frozen=True)
class OpCount:
    """Complex multiplication and addition tallies.

    ``stages`` is only filled in by :func:`measure` and takes no part in
    equality, so a measured count compares equal to its closed form.
    """

    mults: int
    adds: int
    stages: Optional[int] = field(default=None, compare=False)

    @property
    def total(self) -> int:
        return self.mults + self.adds


class OpCounter:
    """Mutable per-run tally handed to the transform kernels."""

    def __init__(self):
        self.mults = 0
        self.adds = 0
        self.stages = 0

    def record_stage(self, mults: int, adds: int) -> None:
        if mults < 0 or adds < 0:
            raise ValueError("operation counts cannot decrease")
        self.mults += int(mults)
        self.adds += int(adds)
        self.stages += 1

    def snapshot(self) -> OpCount:
        return OpCount(self.mults, self.adds, self.stages)


def fct_counts(n: int) -> OpCount:
    """Closed-form FCT cost: ``(N/2)log2N - 3N/2 + 2`` mults, three times that in adds."""
    m = _log2(n, 4)
    mults = n * m // 2 - 3 * n // 2 + 2
    adds = 3 * n * m // 2 - 9 * n // 2 + 6
    return OpCount(mults, adds)


def cascade_counts(n: int) -> OpCount:
    """Closed-form cost of the radix-2 CHT followed by the radix-2 FFT."""
    m = _log2(n, 4)
    return OpCount(n * m // 2 - n // 2, 2 * n * m)


def measure(plan_or_cascade: Union[FctPlan, str], x) -> OpCount:
    """Run one transform with an attached counter and return the tallies.

    Pass an :class:`FctPlan` to measure the FCT, or the string ``"cascade"``
    to measure the CHT-FFT baseline.
    """
    counter = OpCounter()
    x = np.asarray(x, dtype=np.complex128)
    if isinstance(plan_or_cascade, FctPlan):
        fct(plan_or_cascade, x, counter=counter)
    elif plan_or_cascade == CASCADE:
        cascaded_cht_fft(x, counter=counter)
    else:
        raise ValueError(f"expected an FctPlan or {CASCADE!r}, got {plan_or_cascade!r}")
    return counter.snapshot()


@dataclass(frozen=True)
class SavingsRow:
    n: int
    fct: OpCount
    baseline: OpCount
    saving_percent: int
    saving_exact: float

    def as_dict(self) -> dict:
        return {
            "N": self.n,
            "fct_mults": self.fct.mults,
            "fct_adds": self.fct.adds,
            "base_mults": self.baseline.mults,
            "base_adds": self.baseline.adds,
            "saving_pct": self.saving_percent,
        }


def table1_report(lengths: Iterable[int] = TABLE1_LENGTHS, measured: bool = True) -> List[SavingsRow]:
    """Savings of the FCT over the cascade for each length.

    With ``measured`` the counts come from instrumented runs on a random
    block, otherwise from the closed forms. ``saving_percent`` rounds
    ``100 * (1 - fct_total / baseline_total)`` half up.
    """
    rows = []
    rng = np.random.default_rng(0)
    for n in lengths:
        _log2(n, 8)
        if measured:
            x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            f = measure(plan_fct(n), x)
            b = measure(CASCADE, x)
            f, b = OpCount(f.mults, f.adds), OpCount(b.mults, b.adds)
        else:
            f, b = fct_counts(n), cascade_counts(n)
        exact = 100.0 * (1.0 - f.total / b.total)
        rows.append(SavingsRow(n, f, b, int(np.floor(exact + 0.5)), exact))
    return rows


def table_to_csv(rows: List[SavingsRow]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(
        buf,
        fieldnames=["N", "fct_mults", "fct_adds", "base_mults", "base_adds", "saving_pct"],
        lineterminator="\n",
    )
    writer.writeheader()
    for row in rows:
        writer.writerow(row.as_dict())
    return buf.getvalue()


def table_to_json(rows: List[SavingsRow]) -> str:
    return json.dumps([dict(r.as_dict(), saving_exact=r.saving_exact) for r in rows], indent=2)
