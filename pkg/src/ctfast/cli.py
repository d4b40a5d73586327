"""``ctfast`` command line: validate, opcount, papr, ber, transform.

Exit status: 0 success, 1 a validation check failed, 2 the request was malformed
or infeasible.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from typing import List, Optional

import numpy as np

from . import __version__
from .harness import ExperimentSpec, SpecError, run_ber, run_papr
from .opcount import TABLE1_LENGTHS, table1_report, table_to_csv, table_to_json
from .transforms import (
    InvalidLengthError,
    cht_matrix,
    ct_matrix,
    dft_matrix,
    fct,
    ifct,
    plan_fct,
    wht_matrix,
)
from .validate import run_validation, summarize

EXIT_OK, EXIT_FAIL, EXIT_BAD_SPEC = 0, 1, 2

_SYSTEMS = {"conv": ("conventional",), "ct": ("ct",), "both": ("conventional", "ct")}


def _int_list(text: str) -> List[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> List[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="write results to this path")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _add_link(p: argparse.ArgumentParser, frames: int) -> None:
    p.add_argument("--n", type=int, default=1024, help="subcarriers (power of two >= 8)")
    p.add_argument("--cp", type=int, default=256, help="cyclic prefix length in samples")
    p.add_argument("--mod", choices=("qpsk", "16qam"), default="qpsk")
    p.add_argument("--system", choices=tuple(_SYSTEMS), default="both")
    p.add_argument("--frames", type=int, default=frames)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--chunk", type=int, default=64, help="frames per Monte Carlo chunk")
    p.add_argument("--sample-time", type=float, default=88.0, help="sample time in ns")
    _add_output(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctfast", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ctfast {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="run the oracle, unitarity, structure and opcount suites")
    p.add_argument("--max-n", type=int, default=64, help="largest length checked against dense oracles")
    p.add_argument("--fast-max-n", type=int, default=4096, help="largest length for fast-path checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--blocks", type=int, default=100, help="random blocks per length")
    p.add_argument("-v", "--verbose", action="store_true", help="list every check")

    p = sub.add_parser("opcount", help="emit the FCT vs CHT-FFT operation-count table")
    p.add_argument("--n", type=_int_list, default=list(TABLE1_LENGTHS), help="comma-separated lengths")
    _add_output(p)

    p = sub.add_parser("papr", help="PAPR CCDF for conventional and CT-OFDM")
    _add_link(p, frames=10000)
    p.add_argument("--oversample", type=int, default=1)

    p = sub.add_parser("ber", help="BER sweep with MMSE equalization")
    _add_link(p, frames=256)
    p.add_argument("--channel", default="pedb", help="awgn, pedb or file:<path.json>")
    p.add_argument("--ebn0", type=_float_list, default=[0.0, 5.0, 10.0, 15.0, 20.0, 25.0])
    p.add_argument("--min-errors", type=int, default=100)
    p.add_argument("--max-bits", type=float, default=1e8)

    p = sub.add_parser("transform", help="apply a transform or export a dense matrix")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--kind", choices=("ct", "cht", "dft", "dft-bitrev", "wht"), default="ct")
    p.add_argument("--matrix", action="store_true", help="export the dense matrix instead of transforming")
    p.add_argument("--input", help="CSV of re,im rows to transform (default: unit impulse)")
    p.add_argument("--inverse", action="store_true", help="apply the inverse CT transform")
    p.add_argument("--out")
    return parser


def _matrix_csv(m: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in m:
        w.writerow([repr(float(v)) for z in row for v in (z.real, z.imag)])
    return buf.getvalue()


def _read_block(path: str) -> np.ndarray:
    values = []
    with open(path, encoding="utf-8") as fh:
        for line in csv.reader(fh):
            if not line or line[0].startswith("#"):
                continue
            re = float(line[0])
            im = float(line[1]) if len(line) > 1 else 0.0
            values.append(complex(re, im))
    return np.array(values, dtype=np.complex128)


def cmd_validate(args) -> int:
    results = run_validation(args.max_n, args.fast_max_n, args.seed, args.blocks)
    if args.verbose:
        print("\n".join(r.line() for r in results))
    print(summarize(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def cmd_opcount(args) -> int:
    rows = table1_report(args.n)
    text = table_to_csv(rows) if args.format == "csv" else table_to_json(rows) + "\n"
    if args.out:
        _emit(text, args.out)
    print(f"{'N':>6} {'FCT mults':>10} {'FCT adds':>10} {'base mults':>11} {'base adds':>10} {'saving %':>9}")
    for r in rows:
        print(f"{r.n:>6} {r.fct.mults:>10} {r.fct.adds:>10} {r.baseline.mults:>11} {r.baseline.adds:>10} {r.saving_percent:>9}")
    return EXIT_OK


def _link_spec(args, command: str, **extra) -> ExperimentSpec:
    return ExperimentSpec(
        command=command,
        n=args.n,
        cp_len=args.cp,
        constellation=args.mod,
        systems=_SYSTEMS[args.system],
        sample_time_ns=args.sample_time,
        frames=args.frames,
        seed=args.seed,
        chunk_frames=args.chunk,
        **extra,
    )


def cmd_papr(args) -> int:
    spec = _link_spec(args, "papr", oversample=args.oversample)
    result = run_papr(spec)
    if args.out:
        result.write(args.out, args.format)
    print(f"PAPR CCDF, N={spec.n}, {spec.constellation}, {spec.frames} frames, oversample {spec.oversample}, seed {spec.seed}")
    curves = result.payload["curves"]
    names = list(curves)
    print(f"{'PAPR0 dB':>9} " + " ".join(f"{s:>13}" for s in names))
    for i, t in enumerate(spec.thresholds_db):
        probs = [curves[s]["ccdf"][i] for s in names]
        if max(probs) < 1.0 and max(probs) > 0.0:
            print(f"{t:>9.2f} " + " ".join(f"{p:>13.5f}" for p in probs))
    return EXIT_OK


def cmd_ber(args) -> int:
    spec = _link_spec(
        args,
        "ber",
        channel=args.channel,
        ebn0_db=tuple(args.ebn0),
        min_errors=args.min_errors,
        max_bits=int(args.max_bits),
    )
    result = run_ber(spec)
    if args.out:
        result.write(args.out, args.format)
    print(f"BER, N={spec.n}, CP={spec.cp_len}, {spec.constellation}, channel {spec.channel}, seed {spec.seed}")
    print(f"{'system':>13} {'Eb/N0':>6} {'BER':>11} {'ci95':>10} {'bits':>11}")
    for system, points in result.payload["points"].items():
        for pt in points:
            print(f"{system:>13} {pt['ebn0_db']:>6.1f} {pt['ber']:>11.3e} {pt['ci95']:>10.2e} {pt['bits']:>11}")
    return EXIT_OK


def cmd_transform(args) -> int:
    n = args.n
    if args.matrix:
        builders = {
            "ct": ct_matrix,
            "cht": cht_matrix,
            "dft": dft_matrix,
            "dft-bitrev": lambda k: dft_matrix(k, bit_reversed_rows=True),
            "wht": wht_matrix,
        }
        _emit(_matrix_csv(builders[args.kind](n)), args.out)
        return EXIT_OK
    if args.kind != "ct":
        raise SpecError("only --kind ct can be applied to a block; use --matrix for the others")
    x = _read_block(args.input) if args.input else np.eye(1, n, dtype=np.complex128)[0]
    plan = plan_fct(len(x))
    y = ifct(plan, x) if args.inverse else fct(plan, x)
    _emit("".join(f"{float(z.real)!r},{float(z.imag)!r}\n" for z in y), args.out)
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "opcount": cmd_opcount,
    "papr": cmd_papr,
    "ber": cmd_ber,
    "transform": cmd_transform,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (SpecError, InvalidLengthError, ValueError, OSError) as exc:
        print(f"ctfast {args.command}: {exc}", file=sys.stderr)
        return EXIT_BAD_SPEC
