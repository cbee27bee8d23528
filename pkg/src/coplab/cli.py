"""Command-line front end: experiment orchestration and CSV emission.

Exit codes: 0 success, 2 flag validation failure, 3 trial-fatal error
(search dimension cap, singular channel, degenerate block).

Floats are written with repr(), the shortest representation that re-parses
to the exact same value, so emitted files round-trip bit-exactly.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, replace
from typing import Optional

from coplab.constellation import SUPPORTED_ORDERS, FoldMode, fold_level_count
from coplab.errors import (
    DimensionCap,
    SingularMatrix,
    UnsupportedModulation,
    ZeroBlock,
)
from coplab.montecarlo import (
    PRECODERS,
    LinkConfig,
    SerRecord,
    awgn_ser_reference,
    sweep_snr,
    sweep_tau,
    validate_config,
)

CSV_HEADER = [
    "precoder",
    "N",
    "M",
    "L",
    "fold_mode",
    "J",
    "K",
    "tau",
    "esn0_db",
    "trials",
    "symbols_sent",
    "symbol_errors",
    "ser",
    "wall_seconds",
    "candidates",
    "seed",
]


@dataclass(frozen=True)
class CsvRow:
    """One parsed CSV data row; empty cells become None."""

    precoder: str
    n: Optional[int]
    m: Optional[int]
    modulation: int
    fold_mode: Optional[str]
    j: Optional[int]
    k: Optional[int]
    tau: Optional[float]
    esn0_db: float
    trials: int
    symbols_sent: int
    symbol_errors: int
    ser: float
    wall_seconds: float
    candidates: int
    seed: Optional[int]


def record_fields(rec: SerRecord) -> list:
    """CSV cells for one SerRecord, in header order."""
    cfg = rec.config
    wl = cfg.precoder == "wlcop"
    return [
        cfg.precoder,
        str(cfg.n_users),
        str(cfg.n_tx),
        str(cfg.modulation),
        cfg.fold_mode.value if wl else "",
        str(fold_level_count(cfg.modulation, cfg.fold_mode)) if wl else "",
        str(cfg.k) if cfg.precoder == "dkvp" else "",
        repr(float(cfg.tau)),
        repr(float(cfg.esn0_db)),
        str(cfg.trials),
        str(rec.symbols_sent),
        str(rec.symbol_errors),
        repr(float(rec.ser)),
        repr(float(rec.wall_seconds)),
        str(rec.candidates),
        str(cfg.master_seed),
    ]


def awgn_fields(modulation: int, esn0_db: float, ser: float) -> list:
    return [
        "awgn",
        "",
        "",
        str(modulation),
        "",
        "",
        "",
        "",
        repr(float(esn0_db)),
        "0",
        "0",
        "0",
        repr(float(ser)),
        repr(0.0),
        "0",
        "",
    ]


def write_csv(rows: list, out: Optional[str]) -> None:
    """Write header plus rows to a file or standard output."""
    if out in (None, "-"):
        _write_csv_stream(rows, sys.stdout)
    else:
        with open(out, "w", newline="") as fh:
            _write_csv_stream(rows, fh)


def _write_csv_stream(rows, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(rows)


def _opt(cell: str, typ):
    return None if cell == "" else typ(cell)


def parse_csv(path: str) -> list:
    """Read an emitted CSV file back into typed rows."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header: {header}")
        rows = []
        for cells in reader:
            if len(cells) != len(CSV_HEADER):
                raise ValueError(f"malformed CSV row: {cells}")
            rows.append(
                CsvRow(
                    precoder=cells[0],
                    n=_opt(cells[1], int),
                    m=_opt(cells[2], int),
                    modulation=int(cells[3]),
                    fold_mode=_opt(cells[4], str),
                    j=_opt(cells[5], int),
                    k=_opt(cells[6], int),
                    tau=_opt(cells[7], float),
                    esn0_db=float(cells[8]),
                    trials=int(cells[9]),
                    symbols_sent=int(cells[10]),
                    symbol_errors=int(cells[11]),
                    ser=float(cells[12]),
                    wall_seconds=float(cells[13]),
                    candidates=int(cells[14]),
                    seed=_opt(cells[15], int),
                )
            )
    return rows


def _float_list(tokens) -> list:
    out = []
    for token in tokens:
        for part in str(token).split(","):
            part = part.strip()
            if part:
                out.append(float(part))
    if not out:
        raise ValueError("empty numeric list")
    return out


def _config_from_args(args, precoder: str) -> LinkConfig:
    n = args.n
    m = args.m if args.m is not None else n
    return LinkConfig(
        n_users=n,
        n_tx=m,
        modulation=args.mod,
        precoder=precoder,
        esn0_db=0.0,
        trials=args.trials,
        master_seed=args.seed,
        tau=args.tau,
        fold_mode=FoldMode(args.fold),
        k=args.k,
    )


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _fatal(exc: Exception, cfg: LinkConfig) -> int:
    print(
        f"error: {exc} "
        f"(precoder={cfg.precoder}, n={cfg.n_users}, m={cfg.n_tx}, "
        f"mod={cfg.modulation}, fold={cfg.fold_mode.value}, k={cfg.k})",
        file=sys.stderr,
    )
    return 3


def cmd_simulate(args) -> int:
    try:
        snrs = _float_list(args.snr_list)
        cfg = _config_from_args(args, args.precoder)
        validate_config(cfg, strict_c4=True)
    except (ValueError, UnsupportedModulation) as exc:
        return _fail(str(exc))
    try:
        records = sweep_snr(cfg, snrs, workers=args.workers)
    except (DimensionCap, SingularMatrix, ZeroBlock) as exc:
        return _fatal(exc, cfg)
    write_csv([record_fields(r) for r in records], args.out)
    return 0


def cmd_tau_sweep(args) -> int:
    try:
        taus = _float_list(args.tau_list)
        cfg = _config_from_args(args, args.precoder)
        cfg = replace(cfg, esn0_db=args.snr)
        # a tau sweep deliberately crosses the clean-fold threshold, so each
        # point gets the relaxed validation only
        for tau in taus:
            validate_config(replace(cfg, tau=tau))
    except (ValueError, UnsupportedModulation) as exc:
        return _fail(str(exc))
    try:
        records = sweep_tau(cfg, taus, workers=args.workers)
    except (DimensionCap, SingularMatrix, ZeroBlock) as exc:
        return _fatal(exc, cfg)
    write_csv([record_fields(r) for r in records], args.out)
    return 0


def cmd_compare(args) -> int:
    try:
        snrs = _float_list(args.snr_list)
        names = [p.strip() for p in str(args.precoders).split(",") if p.strip()]
        if not names:
            raise ValueError("empty precoder list")
        for name in names:
            if name not in PRECODERS:
                raise ValueError(
                    f"unknown precoder {name!r}, expected one of {PRECODERS}"
                )
        configs = [_config_from_args(args, name) for name in names]
        for cfg in configs:
            validate_config(cfg, strict_c4=True)
    except (ValueError, UnsupportedModulation) as exc:
        return _fail(str(exc))
    rows = []
    for cfg in configs:
        # identical master seed per point across precoders: every precoder
        # consumes the same (H, s, v) realizations (common random numbers)
        try:
            records = sweep_snr(cfg, snrs, workers=args.workers)
        except (DimensionCap, SingularMatrix, ZeroBlock) as exc:
            return _fatal(exc, cfg)
        for rec in records:
            print(
                f"# precoder={cfg.precoder} esn0_db={rec.config.esn0_db} "
                f"mean_objective={rec.mean_objective:.6g}",
                file=sys.stderr,
            )
            rows.append(record_fields(rec))
    write_csv(rows, args.out)
    return 0


def cmd_awgn_ref(args) -> int:
    try:
        snrs = _float_list(args.snr_list)
        if args.mod not in SUPPORTED_ORDERS:
            raise ValueError(
                f"order {args.mod} not supported, choose one of {SUPPORTED_ORDERS}"
            )
        rows = [
            awgn_fields(args.mod, esn0, awgn_ser_reference(args.mod, esn0))
            for esn0 in snrs
        ]
    except (ValueError, UnsupportedModulation) as exc:
        return _fail(str(exc))
    write_csv(rows, args.out)
    return 0


def _add_common(sub, with_tau: bool = True):
    sub.add_argument("--n", type=int, required=True, help="served users (N)")
    sub.add_argument("--m", type=int, default=None, help="transmit antennas (default: N)")
    sub.add_argument("--mod", type=int, required=True, help="QAM order L")
    sub.add_argument(
        "--fold",
        choices=[m.value for m in FoldMode],
        default="none",
        help="fold mode for wlcop",
    )
    sub.add_argument("--k", type=int, default=1, help="perturbed symbols for dkvp")
    if with_tau:
        sub.add_argument("--tau", type=float, default=2.5, help="perturbation spacing")
    sub.add_argument("--trials", type=int, default=1000, help="Monte Carlo trials per point")
    sub.add_argument("--seed", type=int, default=0, help="master seed")
    sub.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    sub.add_argument("--out", default=None, help="output CSV path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coplab",
        description="MIMO nonlinear precoding SER experiments (CSV output)",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser("simulate", help="SER vs SNR sweep for one precoder")
    sim.add_argument("--precoder", choices=PRECODERS, required=True)
    _add_common(sim)
    sim.add_argument(
        "--snr-list", nargs="+", required=True, help="Es/N0 points in dB (comma or space separated)"
    )
    sim.set_defaults(func=cmd_simulate)

    tau = subs.add_parser("tau-sweep", help="SER vs tau at a fixed SNR")
    tau.add_argument("--precoder", choices=PRECODERS, default="wlcop")
    _add_common(tau, with_tau=False)
    tau.set_defaults(tau=2.5)
    tau.add_argument("--tau-list", nargs="+", required=True, help="tau values")
    tau.add_argument("--snr", type=float, required=True, help="fixed Es/N0 in dB")
    tau.set_defaults(func=cmd_tau_sweep)

    cmp_ = subs.add_parser("compare", help="several precoders on shared randomness")
    cmp_.add_argument("--precoders", required=True, help="comma list, e.g. zf,wlcop")
    _add_common(cmp_)
    cmp_.add_argument("--snr-list", nargs="+", required=True)
    cmp_.set_defaults(func=cmd_compare)

    ref = subs.add_parser("awgn-ref", help="closed-form AWGN reference curve")
    ref.add_argument("--mod", type=int, required=True)
    ref.add_argument("--snr-list", nargs="+", required=True)
    ref.add_argument("--out", default=None)
    ref.set_defaults(func=cmd_awgn_ref)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
