"""Command-line front-end.

Subcommands: test, detect, simulate, montecarlo, spectrum.  Exit codes:
0 success, 1 error, 2 success-with-rejection when --fail-on-reject is set.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from .config import (SpectralConfig, TimeSeries, apply_overrides,
                     build_frequency_grid, config_from_text, default_config)
from .detect import algorithm1, d_profile
from .errors import EvospecError, ParseError, SizeError
from .montecarlo import run_estimation, run_sizepower
from .simulate import MODELS, DgpSpec, simulate
from .spectral import LEFT, RIGHT, spectrum_field
from .stats import all_tests, r_dmax, r_max, s_dmax, s_max

DEFAULT_OMEGAS = (0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4)


def read_series_csv(path: str) -> TimeSeries:
    """Read a single numeric column, headerless or with one header row."""
    values: List[float] = []
    p = Path(path)
    if not p.exists():
        raise ParseError(f"input file not found: {path}")
    with p.open(newline="") as fh:
        reader = csv.reader(fh)
        for row_no, row in enumerate(reader, start=1):
            cells = [c.strip() for c in row if c.strip() != ""]
            if not cells:
                continue
            if len(cells) != 1:
                raise ParseError(f"row {row_no}: expected one column, got {len(cells)}",
                                 row=row_no)
            try:
                values.append(float(cells[0]))
            except ValueError:
                if row_no == 1 and not values:
                    continue  # header row
                raise ParseError(f"row {row_no}: non-numeric value {cells[0]!r}",
                                 row=row_no)
    if not values:
        raise ParseError("no numeric rows found")
    if len(values) < 64:
        raise SizeError(f"need at least 64 rows, got {len(values)}")
    return TimeSeries(values=np.asarray(values))


def write_series_csv(path: str, x: TimeSeries) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x"])
        for v in x.values:
            writer.writerow([repr(float(v))])


def _load_config(args, T: int) -> SpectralConfig:
    if getattr(args, "config", None):
        cfg = config_from_text(Path(args.config).read_text())
    else:
        cfg = default_config(T)
    overrides = getattr(args, "set", None) or []
    return apply_overrides(cfg, overrides)


def _emit(payload: dict, out: Optional[str]) -> None:
    text = json.dumps(payload, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _parse_omegas(args) -> List[float]:
    if getattr(args, "omegas", None):
        return [float(v) for v in args.omegas.split(",")]
    if getattr(args, "omega", None) is not None:
        return [float(args.omega)]
    return list(DEFAULT_OMEGAS)


def cmd_test(args) -> int:
    x = read_series_csv(args.input)
    config = _load_config(args, x.T)
    grid = build_frequency_grid(config)
    omegas = _parse_omegas(args)
    reports = []
    names = ["smax", "rmax", "sdmax", "rdmax"] if args.stat == "all" else [args.stat]
    for name in names:
        if name == "smax":
            reports.extend(s_max(x, om, config, args.alpha).to_dict() for om in omegas)
        elif name == "rmax":
            reports.extend(r_max(x, om, config, args.alpha).to_dict() for om in omegas)
        elif name == "sdmax":
            reports.append(s_dmax(x, config, grid, args.alpha).to_dict())
        elif name == "rdmax":
            reports.append(r_dmax(x, config, grid, args.alpha).to_dict())
    payload = {"input": args.input, "T": x.T, "alpha": args.alpha, "reports": reports}
    _emit(payload, args.out)
    _print_report_table(reports)
    if args.fail_on_reject and any(r["reject"] for r in reports):
        return 2
    return 0


def _print_report_table(reports: List[dict]) -> None:
    header = f"{'statistic':<8} {'omega':>8} {'raw_max':>12} {'normalized':>12} " \
             f"{'crit':>8} {'p':>8} {'reject':>7}"
    print(header, file=sys.stderr)
    for r in reports:
        om = "-" if r["omega"] is None else f"{r['omega']:.4f}"
        print(
            f"{r['statistic']:<8} {om:>8} {r['raw_max']:>12.6g} "
            f"{r['normalized']:>12.6g} {r['critical_value']:>8.4f} "
            f"{r['p_value']:>8.4f} {str(r['reject']):>7}",
            file=sys.stderr,
        )


def cmd_detect(args) -> int:
    x = read_series_csv(args.input)
    config = _load_config(args, x.T)
    grid = build_frequency_grid(config)
    cps = algorithm1(x, config, grid, seed=args.seed, alpha=args.alpha)
    _emit(cps.to_dict(), args.out)
    if args.debug_dumps:
        splits, prof = d_profile(x, config, grid)
        dump = Path(args.out or "detect").with_suffix(".dprofile.csv")
        with dump.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["r"] + [f"omega_{w:.6f}" for w in grid.pi_full])
            for r, row in zip(splits, prof):
                writer.writerow([int(r)] + [repr(float(v)) for v in row])
        print(f"wrote D profile to {dump}", file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    spec = DgpSpec(model=args.model, T=args.T, rho=args.rho, l1=args.l1, l2=args.l2)
    x = simulate(spec, seed=args.seed)
    out = args.out or f"{args.model.lower()}_T{args.T}_seed{args.seed}.csv"
    write_series_csv(out, x)
    if x.truth:
        sidecar = Path(out).with_suffix(".truth.json")
        sidecar.write_text(json.dumps(
            {"breaks": [{"t": t, "omega": w} for t, w in x.truth]}, indent=2) + "\n")
    print(f"wrote {args.T} observations to {out}", file=sys.stderr)
    return 0


def cmd_montecarlo(args) -> int:
    overrides = {}
    if args.config or args.set:
        cfg = _load_config(args, args.T)
        overrides = {k: getattr(cfg, k) for k in
                     ("n_T", "b_WT", "n_omega", "epsilon_grid", "K", "v_T",
                      "theta", "D_star", "epsilon_f", "smoother_kernel")}
    if args.mode == "breaks":
        res = run_estimation(args.model, args.T, args.reps, args.seed,
                             alpha=args.alpha, threads=args.threads,
                             config_overrides=overrides or None)
    else:
        res = run_sizepower(args.model, args.T, args.reps, args.seed,
                            alpha=args.alpha, omega=args.omega, rho=args.rho,
                            threads=args.threads,
                            config_overrides=overrides or None)
    rows = res.rows()
    out = args.out or f"montecarlo_{args.model.lower()}_T{args.T}.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    _emit({"rows": rows}, Path(out).with_suffix(".json").as_posix())
    for row in rows:
        print(json.dumps(row), file=sys.stderr)
    return 0


def cmd_spectrum(args) -> int:
    x = read_series_csv(args.input)
    config = _load_config(args, x.T)
    grid = build_frequency_grid(config)
    side = LEFT if args.side == "left" else RIGHT
    spec = spectrum_field(x, side, config, grid)
    out = args.out or "spectrum.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"omega_{w:.6f}" for w in spec.frequencies])
        for j, row in zip(spec.time_indices, spec.estimates):
            writer.writerow([int(j)] + [repr(float(v)) for v in row])
    print(f"wrote spectrum field to {out}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="evospec",
                                description="Frequency-domain change-point detection "
                                            "for time series with evolving spectra")
    p.add_argument("--version", action="version", version=f"evospec {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, needs_input=True):
        if needs_input:
            sp.add_argument("--input", required=True, help="single-column CSV")
        sp.add_argument("--config", help="flat key=value config file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one config field (repeatable)")
        sp.add_argument("--alpha", type=float, default=0.05)
        sp.add_argument("--out", help="output path (default: stdout)")

    sp = sub.add_parser("test", help="run the max-type tests on a series")
    common(sp)
    sp.add_argument("--stat", choices=["smax", "rmax", "sdmax", "rdmax", "all"],
                    default="all")
    sp.add_argument("--omega", type=float, help="single frequency (radians)")
    sp.add_argument("--omegas", help="comma-separated frequencies")
    sp.add_argument("--fail-on-reject", action="store_true")
    sp.set_defaults(fn=cmd_test)

    sp = sub.add_parser("detect", help="estimate change-point locations")
    common(sp)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--debug-dumps", action="store_true")
    sp.set_defaults(fn=cmd_detect)

    sp = sub.add_parser("simulate", help="draw one sample path of a model")
    sp.add_argument("--model", choices=list(MODELS), required=True)
    sp.add_argument("--T", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--rho", type=float, default=0.3)
    sp.add_argument("--l1", type=float, default=0.33)
    sp.add_argument("--l2", type=float, default=0.66)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("montecarlo", help="replicate size/power or estimation runs")
    sp.add_argument("--model", choices=list(MODELS), required=True)
    sp.add_argument("--T", type=int, required=True)
    sp.add_argument("--reps", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--omega", type=float, default=0.0)
    sp.add_argument("--rho", type=float, default=0.3)
    sp.add_argument("--threads", type=int)
    sp.add_argument("--mode", choices=["tests", "breaks"], default="tests")
    sp.add_argument("--config")
    sp.add_argument("--set", action="append", metavar="KEY=VALUE")
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_montecarlo)

    sp = sub.add_parser("spectrum", help="export the smoothed local spectrum field")
    common(sp)
    sp.add_argument("--side", choices=["left", "right"], default="left")
    sp.set_defaults(fn=cmd_spectrum)

    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except EvospecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
