"""Command-line front end.

Exit codes: 0 success, 1 domain or runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from .bounds import REPORT_COLUMNS, CNParams, ScenarioParams, advantage_region_search
from .cn_sim import CNSimConfig, simulate_cn, simulate_qtr_cn
from .exceptions import DomainError
from .scenario import DEFAULT_SWEEP_CAP, SweepSpec, compare_all, sweep

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2

SPEC_KEYS = {"m": "m", "M": "big_m", "big_m": "big_m", "n_s": "n_s", "eta": "eta", "n_b": "n_b"}
INT_KEYS = {"m", "big_m"}

ADVANTAGE_DEFAULTS = {
    "bins": "2..64",
    "background_photons": "log:0.1:100:13",
    "modes": "log:1:1e6:7",
    "snr": "log:1e-3:10:9",
}


class SpecError(Exception):
    """Malformed grid expression or sweep spec file."""


def parse_values(text: str) -> list[float]:
    """Parse ``3..6``, ``0.1,1,10``, ``log:LO:HI:N``, ``lin:LO:HI:N`` or a single number."""
    text = text.strip()
    try:
        if text.startswith(("log:", "lin:")):
            kind, lo, hi, n = text.split(":")
            lo, hi, n = float(lo), float(hi), int(n)
            if n < 1:
                raise SpecError(f"point count must be >= 1 in {text!r}")
            if kind == "log":
                if lo <= 0 or hi <= 0:
                    raise SpecError(f"log grid bounds must be positive in {text!r}")
                return [float(v) for v in np.geomspace(lo, hi, n)]
            return [float(v) for v in np.linspace(lo, hi, n)]
        if ".." in text:
            lo, hi = text.split("..")
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise SpecError(f"empty range {text!r}")
            return [float(v) for v in range(lo, hi + 1)]
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise SpecError(f"cannot parse {text!r}: {exc}") from None
    if not values:
        raise SpecError(f"no values in {text!r}")
    return values


def _coerce(key: str, values: list[float]) -> list:
    if key in INT_KEYS:
        if any(v != round(v) for v in values):
            raise SpecError(f"{key} takes integers")
        return [int(round(v)) for v in values]
    return values


def parse_spec_lines(lines) -> SweepSpec:
    spec = SweepSpec()
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecError(f"line {lineno}: expected key = value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "cap":
            try:
                spec.cap = int(float(value))
            except ValueError:
                raise SpecError(f"line {lineno}: bad cap {value!r}") from None
            continue
        if key not in SPEC_KEYS:
            raise SpecError(f"line {lineno}: unknown key {key!r}")
        name = SPEC_KEYS[key]
        if name in spec.grids:
            raise SpecError(f"line {lineno}: {key} given twice")
        spec.grids[name] = _coerce(name, parse_values(value))
    return spec


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def render(rows: list[dict], fmt: str, columns=None, single: bool = False) -> str:
    if fmt == "json":
        payload = rows[0] if single else rows
        return json.dumps(payload, indent=2, allow_nan=False) + "\n"
    buf = io.StringIO()
    columns = columns or (list(rows[0]) if rows else [])
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _add_common(p: argparse.ArgumentParser, default_format: str) -> None:
    p.set_defaults(_parser=p)
    p.add_argument("--format", choices=("json", "csv"), default=default_format)
    p.add_argument("--output", help="write to this file instead of standard output")
    p.add_argument("--threads", type=int, default=1, help="worker threads, 0 = auto; never changes results")


def _add_scenario(p: argparse.ArgumentParser, required: bool) -> None:
    p.add_argument("-m", "--bins", type=int, required=required, help="number of range bins")
    p.add_argument("-M", "--modes", type=int, required=required, help="modes per bin")
    p.add_argument("--signal-photons", type=float, required=required, help="mean signal photons per mode")
    p.add_argument("--eta", type=float, required=required, help="round-trip transmissivity")
    p.add_argument("--background-photons", type=float, required=required, help="background photons per mode")


def _scenario(args) -> ScenarioParams:
    return ScenarioParams(args.bins, args.modes, args.signal_photons, args.eta, args.background_photons)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qiranging",
        description="Error-probability bounds and CN receiver simulation for quantum target ranging.",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("bounds", help="evaluate every bound for one scenario")
    _add_scenario(p, required=True)
    _add_common(p, "json")

    p = sub.add_parser("simulate-cn", help="Monte Carlo run of the conditional-nulling receiver")
    p.add_argument("--zeta1", type=float, help="Type-I (false alarm) rate")
    p.add_argument("--zeta2", type=float, help="Type-II (miss) rate")
    p.add_argument("--hypotheses", type=int, help="number of hypotheses")
    _add_scenario(p, required=False)
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=42)
    _add_common(p, "json")

    p = sub.add_parser("sweep", help="evaluate all bounds over a parameter grid")
    p.add_argument("spec", nargs="?", help="key = value spec file (m, M, n_s, eta, n_b, cap)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUES", help="grid entry; repeatable")
    p.add_argument("--cap", type=int, default=None, help=f"maximum rows (default {DEFAULT_SWEEP_CAP})")
    _add_common(p, "csv")

    p = sub.add_parser("advantage", help="search a grid for points satisfying the advantage condition")
    p.add_argument("--bins", default=ADVANTAGE_DEFAULTS["bins"], help="m grid")
    p.add_argument("--background-photons", default=ADVANTAGE_DEFAULTS["background_photons"], help="n_b grid")
    p.add_argument("--modes", default=ADVANTAGE_DEFAULTS["modes"], help="M grid")
    p.add_argument("--snr", default=ADVANTAGE_DEFAULTS["snr"], help="gamma grid")
    _add_common(p, "json")
    return parser


def _report_row(report, fmt: str) -> dict:
    # the csv schema is fixed; json also carries the vacuous flag
    row = report.as_row()
    if fmt == "json":
        row["vacuous"] = report.vacuous
    return row


def cmd_bounds(args, parser) -> int:
    report = compare_all(_scenario(args))
    _emit(render([_report_row(report, args.format)], args.format, REPORT_COLUMNS, single=True), args.output)
    return EXIT_OK


def cmd_simulate_cn(args, parser) -> int:
    zetas = (args.zeta1, args.zeta2, args.hypotheses)
    scen = (args.bins, args.modes, args.signal_photons, args.eta, args.background_photons)
    if any(v is not None for v in zetas):
        if any(v is None for v in zetas):
            parser.error("--zeta1, --zeta2 and --hypotheses must be given together")
        if any(v is not None for v in scen):
            parser.error("give either the zeta flags or the scenario flags, not both")
        config = CNSimConfig(CNParams(args.zeta1, args.zeta2, args.hypotheses), args.trials, args.seed)
        result = simulate_cn(config, threads=args.threads)
    elif all(v is not None for v in scen):
        result = simulate_qtr_cn(_scenario(args), args.trials, args.seed, threads=args.threads)
    else:
        parser.error("need --zeta1/--zeta2/--hypotheses or the full set of scenario flags")
    _emit(render([result.as_dict()], args.format, single=True), args.output)
    return EXIT_OK


def cmd_sweep(args, parser) -> int:
    try:
        if args.spec:
            try:
                with open(args.spec, encoding="utf-8") as fh:
                    spec = parse_spec_lines(fh)
            except OSError as exc:
                raise SpecError(f"cannot read spec file: {exc}") from None
        else:
            spec = SweepSpec()
        extra = parse_spec_lines(args.set)
    except SpecError as exc:
        parser.error(str(exc))
    for key, values in extra.grids.items():
        spec.grids[key] = values
    if args.cap is not None:
        spec.cap = args.cap
    rows = [_report_row(r, args.format) for r in sweep(spec, threads=args.threads)]
    _emit(render(rows, args.format, REPORT_COLUMNS), args.output)
    return EXIT_OK


def cmd_advantage(args, parser) -> int:
    try:
        ms = _coerce("m", parse_values(args.bins))
        nbs = parse_values(args.background_photons)
        bms = _coerce("big_m", [round(v) for v in parse_values(args.modes)])
        gs = parse_values(args.snr)
    except SpecError as exc:
        parser.error(str(exc))
    if any(g <= 0 for g in gs):
        parser.error("--snr values must be > 0")
    if any(nb <= 0 for nb in nbs):
        parser.error("--background-photons values must be > 0")
    if any(m < 2 for m in ms) or any(bm < 1 for bm in bms):
        parser.error("need m >= 2 and M >= 1")
    res = advantage_region_search(ms, nbs, bms, gs)
    rows = [{"m": m, "M": bm, "n_b": nb, "gamma": g} for m, bm, nb, g in res.satisfying]
    if args.format == "csv":
        _emit(render(rows, "csv", ["m", "M", "n_b", "gamma"]), args.output)
        return EXIT_OK
    payload = {
        "grid_size": res.grid_size,
        "satisfying_count": len(rows),
        "message": "no satisfying tuples" if res.empty else f"{len(rows)} satisfying tuples",
        "witness": "for m > 2 the factor n_b (2 - m) + 1 is negative iff n_b > 1/(m - 2), "
        "so the right-hand side is negative and ln m <= RHS fails; n_b > 1 covers every m > 2",
        "witness_points": res.witness_points,
        "witness_violations": res.witness_violations,
        "restricted_points": res.restricted_points,
        "restricted_satisfying": res.restricted_satisfying,
        "satisfying": rows,
    }
    _emit(json.dumps(payload, indent=2, allow_nan=False) + "\n", args.output)
    return EXIT_OK


COMMANDS = {
    "bounds": cmd_bounds,
    "simulate-cn": cmd_simulate_cn,
    "sweep": cmd_sweep,
    "advantage": cmd_advantage,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    sub = args._parser
    if getattr(args, "threads", 1) < 0:
        sub.error("--threads must be >= 0")
    try:
        return COMMANDS[args.cmd](args, sub)
    except DomainError as exc:
        print(f"qiranging {args.cmd}: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
