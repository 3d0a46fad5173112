"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 domain or solver error, 3 table1
regression failure.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import datetime
import io
import json
import sys

import numpy as np
import yaml

from . import __version__
from . import dispersion as disp
from . import table1 as t1
from .database import ENV_VAR, load
from .dispersion import RangePolicy
from .errors import CrystalNotFoundError, GvmSpdcError
from .gvm import solve_triplet, tuning_curve
from .phasematch import ROLES
from .spectrum import (
    fwhm,
    optimize_detuning,
    sample_idler_spectrum,
    signal_spectrum_from_idler,
)

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_REGRESSION = 0, 1, 2, 3

UNITS = "wavelength um; crystal length mm; frequency THz; dk rad/um; period um"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _w(x):
    return round(float(x), 4)


def _period(x):
    return round(float(x), 2)


def run_record(command, params, db):
    """Header lines (without the leading '# ') attached to every output."""
    return [
        f"gvmspdc {__version__}",
        f"command: {command}",
        "parameters: " + json.dumps(params, sort_keys=True),
        f"database: {db.path}",
        f"database_sha256: {db.checksum}",
        "timestamp: " + datetime.datetime.now(datetime.timezone.utc).isoformat(
            timespec="seconds"),
        f"units: {UNITS}",
    ]


def write_csv(stream, header, columns, rows, formats):
    for line in header:
        stream.write(f"# {line}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt.format(v) for fmt, v in zip(formats, row)])


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def write_record(stream, header, record):
    for line in header:
        stream.write(f"# {line}\n")
    stream.write(yaml.safe_dump(_plain(record), sort_keys=False,
                                default_flow_style=False))


@contextlib.contextmanager
def _open(path, default):
    if path is None or path == "-":
        yield default
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _params(args, *names):
    return {n: getattr(args, n) for n in ("crystal",) + names if hasattr(args, n)}


def _policy(args):
    return RangePolicy.STRICT if args.strict else RangePolicy.GRACE


def _crystal(db, name):
    try:
        return db.get(name)
    except CrystalNotFoundError as exc:
        raise UsageError(str(exc)) from None


def cmd_dispersion(args, db, out):
    crystal = _crystal(db, args.crystal)
    model = crystal.model(args.role)
    if args.points < 1:
        raise UsageError("--points must be at least 1")
    if args.start == args.stop:
        grid = np.array([args.start])
    else:
        grid = np.linspace(args.start, args.stop, args.points)
    policy = _policy(args)
    n = np.atleast_1d(disp.refractive_index(model, grid, policy))
    ng = np.atleast_1d(disp.group_index(model, grid, policy))
    header = run_record("dispersion", _params(args, "role", "start", "stop", "points",
                                              "strict"), db)
    write_csv(out, header, ["lambda_um", "n", "n_group"], zip(grid, n, ng),
              ["{:.4f}", "{:.8f}", "{:.8f}"])
    return EXIT_OK


def solution_record(crystal, sol):
    return {
        "crystal": crystal.name,
        "lambda_p_um": _w(sol.lambda_p),
        "lambda_s0_um": _w(sol.lambda_s0),
        "lambda_i0_um": _w(sol.lambda_i0),
        "poling_period_um": _period(sol.grating.period),
        "order": int(sol.grating.order),
        "matched_group_index": round(sol.matched_group_index, 8),
        "residuals": {
            "gvm": float(f"{sol.residual_gvm:.3e}"),
            "dk_rad_per_um": float(f"{sol.residual_dk:.3e}"),
        },
        "warnings": list(sol.validity_warnings),
    }


def cmd_gvm_solve(args, db, out):
    crystal = _crystal(db, args.crystal)
    sol = solve_triplet(crystal, args.lambda_i0, args.order, _policy(args))
    header = run_record("gvm-solve", _params(args, "lambda_i0", "order", "strict"), db)
    record = solution_record(crystal, sol)
    if args.format == "csv":
        cols = ["lambda_p_um", "lambda_s0_um", "lambda_i0_um", "poling_period_um",
                "order", "residual_gvm", "residual_dk"]
        row = [sol.lambda_p, sol.lambda_s0, sol.lambda_i0, sol.grating.period,
               sol.grating.order, sol.residual_gvm, sol.residual_dk]
        write_csv(out, header, cols, [row],
                  ["{:.4f}"] * 3 + ["{:.2f}", "{:d}", "{:.3e}", "{:.3e}"])
    else:
        write_record(out, header, record)
    return EXIT_OK


def _bandwidth_record(bw):
    return {
        "fwhm_um": _w(bw.fwhm_wavelength),
        "fwhm_thz": round(bw.fwhm_frequency, 3),
        "lo_crossing_um": _w(bw.lo_crossing),
        "hi_crossing_um": _w(bw.hi_crossing),
        "contiguous": bool(bw.contiguous),
    }


def cmd_spectrum(args, db, out):
    crystal = _crystal(db, args.crystal)
    policy = _policy(args)
    sol = solve_triplet(crystal, args.lambda_i0, args.order, policy)
    grid = tuple(args.grid[:2]) + (int(args.grid[2]),) if args.grid else None
    flags = ()
    if args.detune == "auto":
        res = optimize_detuning(crystal, sol, args.length, args.dip_floor, grid, policy)
        samples, flags = res.samples, res.flags
    else:
        try:
            detune = float(args.detune)
        except ValueError:
            raise UsageError(f"--detune must be a number or 'auto', got {args.detune!r}")
        samples = sample_idler_spectrum(crystal, sol, args.length, grid, detune, policy)
    bw_i = fwhm(samples)
    bw_s = fwhm(signal_spectrum_from_idler(samples))
    summary = {
        "crystal": crystal.name,
        "lambda_p_um": _w(sol.lambda_p),
        "lambda_s0_um": _w(sol.lambda_s0),
        "lambda_i0_um": _w(sol.lambda_i0),
        "length_mm": float(args.length),
        "poling_period_um": _period(sol.grating.period),
        "order": int(sol.grating.order),
        "detune_dk_rad_per_um": float(f"{samples.meta['detune_dk_rad_per_um']:.6e}"),
        "detuned_period_um": round(samples.meta["detuned_period_um"], 4),
        "idler": _bandwidth_record(bw_i),
        "signal": _bandwidth_record(bw_s),
        "warnings": list(sol.validity_warnings) + list(flags),
        "grid_report": list(samples.report),
    }
    header = run_record("spectrum", _params(args, "lambda_i0", "order", "length", "grid",
                                            "detune", "dip_floor", "strict"), db)
    if args.format == "record":
        write_record(out, header, summary)
        return EXIT_OK
    write_csv(out, header, ["lambda_i_um", "intensity"],
              zip(samples.axis, samples.intensity), ["{:.6f}", "{:.8e}"])
    with _open(args.summary, sys.stderr) as fh:
        write_record(fh, header, summary)
    return EXIT_OK


def cmd_tuning_curve(args, db, out):
    crystal = _crystal(db, args.crystal)
    if args.points < 0:
        raise UsageError("--points must be non-negative")
    grid = np.linspace(args.start, args.stop, args.points)
    curve = tuning_curve(crystal, grid, _policy(args))
    header = run_record("tuning-curve", _params(args, "start", "stop", "points",
                                                "strict"), db)
    write_csv(out, header, ["lambda_s_um", "lambda_i_um"], curve.pairs,
              ["{:.6f}", "{:.6f}"])
    if curve.failures:
        with _open(args.report, sys.stderr) as fh:
            for lam, kind, msg in curve.failures:
                fh.write(f"failed lambda_i_um={lam:.6f} kind={kind}: {msg}\n")
    return EXIT_OK


def cmd_table1(args, db, out):
    rows = t1.run(db, args.length, _policy(args))
    header = run_record("table1", {"length": args.length, "strict": args.strict}, db)
    if args.format == "csv":
        body = []
        for row in rows:
            if row.error:
                body.append([row.crystal, row.lambda_i0, "", "", "", "", "", "",
                             "FAIL " + row.error])
            for c in row.cells:
                tol = "" if c.tolerance is None else f"{c.tolerance[0]}:{c.tolerance[1]}"
                body.append([row.crystal, row.lambda_i0, c.name, f"{c.computed:.4f}",
                             f"{c.reference}", f"{c.abs_dev:+.4f}", f"{c.rel_dev:+.4f}",
                             tol, c.status])
        write_csv(out, header, ["crystal", "lambda_i0_um", "quantity", "computed",
                                "reference", "abs_dev", "rel_dev", "tolerance", "status"],
                  body, ["{}"] * 9)
    else:
        report = {"length_mm": float(args.length), "rows": []}
        for row in rows:
            entry = {"crystal": row.crystal, "lambda_i0_um": row.lambda_i0,
                     "status": "PASS" if row.passed else "FAIL"}
            if row.error:
                entry["reason"] = row.error
            entry["cells"] = {
                c.name: {
                    "computed": round(c.computed, 2 if c.name == "period" else 4),
                    "reference": c.reference,
                    "abs_dev": round(c.abs_dev, 4),
                    "rel_dev": round(c.rel_dev, 4),
                    "status": c.status,
                }
                for c in row.cells
            }
            if row.warnings:
                entry["warnings"] = list(row.warnings)
            report["rows"].append(entry)
        report["passed"] = sum(r.passed for r in rows)
        report["failed"] = sum(not r.passed for r in rows)
        write_record(out, header, report)
    return EXIT_OK if all(r.passed for r in rows) else EXIT_REGRESSION


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--db", help=f"crystal database (default: ${ENV_VAR} or the "
                        "bundled database)")
    common.add_argument("--out", help="output file (default: standard output)")
    common.add_argument("--strict", action="store_true",
                        help="disable the validity grace margin")
    common.add_argument("--format", choices=("csv", "record"), default=None)

    crystal = argparse.ArgumentParser(add_help=False)
    crystal.add_argument("--crystal", required=True)

    parser = _Parser(prog="gvmspdc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("dispersion", parents=[common, crystal],
                       help="refractive and group index vs wavelength")
    p.add_argument("--role", choices=ROLES, default="idler")
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--points", type=int, default=1001)
    p.set_defaults(func=cmd_dispersion)

    p = sub.add_parser("gvm-solve", parents=[common, crystal],
                       help="group-velocity-matched solution for one idler")
    p.add_argument("--lambda-i0", type=float, required=True)
    p.add_argument("--order", type=int, default=1)
    p.set_defaults(func=cmd_gvm_solve)

    p = sub.add_parser("spectrum", parents=[common, crystal],
                       help="idler spectrum and bandwidth")
    p.add_argument("--lambda-i0", type=float, required=True)
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--length", type=float, default=2.0, help="crystal length in mm")
    p.add_argument("--grid", type=float, nargs=3, metavar=("LO", "HI", "N"))
    p.add_argument("--detune", default="0", help="dk offset in rad/um, or 'auto'")
    p.add_argument("--dip-floor", type=float, default=0.5)
    p.add_argument("--summary", help="bandwidth summary file (default: stderr)")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("tuning-curve", parents=[common, crystal],
                       help="matched signal wavelength vs idler wavelength")
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--report", help="failed-point report file (default: stderr)")
    p.set_defaults(func=cmd_tuning_curve)

    p = sub.add_parser("table1", parents=[common],
                       help="regression against the reference solution table")
    p.add_argument("--length", type=float, default=t1.REFERENCE_LENGTH_MM)
    p.set_defaults(func=cmd_table1)
    return parser


_DEFAULT_FORMAT = {"dispersion": "csv", "gvm-solve": "record", "spectrum": "csv",
                   "tuning-curve": "csv", "table1": "record"}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = _DEFAULT_FORMAT[args.command]
    try:
        db = load(args.db)
        buf = io.StringIO()
        code = args.func(args, db, buf)
    except UsageError as exc:
        print(f"gvmspdc: error: kind=usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GvmSpdcError as exc:
        print(f"gvmspdc: error: kind={exc.kind}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    with _open(args.out, sys.stdout) as fh:
        fh.write(buf.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())
