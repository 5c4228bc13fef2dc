"""Command-line front end.

    qdiscord rates  [--preset NAME | --config PATH] [--model M]
    qdiscord evolve [...] --t-max S --points N [--output PATH] [--exact] [--paper-compat]
    qdiscord detect [...] [--threshold-frac F]
    qdiscord scan   [...] --rc-min M --rc-max M --points N --lambda-cap S^-1

Scalars are printed as JSON, series and scans as CSV. Exit codes: 0 ok,
2 config error, 3 I/O error, 4 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import shlex
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from ._accel import BACKEND
from .analysis import DEFAULT_LAMBDA_CAP, THRESHOLD_FRAC, csl_bound_scan, detection_time
from .analysis import discord_trace
from .constants import MODEL_NAMES, PRESET_NAMES, ConfigError, load_config, table1_presets
from .evolution import ConvergenceError
from .rates import decay_rate

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NONCONVERGED = 4

EVOLVE_COLUMNS = ("t", "discord_nats", "sigma1", "sigma2", "sigma3", "sigma4", "rho11",
                  "rho22", "re_rho23", "re_rho14", "im_rho14", "envelope_mode")
SCAN_COLUMNS = ("r_c", "lambda_bound")


class _IOFailure(Exception):
    pass


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _resolve(args):
    defaults = table1_presets(args.preset) if args.preset else None
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise _IOFailure(f"cannot read config {args.config}: {exc.strerror}") from exc
    else:
        text = ""
    if not args.config and args.model is None and defaults is not None:
        return defaults
    return load_config(text, defaults=defaults, model=args.model)


def _meta():
    return {"version": __version__, "backend": BACKEND,
            "timestamp": datetime.now(timezone.utc).isoformat()}


def _command_echo(argv) -> str:
    return "qdiscord " + " ".join(shlex.quote(a) for a in argv)


def _emit_json(record, args):
    if args.meta:
        record["meta"] = _meta()
    text = json.dumps(record, indent=2, allow_nan=False) + "\n"
    _write(text, args.output)


def _emit_csv(columns, rows, args, command):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(row)
    _write(buf.getvalue(), args.output)
    if args.meta:
        meta = {"schema_version": SCHEMA_VERSION, "command": command, **_meta()}
        text = json.dumps(meta, indent=2) + "\n"
        if args.output:
            _write(text, args.output + ".meta.json")
        else:
            sys.stderr.write(text)


def _write(text, path):
    if not path:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise _IOFailure(f"cannot write {path}: {exc.strerror}") from exc


def cmd_rates(args, command):
    params, model = _resolve(args)
    rate = decay_rate(params, model)
    _emit_json({"schema_version": SCHEMA_VERSION, "command": command, "model": model.tag,
                "eta": rate.eta, "lambda_big": rate.lambda_big,
                "components": {k: float(v) for k, v in rate.components.items()}}, args)
    return EXIT_OK


def cmd_evolve(args, command):
    if not args.t_max > 0:
        raise ConfigError("must be > 0", key="--t-max")
    if args.points < 2:
        raise ConfigError("must be >= 2", key="--points")
    params, model = _resolve(args)
    lam = decay_rate(params, model).lambda_big
    t = np.linspace(0.0, args.t_max, args.points)
    tr = discord_trace(lam, params.omega, t, exact=args.exact,
                       paper_compat=args.paper_compat)
    columns = EVOLVE_COLUMNS + (("discord_bits",) if args.bits else ())
    rows = []
    for i in range(t.size):
        row = [_fmt(tr.t[i]), _fmt(tr.delta[i]), *(_fmt(s) for s in tr.sigma[i]),
               _fmt(tr.rho11[i]), _fmt(tr.rho22[i]), _fmt(tr.rho23[i]),
               _fmt(tr.rho14[i].real), _fmt(tr.rho14[i].imag), str(int(tr.envelope))]
        if args.bits:
            row.append(_fmt(tr.delta[i] / math.log(2.0)))
        rows.append(row)
    _emit_csv(columns, rows, args, command)
    return EXIT_OK


def cmd_detect(args, command):
    if not 0.0 < args.threshold_frac < 1.0:
        raise ConfigError("must lie in (0, 1)", key="--threshold-frac")
    params, model = _resolve(args)
    lam = decay_rate(params, model).lambda_big
    res = detection_time(lam, params.omega, args.threshold_frac)
    _emit_json({"schema_version": SCHEMA_VERSION, "command": command, "model": model.tag,
                "lambda_big": lam,
                "t_detect": res.t_detect if math.isfinite(res.t_detect) else None,
                "threshold": res.threshold, "threshold_frac": args.threshold_frac,
                "converged": res.converged, "note": res.note}, args)
    return EXIT_OK if res.converged else EXIT_NONCONVERGED


def cmd_scan(args, command):
    params, _ = _resolve(args)
    try:
        points = csl_bound_scan(params, args.lambda_cap, (args.rc_min, args.rc_max),
                                args.points)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rows = [[_fmt(p.r_c), _fmt(p.lambda_bound)] for p in points]
    _emit_csv(SCAN_COLUMNS, rows, args, command)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_argument_group("parameters")
    src.add_argument("--config", metavar="PATH", help="key=value config file (SI units)")
    src.add_argument("--preset", type=str.lower, choices=PRESET_NAMES,
                     help="reference parameter set; config keys override it")
    src.add_argument("--model", type=str.lower, choices=MODEL_NAMES,
                     help="override the noise model")
    common.add_argument("--output", metavar="PATH", help="write here instead of stdout")
    common.add_argument("--meta", action="store_true",
                        help="add run metadata (timestamp, backend)")

    parser = argparse.ArgumentParser(prog="qdiscord", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("rates", parents=[common], help="decay-rate constants (JSON)")

    ev = sub.add_parser("evolve", parents=[common], help="discord time series (CSV)")
    ev.add_argument("--t-max", type=float, required=True, metavar="S")
    ev.add_argument("--points", type=int, default=201, metavar="N")
    ev.add_argument("--exact", action="store_true", help="disable envelope mode")
    ev.add_argument("--paper-compat", action="store_true",
                    help="use 1/4 conditional-entropy coefficients instead of (1 +/- e)/2")
    ev.add_argument("--bits", action="store_true", help="append a discord_bits column")

    det = sub.add_parser("detect", parents=[common], help="detection time (JSON)")
    det.add_argument("--threshold-frac", type=float, default=THRESHOLD_FRAC, metavar="F")

    sc = sub.add_parser("scan", parents=[common], help="lambda_CSL upper bound vs r_C (CSV)")
    sc.add_argument("--rc-min", type=float, default=1e-9, metavar="M")
    sc.add_argument("--rc-max", type=float, default=1e-4, metavar="M")
    sc.add_argument("--points", type=int, default=51, metavar="N")
    sc.add_argument("--lambda-cap", type=float, default=DEFAULT_LAMBDA_CAP, metavar="S^-1")
    return parser


_COMMANDS = {"rates": cmd_rates, "evolve": cmd_evolve, "detect": cmd_detect,
             "scan": cmd_scan}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    command = _command_echo(argv)
    try:
        return _COMMANDS[args.command](args, command)
    except ConfigError as exc:
        print(f"qdiscord: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _IOFailure as exc:
        print(f"qdiscord: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConvergenceError as exc:
        print(f"qdiscord: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
