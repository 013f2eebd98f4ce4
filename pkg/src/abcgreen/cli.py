"""Command-line front end.

Subcommands ``eval``, ``radial``, ``spectrum``, ``series`` and ``verify``
write one report to stdout or ``--out``.  JSON reports are objects with the
keys ``command``, ``status``, ``config`` and ``result`` (see
:data:`REPORT_SCHEMA`); CSV reports start with ``# key=value`` lines holding
the resolved config followed by a header row and fixed columns.

Exit codes: 0 success, 1 a verification check failed, 2 invalid input,
3 numerical non-convergence, 4 energy on or beyond a bound-state pole.
Failures print a JSON error record to stderr (and to ``--out`` if given).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings

from . import __version__
from .angular import SpacePoint, TruncationWarning
from .errors import DomainError, NotConvergedError, PoleError, QuadratureError
from .greens import TruncationSpec, bound_energies, greens_function, pole_scan
from .quad import QuadSpec
from .radial import (
    ChannelIndex,
    PhysicalParams,
    radial_closed,
    radial_integral,
    radial_series,
    radial_series_converged,
)
from .verify import SUITES, run_suite

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_VALIDATION = 2
EXIT_NOT_CONVERGED = 3
EXIT_POLE = 4

CSV_COLUMNS = {
    "eval": ["real", "imag", "err_estimate", "converged", "q_max", "k_max"],
    "radial": ["route", "value", "err_estimate", "converged"],
    "spectrum": ["source", "n_r", "q", "k", "energy", "lam"],
    "series": ["n", "term", "partial_sum", "ratio"],
    "verify": ["name", "identity", "metric", "error", "tol", "cases", "passed"],
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["command", "status", "config", "result"],
    "properties": {
        "command": {"enum": sorted(CSV_COLUMNS)},
        "status": {"enum": ["ok", "failed"]},
        "version": {"type": "string"},
        "config": {"type": "object"},
        "result": {"type": "object"},
    },
}

ERROR_SCHEMA = {
    "type": "object",
    "required": ["status", "error", "message", "exit_code"],
    "properties": {
        "status": {"const": "error"},
        "error": {"type": "string"},
        "message": {"type": "string"},
        "exit_code": {"enum": [EXIT_VALIDATION, EXIT_NOT_CONVERGED, EXIT_POLE]},
    },
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_common(p, *, quad=True):
    p.add_argument("--format", choices=("json", "csv"), default="json", dest="output_format")
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    if quad:
        p.add_argument("--tol", type=float, default=1e-10, help="relative quadrature tolerance")


def _add_couplings(p, energy=True):
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta0", type=float, default=0.0)
    if energy:
        p.add_argument("--energy", type=float, required=True, help="energy in units of the rest energy")


def _add_channel(p):
    p.add_argument("--q", type=int, default=0)
    p.add_argument("--k", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="abcgreen", description="Aharonov-Bohm-Coulomb Green's function toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="full Green's function G(x_b, x_a; E)")
    _add_couplings(p)
    for name in ("rb", "ra", "theta-b", "theta-a"):
        p.add_argument(f"--{name}", type=float, required=True)
    p.add_argument("--phi-b", type=float, default=0.0)
    p.add_argument("--phi-a", type=float, default=0.0)
    p.add_argument("--qmax", type=int, default=20)
    p.add_argument("--kmax", type=int, default=25)
    p.add_argument("--tail-tol", type=float, default=1e-10)
    p.add_argument("--adaptive", action="store_true")
    _add_common(p)

    p = sub.add_parser("radial", help="one channel's radial Green's function")
    _add_couplings(p)
    _add_channel(p)
    p.add_argument("--rb", type=float, required=True)
    p.add_argument("--ra", type=float, required=True)
    p.add_argument("--route", choices=("closed", "integral", "series", "all"), default="all")
    _add_common(p)

    p = sub.add_parser("spectrum", help="bound-state energies of one channel")
    _add_couplings(p, energy=False)
    _add_channel(p)
    p.add_argument("--nr-max", type=int, default=3)
    p.add_argument("--scan", action="store_true", help="also locate the poles by bisection on a grid")
    p.add_argument("--grid", type=int, default=4000, help="grid points on (0.001, 0.999) for --scan")
    _add_common(p, quad=False)

    p = sub.add_parser("series", help="partial sums of the perturbation series")
    _add_couplings(p)
    _add_channel(p)
    p.add_argument("--rb", type=float, required=True)
    p.add_argument("--ra", type=float, required=True)
    p.add_argument("--nmax", type=int, default=12)
    _add_common(p)

    p = sub.add_parser("verify", help="run verification batteries")
    p.add_argument("--suite", choices=sorted(SUITES), default="all")
    p.add_argument("--tol", type=float, default=None, help="override every check's threshold")
    p.add_argument("--format", choices=("json", "csv"), default="json", dest="output_format")
    p.add_argument("--out", default=None)
    return parser


# --------------------------------------------------------------------------
# command handlers: each returns (config, result, rows, ok)


def _params(args):
    return PhysicalParams(args.alpha, args.beta0, args.energy)


def _quad(args):
    return QuadSpec(rel_tol=args.tol)


def _cmd_eval(args):
    p = _params(args)
    b = SpacePoint(args.rb, args.theta_b, args.phi_b)
    a = SpacePoint(args.ra, args.theta_a, args.phi_a)
    trunc = TruncationSpec(args.qmax, args.kmax, args.tail_tol, args.adaptive)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        res = greens_function(b, a, p, trunc)
    if args.adaptive and not res.converged:
        raise NotConvergedError("adaptive channel window did not reach tail_tol")
    q_max = args.qmax + res.refinements_used
    k_max = args.kmax + res.refinements_used
    config = {
        "alpha": args.alpha, "beta0": args.beta0, "energy": args.energy,
        "b": {"r": b.r, "theta": b.theta, "phi": b.phi},
        "a": {"r": a.r, "theta": a.theta, "phi": a.phi},
        "truncation": {"q_max": args.qmax, "k_max": args.kmax, "tail_tol": args.tail_tol,
                       "adaptive": args.adaptive, "k_center": trunc.center(p.beta0)},
    }
    result = {
        "value": {"real": res.value.real, "imag": res.value.imag},
        "err_estimate": res.err_estimate,
        "converged": res.converged,
        "window": {"q_max": q_max, "k_max": k_max},
    }
    rows = [[res.value.real, res.value.imag, res.err_estimate, res.converged, q_max, k_max]]
    return config, result, rows, True


def _channel_config(args, p):
    ch = ChannelIndex(args.q, args.k)
    return ch, {"alpha": args.alpha, "beta0": args.beta0, "energy": args.energy,
                "q": args.q, "k": args.k, "rb": args.rb, "ra": args.ra,
                "lam": ch.lam(p), "kappa": p.kappa, "nu": p.nu}


def _cmd_radial(args):
    p = _params(args)
    ch, config = _channel_config(args, p)
    config["route"] = args.route
    config["quad"] = {"rel_tol": args.tol}
    spec = _quad(args)
    routes = ("closed", "integral", "series") if args.route == "all" else (args.route,)
    result = {}
    rows = []
    for route in routes:
        if route == "closed":
            val, err, conv = radial_closed(ch, p, args.rb, args.ra), 0.0, True
        elif route == "integral":
            r = radial_integral(ch, p, args.rb, args.ra, spec)
            val, err, conv = r.value, r.err_estimate, r.converged
        else:
            table = radial_series_converged(ch, p, args.rb, args.ra, remainder_tol=1e-8, spec=spec)
            val, err = table.value, table.remainder
            conv = table.remainder <= 1e-8 * abs(table.value)
        result[route] = {"value": val, "err_estimate": err, "converged": conv}
        rows.append([route, val, err, conv])
    if not all(r["converged"] for r in result.values()):
        raise NotConvergedError("a radial route did not converge")
    return config, result, rows, True


def _cmd_spectrum(args):
    ch = ChannelIndex(args.q, args.k)
    states = bound_energies(ch, args.alpha, args.beta0, args.nr_max)
    config = {"alpha": args.alpha, "beta0": args.beta0, "q": args.q, "k": args.k,
              "nr_max": args.nr_max, "scan": args.scan, "grid": args.grid}
    result = {"energies": [s.energy for s in states], "lam": states[0].lam,
              "states": [{"n_r": s.n_r, "energy": s.energy} for s in states]}
    rows = [["closed", s.n_r, s.q, s.k, s.energy, s.lam] for s in states]
    if args.scan:
        grid = [1e-3 + (0.999 - 1e-3) * i / (args.grid - 1) for i in range(args.grid)]
        found = [s for s in pole_scan(ch, args.alpha, args.beta0, grid) if s.n_r <= args.nr_max]
        result["scan"] = [{"n_r": s.n_r, "energy": s.energy} for s in found]
        rows += [["scan", s.n_r, s.q, s.k, s.energy, s.lam] for s in found]
    return config, result, rows, True


def _cmd_series(args):
    p = _params(args)
    ch, config = _channel_config(args, p)
    config["nmax"] = args.nmax
    config["quad"] = {"rel_tol": args.tol}
    table = radial_series(ch, p, args.rb, args.ra, args.nmax, _quad(args))
    closed = radial_closed(ch, p, args.rb, args.ra)
    ratios = table.ratios
    rows = [[n, t, s, r] for n, (t, s, r) in enumerate(zip(table.terms, table.partial_sums, ratios))]
    result = {
        "rows": [{"n": n, "term": t, "partial_sum": s, "ratio": r} for n, t, s, r in rows],
        "closed": closed,
        "remainder": table.remainder,
        "rel_diff_to_closed": abs(table.value - closed) / abs(closed),
    }
    return config, result, rows, True


def _cmd_verify(args):
    checks = run_suite(args.suite, args.tol)
    config = {"suite": args.suite, "tol": args.tol}
    records = [c.as_record() for c in checks]
    ok = all(c.passed for c in checks)
    result = {"checks": records, "all_passed": ok}
    rows = [[r[c] for c in CSV_COLUMNS["verify"]] for r in records]
    return config, result, rows, ok


HANDLERS = {
    "eval": _cmd_eval,
    "radial": _cmd_radial,
    "spectrum": _cmd_spectrum,
    "series": _cmd_series,
    "verify": _cmd_verify,
}


# --------------------------------------------------------------------------
# output


def _clean(obj):
    """Make floats JSON-safe (non-finite values become strings)."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def render_json(report) -> str:
    return json.dumps(_clean(report), sort_keys=True, indent=2) + "\n"


def render_csv(command, config, rows) -> str:
    buf = io.StringIO()
    for key, value in sorted(_flatten(config).items()):
        buf.write(f"# {key}={value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS[command])
    for row in rows:
        writer.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _emit(text, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fail(exc, code, out_path):
    record = {"status": "error", "error": type(exc).__name__, "message": str(exc), "exit_code": code}
    if isinstance(exc, PoleError):
        record["n_r"] = exc.n_r
        record["channel"] = list(exc.channel) if exc.channel is not None else None
    text = render_json(record)
    sys.stderr.write(text)
    if out_path:
        try:
            _emit(text, out_path)
        except OSError:
            pass
    return code


def main(argv=None) -> int:
    parser = build_parser()
    out_path = None
    try:
        args = parser.parse_args(argv)
        out_path = getattr(args, "out", None)
        config, result, rows, ok = HANDLERS[args.command](args)
    except UsageError as exc:
        return _fail(exc, EXIT_VALIDATION, out_path)
    except PoleError as exc:
        return _fail(exc, EXIT_POLE, out_path)
    except DomainError as exc:
        return _fail(exc, EXIT_VALIDATION, out_path)
    except (NotConvergedError, QuadratureError) as exc:
        return _fail(exc, EXIT_NOT_CONVERGED, out_path)

    if args.output_format == "json":
        report = {"command": args.command, "status": "ok" if ok else "failed",
                  "version": __version__, "config": config, "result": result}
        text = render_json(report)
    else:
        text = render_csv(args.command, config, rows)
    try:
        _emit(text, out_path)
    except OSError as exc:
        return _fail(DomainError(f"cannot write report: {exc}"), EXIT_VALIDATION, None)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
