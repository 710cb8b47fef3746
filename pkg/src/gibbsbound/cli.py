"""Command-line front end: model files in, machine-readable reports out.

Exit codes: 0 when the requested certificate converged (or the check
certified), 2 when a sound but unconverged report was produced, 1 for
usage and parse errors.  All numbers are printed with 12 significant
digits; JSON reports parse back to the printed values exactly.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

from .errors import GibbsboundError
from .estimator import entropy_rate_bracket, pressure_bracket
from .bounds import marginal_bounds
from .model import Configuration, InteractionModel
from .ssm import q_of_spec

__all__ = ["main", "cmd_entropy", "cmd_pressure", "cmd_ssm_check",
           "cmd_marginal"]

LN2 = math.log(2.0)


def _sig12(value):
    if isinstance(value, float):
        return float(f"{value:.12g}")
    return value


def _render(payload, fmt):
    shaped = {k: _sig12(v) for k, v in payload.items()}
    if fmt == "json":
        return json.dumps(shaped, indent=2, sort_keys=True)
    lines = [f"{k}: {v:.12g}" if isinstance(v, float) else f"{k}: {v}"
             for k, v in shaped.items()]
    return "\n".join(lines)


def _load_model(path):
    return InteractionModel.from_file(path)


def _maybe_certify(model, p_c, rigorous):
    if model.dim != 2:
        return None
    try:
        return bool(q_of_spec(model, p_c, rigorous=rigorous).certified)
    except GibbsboundError:
        return None


def _units_scale(units):
    return 1.0 if units == "nats" else LN2


def _bracket_payload(report, model, units, certified):
    scale = _units_scale(units)
    payload = {
        "quantity": report.quantity,
        "n": report.n,
        "m": report.m_n,
        "j": report.j_final,
        "lower": report.lower / scale,
        "upper": report.upper / scale,
        "gap": report.gap / scale,
        "tolerance_target": report.tolerance_target / scale,
        "converged": report.converged,
        "units": units,
        "wall_time_ms": int(round(report.wall_time * 1000)),
        "model_digest": model.digest(),
        "diagnostics": list(report.diagnostics),
    }
    if certified is not None:
        payload["certified_ssm"] = certified
    return payload


def _bracket_flags(args):
    tol = None if args.tol is None else args.tol * _units_scale(args.units)
    return dict(
        target_tol=tol,
        fixed_m=args.m,
        max_j=args.max_j,
        max_seconds=args.max_seconds,
        threads=args.threads,
        exact_conditionals=(args.exact_conditionals == "on"),
    )


def cmd_entropy(model_path, n, **flags):
    """Entropy-rate bracket for the model in `model_path` at window size n."""
    model = _load_model(model_path)
    units = flags.pop("units", "nats")
    p_c = flags.pop("pc", None)
    rigorous = flags.pop("rigorous", False)
    report = entropy_rate_bracket(model, n, **flags)
    certified = _maybe_certify(model, p_c, rigorous)
    payload = _bracket_payload(report, model, units, certified)
    return payload, (0 if report.converged else 2)


def cmd_pressure(model_path, n, **flags):
    """Pressure bracket for the model in `model_path` at window size n."""
    model = _load_model(model_path)
    units = flags.pop("units", "nats")
    p_c = flags.pop("pc", None)
    rigorous = flags.pop("rigorous", False)
    report = pressure_bracket(model, n, **flags)
    certified = _maybe_certify(model, p_c, rigorous)
    payload = _bracket_payload(report, model, units, certified)
    return payload, (0 if report.converged else 2)


def cmd_ssm_check(model_path, p_c=None, rigorous=False):
    """Boundary-contrast mixing check; exit 0 only when certified."""
    model = _load_model(model_path)
    t0 = time.monotonic()
    cert = q_of_spec(model, p_c, rigorous=rigorous)
    payload = {
        "quantity": "ssm-check",
        "q_value": cert.q_value,
        "p_c": cert.p_c,
        "certified": cert.certified,
        "skipped_boundaries": cert.skipped,
        "wall_time_ms": int(round((time.monotonic() - t0) * 1000)),
        "model_digest": model.digest(),
    }
    if cert.witness is not None:
        payload["witness"] = [dict((",".join(map(str, v)), s)
                                   for v, s in w.items())
                              for w in cert.witness]
    return payload, (0 if cert.certified else 2)


def cmd_marginal(model_path, n, m, assignments, threads=1):
    """Certified probability interval for one pattern on a window."""
    model = _load_model(model_path)
    t0 = time.monotonic()
    pattern = Configuration.from_dict(dict(assignments))
    tables = marginal_bounds(model, n, m, pattern.sites, threads=threads)
    bp = tables[pattern]
    payload = {
        "quantity": "marginal",
        "n": n,
        "m": m,
        "j": 0,
        "lower": bp.lo,
        "upper": bp.hi,
        "gap": bp.hi - bp.lo,
        "units": "probability",
        "pattern": {",".join(map(str, v)): s for v, s in pattern.items()},
        "wall_time_ms": int(round((time.monotonic() - t0) * 1000)),
        "model_digest": model.digest(),
    }
    return payload, 0


def _parse_site_assignment(text):
    try:
        place, sym = text.rsplit("=", 1)
        site = tuple(int(c) for c in place.split(","))
        return site, sym
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected X,Y=SYMBOL, got {text!r}") from None


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the report contract reserves 2 for
    # unconverged results, so usage problems exit 1 instead
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def _add_bracket_flags(sub):
    sub.add_argument("--n", type=int, required=True,
                     help="window size (certified sandwich at this radius)")
    sub.add_argument("--m", type=int, default=None,
                     help="fix the ring distance instead of adapting")
    sub.add_argument("--tol", type=float, default=None,
                     help="target gap, in the display units")
    sub.add_argument("--max-j", type=int, default=6)
    sub.add_argument("--max-seconds", type=float, default=900.0)
    sub.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    sub.add_argument("--units", choices=("nats", "bits"), default="nats")
    sub.add_argument("--exact-conditionals", choices=("on", "off"),
                     default="on")
    sub.add_argument("--pc", type=float, default=None,
                     help="percolation threshold for the advisory check")
    sub.add_argument("--rigorous", action="store_true",
                     help="use the proven threshold bound instead")
    sub.add_argument("--format", choices=("json", "text"), default="json")


def _build_parser():
    parser = _Parser(prog="gibbsbound",
                     description="Certified entropy and pressure brackets "
                                 "for two-dimensional lattice models.")
    subs = parser.add_subparsers(dest="command", required=True)

    for name in ("entropy", "pressure"):
        sub = subs.add_parser(name)
        sub.add_argument("model", help="path to a model JSON file")
        _add_bracket_flags(sub)

    ssm = subs.add_parser("ssm-check")
    ssm.add_argument("model")
    ssm.add_argument("--pc", type=float, default=None)
    ssm.add_argument("--rigorous", action="store_true")
    ssm.add_argument("--format", choices=("json", "text"), default="json")

    marg = subs.add_parser("marginal")
    marg.add_argument("model")
    marg.add_argument("--n", type=int, required=True)
    marg.add_argument("--m", type=int, required=True)
    marg.add_argument("--site", type=_parse_site_assignment, action="append",
                      required=True, metavar="X,Y=SYMBOL",
                      help="pattern entry; repeat per site")
    marg.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    marg.add_argument("--format", choices=("json", "text"), default="json")
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in ("entropy", "pressure"):
            runner = cmd_entropy if args.command == "entropy" else cmd_pressure
            payload, code = runner(
                args.model, args.n, units=args.units, pc=args.pc,
                rigorous=args.rigorous, **_bracket_flags(args))
        elif args.command == "ssm-check":
            payload, code = cmd_ssm_check(args.model, args.pc, args.rigorous)
        else:
            payload, code = cmd_marginal(args.model, args.n, args.m,
                                         args.site, threads=args.threads)
    except (GibbsboundError, OSError, ValueError) as err:
        sys.stderr.write(f"error: {err}\n")
        return 1
    sys.stdout.write(_render(payload, args.format) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
