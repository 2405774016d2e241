"""Command-line front end.

Every subcommand builds a table of rows plus an optional summary and writes
them as JSON (one document with a ``meta`` block) or CSV (the table, with the
meta block in a ``.meta.json`` sidecar when writing to a file). Output depends
only on the configuration, so repeated runs are byte-identical.

Exit codes: 0 success, 1 a check ran but failed, 2 invalid configuration,
3 numerical failure (saturation or quadrature) with partial output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
import scipy

from . import __version__
from .analysis import (Grid, bound_check, korovkin_check, order_check, voronovskaja)
from .basis import OperatorParams, TruncationPolicy, basis_values, truncation_index
from .errors import (AccuracyError, ExprEvalError, JainDurrmeyerError, SaturationError)
from .functions import resolve_function
from .moments import (MomentMethod, MomentValue, basis_raw_moment, log_basis_norms, p_exact,
                      p_recurrence, raw_moments_quadrature)
from .operators import (auxiliary_apply, durrmeyer_apply_with_error, jain_apply,
                        jain_tail_bound)
from .closed_forms import (FAMILIES, MAX_ORDER, ClosedFormId, DEFAULT_K_POINTS, Sweep,
                          discrepancy_sweep)
from .quadrature import QuadratureConfig

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

FAMILY_ALIASES = {
    "B": "jain_B", "jain_B": "jain_B",
    "S": "S_closed", "S_closed": "S_closed",
    "P": "P_closed", "P_closed": "P_closed",
    "T": "T_closed", "T_closed": "T_closed",
    "mu": "mu_closed", "mu_closed": "mu_closed",
    "T_recur": "T_recur",
}

_EXACT_LITERAL = re.compile(r"^\s*\d+\s*(/\s*\d+\s*)?$")
_NUMERIC_ERRORS = (SaturationError, AccuracyError, ExprEvalError)


class ConfigError(Exception):
    pass


# --------------------------------------------------------------------------
# argument parsing helpers
# --------------------------------------------------------------------------

def parse_beta(text: str):
    """'p/q' or integer literals become Fractions; decimals stay floats."""
    text = text.strip()
    try:
        if _EXACT_LITERAL.match(text):
            return Fraction(text.replace(" ", ""))
        return float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse beta {text!r}: {exc}") from None


def parse_int_list(text: str) -> list[int]:
    """'3', '1,2,5' or an inclusive range 'a:b'."""
    out = []
    for part in text.split(","):
        part = part.strip()
        try:
            if ":" in part:
                lo, hi = part.split(":")
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise ConfigError(f"cannot parse integer list {text!r}") from None
    return out


def parse_x_list(text: str) -> list[float]:
    """'1.5', '0,1,4' or an evenly spaced grid 'a:b:count'."""
    text = text.strip()
    try:
        if text.count(":") == 2:
            a, b, count = text.split(":")
            return [float(v) for v in np.linspace(float(a), float(b), int(count))]
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"cannot parse x values {text!r}") from None


def parse_interval(text: str) -> tuple[float, float]:
    try:
        a, b = (float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"interval must be 'a,b', got {text!r}") from None
    return a, b


# --------------------------------------------------------------------------
# rendering
# --------------------------------------------------------------------------

def fraction_text(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def _plain(value):
    if isinstance(value, Fraction):
        return fraction_text(value)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else repr(value)
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    return value


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, Fraction):
        return fraction_text(value)
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def render_json(document: dict) -> str:
    return json.dumps(_plain(document), indent=2, ensure_ascii=False) + "\n"


def render_csv(header: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(row.get(h)) for h in header])
    return buf.getvalue()


@dataclass
class Outcome:
    header: list
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)
    passed: Optional[bool] = None


# --------------------------------------------------------------------------
# shared config builders
# --------------------------------------------------------------------------

def _params(args, n=None) -> OperatorParams:
    if args.exact and not isinstance(args.beta, Fraction):
        raise ConfigError("exact mode needs beta as a fraction literal such as 1/2")
    beta = args.beta if isinstance(args.beta, Fraction) and args.exact else float(args.beta)
    return OperatorParams(args.n[0] if n is None else n, beta)


def _policy(args) -> TruncationPolicy:
    return TruncationPolicy(args.mass_tol, args.hard_cap)


def _quad(args) -> QuadratureConfig:
    return QuadratureConfig(args.rel_tol, args.abs_tol, args.max_panels)


def _single(values, name):
    if len(values) != 1:
        raise ConfigError(f"{name} takes a single value here, got {values}")
    return values[0]


def _numeric_error(exc) -> str:
    return f"{type(exc).__name__}: {exc}"


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_basis(args) -> Outcome:
    params = _params(args)
    policy = _policy(args)
    out = Outcome(["x", "k", "value", "cumulative_mass"])
    for x in args.x:
        trunc = truncation_index(params, x, policy)
        k_max = trunc.k_max if args.k_max is None else args.k_max
        values = basis_values(params, x, k_max)
        cumulative = np.cumsum(values)
        for k in range(k_max + 1):
            out.rows.append({"x": x, "k": k, "value": values[k],
                             "cumulative_mass": cumulative[k]})
        out.summary[f"x={x!r}"] = {"k_max": trunc.k_max, "mass": trunc.mass,
                                   "saturated": trunc.saturated}
        if trunc.saturated:
            out.errors.append(f"SaturationError: truncation hit the hard cap at x={x!r}")
    return out


def _moment_values(params, k, r_values, method, quad) -> list[MomentValue]:
    r_max = max(r_values)
    if method is MomentMethod.STIRLING_SUM:
        return [p_exact(params, k, r) for r in r_values]
    if method is MomentMethod.RECURRENCE:
        if k == 0:
            return [p_exact(params, 0, r) for r in r_values]
        seq = p_recurrence(params, k, r_max)
        return [seq[r] for r in r_values]
    raw = raw_moments_quadrature([(params, k, r) for r in [0] + list(r_values)], quad)
    norm = raw[0]
    out = []
    for mv in raw[1:]:
        v = mv.float_value / norm.float_value
        err = (mv.abs_error_bound + abs(v) * norm.abs_error_bound) / norm.float_value
        out.append(MomentValue(v, None, err))
    return out


def cmd_moments(args) -> Outcome:
    method = MomentMethod.parse(args.method)
    if args.exact and method is MomentMethod.QUADRATURE:
        raise ConfigError("exact mode is available for stirling-sum and recurrence only")
    params = _params(args)
    quad = _quad(args)
    out = Outcome(["n", "beta", "k", "r", "method", "ratio", "exact", "abs_error_bound",
                   "basis_moment"])
    beta = params.exact if params.is_exact else params.beta
    for k in args.k:
        if k < 0:
            raise ConfigError(f"k must be >= 0, got {k}")
        try:
            values = _moment_values(params, k, args.r, method, quad)
            log_norm = float(log_basis_norms(params, k)[k])
        except _NUMERIC_ERRORS as exc:
            out.errors.append(f"k={k}: {_numeric_error(exc)}")
            continue
        for r, mv in zip(args.r, values):
            out.rows.append({
                "n": params.n, "beta": beta, "k": k, "r": r, "method": method.value,
                "ratio": mv.float_value,
                "exact": mv.exact_value if args.exact else None,
                "abs_error_bound": mv.abs_error_bound,
                "basis_moment": mv.float_value * math.exp(log_norm),
            })
    return out


def cmd_closed_form_check(args) -> Outcome:
    families = [FAMILY_ALIASES[f] for f in args.family] if args.family else list(FAMILIES)
    policy = _policy(args)
    out = Outcome(["family", "order", "n", "beta", "point", "exact", "exact_error_bound",
                   "closed", "abs_gap", "rel_gap"])
    worst = {}
    for fam in families:
        lo = 1 if fam == "T_recur" else 0
        orders = args.r if args.r is not None else list(range(lo, MAX_ORDER[fam] + 1))
        defaults = Sweep()
        if fam in ("S_closed", "P_closed"):
            points = args.k if args.k is not None else list(DEFAULT_K_POINTS)
        else:
            points = args.x if args.x is not None else list(defaults.points)
        sweep = Sweep(args.n if args.n_given else defaults.n_values,
                      [args.beta] if args.beta_given else defaults.beta_values,
                      points)
        for r in orders:
            formula = ClosedFormId(fam, r)
            try:
                report = discrepancy_sweep(formula, sweep, policy)
            except _NUMERIC_ERRORS as exc:
                out.errors.append(f"{fam}[{r}]: {_numeric_error(exc)}")
                continue
            out.rows.extend(report.as_records())
            worst[f"{fam}[{r}]"] = {"max_abs_gap": report.max_abs_gap,
                                   "max_rel_gap": report.max_rel_gap}
    out.summary["worst"] = worst
    return out


def cmd_eval(args) -> Outcome:
    if args.f is None:
        raise ConfigError("eval needs --f")
    f = resolve_function(args.f)
    params = _params(args)
    policy, quad = _policy(args), _quad(args)
    out = Outcome(["operator", "f", "n", "beta", "x", "value", "error_estimate"])
    beta = params.exact if params.is_exact else params.beta
    for x in args.x:
        try:
            if args.operator == "jain":
                value = jain_apply(params, f, x, policy)
                err = jain_tail_bound(params, f, x, policy)
            elif args.operator == "durrmeyer":
                value, err = durrmeyer_apply_with_error(params, f, x, policy, quad)
            else:
                value = auxiliary_apply(params, f, x, policy, quad)
                err = durrmeyer_apply_with_error(params, f, x, policy, quad)[1]
        except _NUMERIC_ERRORS as exc:
            out.errors.append(f"x={x!r}: {_numeric_error(exc)}")
            continue
        out.rows.append({"operator": args.operator, "f": f.name, "n": params.n, "beta": beta,
                         "x": x, "value": value, "error_estimate": err})
    return out


def cmd_voronovskaja(args) -> Outcome:
    if args.f is None:
        raise ConfigError("voronovskaja needs --f")
    f = resolve_function(args.f)
    x = _single(args.x, "--x")
    report = voronovskaja(f, x, float(args.beta), args.n_list or [10, 20, 40, 80, 160, 320],
                          policy=_policy(args), quad=_quad(args))
    out = Outcome(["n", "scaled_error", "gap"])
    for n, s, g in zip(report.n_list, report.scaled_errors, report.gaps):
        out.rows.append({"n": n, "scaled_error": s, "gap": g})
    rel = report.gap / max(1.0, abs(report.formula))
    out.summary = {k: v for k, v in report.to_dict().items()
                   if k not in ("n_list", "scaled_errors", "gaps")}
    out.summary["relative_gap"] = rel
    out.summary["limit_tolerance"] = args.limit_tol
    out.passed = rel <= args.limit_tol
    return out


def cmd_korovkin(args) -> Outcome:
    report = korovkin_check(float(args.beta), parse_interval(args.interval),
                            args.n_list or [10, 20, 50, 100, 200], points=args.points,
                            policy=_policy(args), quad=_quad(args))
    out = Outcome(["n", "e0", "e1", "e2"])
    for i, n in enumerate(report.n_list):
        out.rows.append({"n": n, **{f"e{r}": report.distances[r][i] for r in range(3)}})
    out.summary = {k: v for k, v in report.to_dict().items() if k != "distances"}
    out.passed = report.passed
    return out


def cmd_bound_check(args) -> Outcome:
    if args.f is None:
        raise ConfigError("bound-check needs --f")
    f = resolve_function(args.f)
    a, b = parse_interval(args.interval)
    grid = Grid(a, b, args.grid_step)
    out = Outcome(["n", "beta", "x", "lhs", "omega2_term", "omega_term", "bound"])
    minimal = {}
    passed = True
    for n in args.n:
        params = _params(args, n)
        report = bound_check(f, params, grid, policy=_policy(args), quad=_quad(args))
        for x, lhs, w2 in zip(report.points, report.lhs, report.omega2_term):
            out.rows.append({"n": n, "beta": params.beta, "x": x, "lhs": lhs,
                             "omega2_term": w2, "omega_term": report.omega_term,
                             "bound": args.c * w2 + report.omega_term})
        minimal[str(n)] = report.minimal_c
        if report.inconclusive:
            out.errors.append(f"n={n}: omega_2 term vanishes with residual at x={report.inconclusive}")
        passed = passed and report.holds(args.c) and not report.inconclusive
    out.summary = {"f": f.name, "interval": [a, b], "c": args.c, "minimal_c": minimal}
    out.passed = passed
    return out


def cmd_order_check(args) -> Outcome:
    x = _single(args.x, "--x")
    out = Outcome(["r", "n", "mu", "abs_error_bound"])
    fits = {}
    passed = True
    for r in args.r:
        report = order_check(r, float(args.beta), x, args.n_list or [10, 20, 40, 80, 160],
                             policy=_policy(args))
        for n, mu, err in zip(report.n_list, report.moments, report.error_bounds):
            out.rows.append({"r": r, "n": n, "mu": mu, "abs_error_bound": err})
        fits[str(r)] = {"slope": report.slope, "required_max_slope": report.required,
                        "below_noise": report.below_noise, "passed": report.passed}
        passed = passed and report.passed
    out.summary = {"x": x, "beta": float(args.beta), "fits": fits}
    out.passed = passed
    return out


COMMANDS = {
    "basis": cmd_basis,
    "moments": cmd_moments,
    "paper-check": cmd_closed_form_check,
    "eval": cmd_eval,
    "voronovskaja": cmd_voronovskaja,
    "korovkin": cmd_korovkin,
    "bound-check": cmd_bound_check,
    "order-check": cmd_order_check,
}


# --------------------------------------------------------------------------
# parser and entry point
# --------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", default="10", help="operator index, or a list for sweeps")
    common.add_argument("--beta", default="0", help="decimal or fraction literal p/q")
    common.add_argument("--x", default=None, help="point, list 'a,b,c' or grid 'a:b:count'")
    common.add_argument("--k", default=None, help="basis index, list or range 'a:b'")
    common.add_argument("--r", default=None, help="moment order, list or range 'a:b'")
    common.add_argument("--exact", action="store_true", help="rational arithmetic (needs p/q beta)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", default=None, help="output file (default stdout)")
    common.add_argument("--timing", action="store_true",
                        help="report elapsed time on stderr (never in output files)")
    num = common.add_argument_group("numerics")
    num.add_argument("--rel-tol", type=float, default=1e-12)
    num.add_argument("--abs-tol", type=float, default=1e-12)
    num.add_argument("--max-panels", type=int, default=2000)
    num.add_argument("--mass-tol", type=float, default=1e-12)
    num.add_argument("--hard-cap", type=int, default=1_000_000)

    parser = _Parser(prog="jain-durrmeyer",
                     description="Jain operators, their Durrmeyer variant and moment checks.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("basis", parents=[common], help="basis values and cumulative mass")
    p.add_argument("--k-max", type=int, default=None)

    p = sub.add_parser("moments", parents=[common], help="moment ratios P_r(k)")
    p.add_argument("--method", default="stirling-sum",
                   choices=[m.value for m in MomentMethod])

    p = sub.add_parser("paper-check", parents=[common], help="closed forms against the engine")
    p.add_argument("--family", action="append", choices=sorted(FAMILY_ALIASES),
                   help="closed-form family (repeatable; default all)")

    p = sub.add_parser("eval", parents=[common], help="apply an operator to f over x")
    p.add_argument("--f", default=None, help="builtin name (abs_kink:1.5) or expression in t")
    p.add_argument("--operator", choices=("jain", "durrmeyer", "auxiliary"), default="durrmeyer")

    p = sub.add_parser("voronovskaja", parents=[common], help="limit of n[D_n f - f]")
    p.add_argument("--f", default=None)
    p.add_argument("--n-list", default=None)
    p.add_argument("--limit-tol", type=float, default=0.01,
                   help="relative tolerance on the extrapolated limit")

    p = sub.add_parser("korovkin", parents=[common], help="convergence on e0, e1, e2")
    p.add_argument("--interval", default="0,2")
    p.add_argument("--n-list", default=None)
    p.add_argument("--points", type=int, default=41)

    p = sub.add_parser("bound-check", parents=[common], help="direct estimate with moduli")
    p.add_argument("--f", default=None)
    p.add_argument("--interval", default="0,4")
    p.add_argument("--grid-step", type=float, default=0.05)
    p.add_argument("--c", type=float, default=10.0, help="constant tested in the bound")

    p = sub.add_parser("order-check", parents=[common], help="decay order of central moments")
    p.add_argument("--n-list", default=None)
    return parser


def _normalize(args, argv_text: list[str]):
    args.n_given = any(a == "--n" or a.startswith("--n=") for a in argv_text)
    args.beta_given = any(a == "--beta" or a.startswith("--beta=") for a in argv_text)
    args.beta_text = args.beta
    args.beta = parse_beta(args.beta)
    args.n = parse_int_list(args.n)
    if any(n < 1 for n in args.n):
        raise ConfigError(f"n must be >= 1, got {args.n}")
    if not 0 <= float(args.beta) < 1:
        raise ConfigError(f"beta must lie in [0, 1), got {args.beta_text}")
    if hasattr(args, "n_list") and args.n_list is not None:
        args.n_list = parse_int_list(args.n_list)
    args.k = parse_int_list(args.k) if args.k is not None else None
    args.r = parse_int_list(args.r) if args.r is not None else None
    args.x = parse_x_list(args.x) if args.x is not None else None
    if args.x is not None and any(x < 0 for x in args.x):
        raise ConfigError(f"x must be >= 0, got {args.x}")
    defaults = {
        "basis": {"x": [1.0]},
        "moments": {"k": [2], "r": [1]},
        "eval": {"x": [1.0]},
        "voronovskaja": {"x": [1.0]},
        "order-check": {"x": [1.0], "r": [1, 2, 3, 4]},
    }
    if args.command != "paper-check":
        for key, value in defaults.get(args.command, {}).items():
            if getattr(args, key) is None:
                setattr(args, key, value)


def _config_echo(args) -> dict:
    skip = {"n_given", "beta_given", "beta_text", "timing", "output"}
    config = {}
    for key in sorted(vars(args)):
        if key in skip:
            continue
        config[key] = args.beta_text if key == "beta" else getattr(args, key)
    return config


def _write(text: str, path: Optional[str]):
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        _normalize(args, argv)
        outcome = COMMANDS[args.command](args)
    except (ConfigError, JainDurrmeyerError, ValueError) as exc:
        if isinstance(exc, _NUMERIC_ERRORS):
            sys.stderr.write(f"jain-durrmeyer: numerical failure: {exc}\n")
            outcome = Outcome(["error"], errors=[_numeric_error(exc)])
        else:
            sys.stderr.write(f"jain-durrmeyer: error: {exc}\n")
            return EXIT_CONFIG

    meta = {
        "command": args.command,
        "config": _config_echo(args),
        "versions": {"jain_durrmeyer": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__},
        "partial": bool(outcome.errors),
        "errors": outcome.errors,
        "passed": outcome.passed,
    }
    if args.format == "json":
        _write(render_json({"meta": meta, "summary": outcome.summary, "rows": outcome.rows}),
               args.output)
    else:
        _write(render_csv(outcome.header, outcome.rows), args.output)
        if args.output is not None:
            _write(render_json({"meta": meta, "summary": outcome.summary}),
                   args.output + ".meta.json")
    if args.timing:
        sys.stderr.write(f"elapsed {time.perf_counter() - started:.3f} s\n")
    for message in outcome.errors:
        sys.stderr.write(f"jain-durrmeyer: {message}\n")
    if outcome.errors:
        return EXIT_NUMERIC
    if outcome.passed is False:
        return EXIT_CHECK_FAILED
    return EXIT_OK
