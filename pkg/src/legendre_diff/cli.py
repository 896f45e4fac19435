"""Command-line interface.

Exit status is 0 on success, 2 for invalid input or configuration and 3 for
numerical failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import jsonio
from .basis import phi_table
from .errors import NumericalError, ValidationError
from .harness import ExperimentConfig, component_scaling, count_scaling, fit_rate, read_csv, run_experiment, write_atomic
from .noise import parse_p
from .series import LegendreSeries, project
from .truncation import DerivativePlan, apply, coefficient_count

log = logging.getLogger("legendre_diff")

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3

_EXPR_NAMES = {
    name: getattr(np, name)
    for name in (
        "sin", "cos", "tan", "arcsin", "arccos", "arctan", "sinh", "cosh", "tanh",
        "exp", "log", "log1p", "sqrt", "abs", "sign", "pi", "e", "where", "maximum", "minimum",
    )
}


def expression_function(expr: str):
    """Vectorized callable for a numpy expression in the variable ``t``."""
    try:
        code = compile(expr, "<expr>", "eval")
    except SyntaxError as exc:
        raise ValidationError(f"cannot parse expression {expr!r}: {exc.msg}") from None
    unknown = set(code.co_names) - set(_EXPR_NAMES) - {"t"}
    if unknown:
        raise ValidationError(f"unknown names in expression: {sorted(unknown)}")

    def f(t):
        with np.errstate(all="ignore"):
            value = eval(code, {"__builtins__": {}}, {**_EXPR_NAMES, "t": t})
        return np.broadcast_to(np.asarray(value, dtype=float), np.shape(t))

    return f


def fit_samples(t, values, K: int) -> LegendreSeries:
    """Discrete least-squares Legendre fit of degree ``K`` to scattered samples."""
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if t.ndim != 1 or t.shape != values.shape:
        raise ValidationError('samples need equal-length "t" and "f" lists')
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(values))):
        raise ValidationError("samples must be finite")
    if np.any(np.abs(t) > 1):
        raise ValidationError("sample points must lie in [-1, 1]")
    if np.unique(t).size < K + 1:
        raise ValidationError(f"need at least {K + 1} distinct sample points for degree {K}")
    coeffs, *_ = np.linalg.lstsq(phi_table(K, t), values, rcond=None)
    return LegendreSeries(coeffs)


def _read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc.msg})") from None


def _write(path, text: str) -> None:
    try:
        write_atomic(path, text)
    except OSError as exc:
        raise ValidationError(f"cannot write {path}: {exc.strerror}") from None


def cmd_project(args) -> None:
    source = args.input
    if source.endswith(".json") or Path(source).is_file():
        data = _read_json(source)
        if not isinstance(data, dict) or "t" not in data or "f" not in data:
            raise ValidationError('samples file must be {"t": [...], "f": [...]}')
        series = fit_samples(data["t"], data["f"], args.degree)
    else:
        series = project(expression_function(source), args.degree)
    _write(args.out, jsonio.dumps({"coeffs": series.coeffs}))
    log.info("wrote %d coefficients to %s", len(series), args.out)


def cmd_differentiate(args) -> None:
    data = _read_json(args.coeffs)
    if not isinstance(data, dict) or "coeffs" not in data:
        raise ValidationError(f'{args.coeffs}: expected {{"coeffs": [...]}}')
    series = LegendreSeries(data["coeffs"])
    if args.N is not None:
        plan = DerivativePlan(args.r, N=args.N)
    else:
        missing = [n for n in ("delta", "mu", "p", "s") if getattr(args, n) is None]
        if missing:
            raise ValidationError("without --N, need --delta --mu --p --s (missing: "
                                  + ", ".join("--" + m for m in missing) + ")")
        plan = DerivativePlan(args.r, C_N=args.cn).resolve(args.delta, args.mu, args.p, args.s)
    deriv = apply(series, plan)
    out = {"coeffs": deriv.coeffs, "r": plan.r, "N": plan.N, "count": coefficient_count(plan)}
    _write(args.out, jsonio.dumps(out))
    log.info("r=%d N=%d -> %s", plan.r, plan.N, args.out)


def cmd_experiment(args) -> None:
    data = _read_json(args.config)
    if not isinstance(data, dict):
        raise ValidationError("experiment config must be a JSON object")
    data.pop("output", None)
    config = ExperimentConfig.from_dict(data)
    table = run_experiment(config)
    _write(args.out, table.to_csv())
    for q in config.q_list:
        try:
            fit = fit_rate(table, q)
        except ValidationError:
            continue
        log.info("q=%s slope %.4f (theory %.4f, R^2 %.4f)", fit.metric, fit.slope, fit.theoretical, fit.r_squared)


def cmd_rates(args) -> None:
    table = read_csv(args.results)
    config = None
    if args.config:
        data = _read_json(args.config)
        data.pop("output", None)
        config = ExperimentConfig.from_dict(data)
    fit = fit_rate(table, args.q, config)
    out = fit.to_dict()
    if len(table.rows) >= 3:
        out["count_slope"], out["count_r_squared"] = count_scaling(table)
    _write(args.out, jsonio.dumps(out))


def cmd_scaling(args) -> None:
    data = _read_json(args.config)
    data.pop("output", None)
    data.setdefault("delta_list", [args.delta])
    config = ExperimentConfig.from_dict(data)
    fits = component_scaling(config, args.delta, args.N_list)
    _write(args.out, jsonio.dumps(fits.to_dict()))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="legendre-diff",
        description="Stable numerical differentiation by truncated Legendre expansions.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("project", help="Legendre coefficients of a function or of samples")
    p.add_argument("--input", required=True, help='samples JSON {"t": [...], "f": [...]} or an expression in t')
    p.add_argument("--degree", type=int, required=True, help="highest coefficient index K")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("differentiate", help="truncated r-th derivative of a coefficient file")
    p.add_argument("--coeffs", required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--N", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--p", type=parse_p)
    p.add_argument("--s", type=float)
    p.add_argument("--cn", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_differentiate)

    p = sub.add_parser("experiment", help="run a delta sweep and write CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("rates", help="fit the log-log rate of a results CSV")
    p.add_argument("--results", required=True)
    p.add_argument("--q", type=parse_p, required=True)
    p.add_argument("--config", help="experiment config, for the predicted exponent")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("scaling", help="fit error components against N at fixed delta")
    p.add_argument("--config", required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--N-list", type=int, nargs="+", required=True, dest="N_list")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_scaling)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
