"""Command-line front end.

Subcommands parse flags, call one library routine per number, and write a
CSV or JSON table. Angles are given in degrees. Exit codes: 0 on success,
2 on usage or domain errors, 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Sequence

from . import reports
from .errors import ClockforgeError, DomainError
from .protocol import format_real
from .schur_stats import ClockParams
from .solver import FAMILIES, resolve_jobs

SCHEMA_VERSION = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _int_list(text: str) -> list[int]:
    """Comma list with optional ``start:stop:step`` ranges (stop inclusive)."""
    values: list[int] = []
    for part in text.split(","):
        if ":" in part:
            fields = [int(v) for v in part.split(":")]
            start, stop = fields[0], fields[1]
            step = fields[2] if len(fields) > 2 else 1
            values.extend(range(start, stop + 1, step))
        else:
            values.append(int(part))
    return values


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",")]


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return format_real(value)
    return str(value)


def _json_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return json.dumps(_cell(value)) if not math.isfinite(value) else format_real(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_json_value(v) for v in value) + "]"
    return json.dumps(value)


def render(command: str, rows: list[dict], fmt: str) -> str:
    """Serialise rows with a schema field, fixed key order and 17-digit reals."""
    if fmt == "json":
        body = ",\n".join(
            "    {" + ", ".join(f"{json.dumps(k)}: {_json_value(v)}" for k, v in row.items()) + "}"
            for row in rows
        )
        return f'{{\n  "schema": {SCHEMA_VERSION},\n  "command": {json.dumps(command)},\n  "rows": [\n{body}\n  ]\n}}\n'
    if not rows:
        return "schema\n"
    header = ["schema", *rows[0].keys()]
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join([str(SCHEMA_VERSION), *(_cell(v) for v in row.values())]))
    return "\n".join(lines) + "\n"


def _params(args, N: int | None = None) -> ClockParams:
    if args.lam is None:
        raise _UsageError("--lambda is required")
    N = N if N is not None else (args.n or args.nc)
    if N is None:
        raise _UsageError("--n or --nc is required")
    return ClockParams(N, args.lam, math.radians(args.theta_in), math.radians(args.theta_out))


def _require_nc(args) -> int:
    if args.nc is None:
        raise _UsageError("--nc is required")
    return args.nc


def cmd_solve(args) -> list[dict]:
    n_c = _require_nc(args)
    family = "exact-odd" if args.exact_odd else (args.family or "exact")
    summary = reports.solve_summary(family, n_c, _params(args, n_c), args.tol)
    head = {k: v for k, v in summary.as_dict().items() if k != "s"}
    return [{**head, "w": w, "s_w": s} for w, s in enumerate(summary.s)]


def cmd_sweep(args) -> list[dict]:
    Ns = _int_list(args.n_list) if args.n_list else ([args.n] if args.n else None)
    lams = _float_list(args.lambda_list) if args.lambda_list else ([args.lam] if args.lam else None)
    if not Ns or not lams:
        raise _UsageError("sweep needs --n (or --n-list) and --lambda (or --lambda-list)")
    families = args.families.split(",") if args.families else [args.family or "exact"]
    for f in families:
        if f not in FAMILIES:
            raise _UsageError(f"unknown family {f!r}")
    return reports.sweep_rows(
        families, Ns, lams, math.radians(args.theta_in), math.radians(args.theta_out),
        args.tol, resolve_jobs(args.jobs),
    )


def cmd_compare(args) -> list[dict]:
    if args.families is None:
        args.families = "exact,order1,order2,discard" + (
            ",order3eq,eb" if args.theta_in == 90 and args.theta_out == 90 else ""
        )
    return cmd_sweep(args)


def cmd_moments(args) -> list[dict]:
    if args.nc is not None:
        return [reports.centered_moment_row(args.nc, _params(args, args.nc), args.alpha, args.p)]
    return reports.schur_moment_rows(_params(args))


def cmd_schur(args) -> list[dict]:
    if args.n is None:
        raise _UsageError("--n is required")
    return reports.schur_rows(_params(args))


def cmd_bounds(args) -> list[dict]:
    if args.lam is None:
        raise _UsageError("--lambda is required")
    N = args.n or args.nc or 1
    return reports.bounds_rows(_params(args, N))


def cmd_perturb(args) -> list[dict]:
    n_c = _require_nc(args)
    if args.lam is None:
        raise _UsageError("--lambda is required")
    return reports.perturb_rows(n_c, args.lam, args.tol)


COMMANDS = {
    "solve": (cmd_solve, "optimal (or family) protocol for one Schur outcome"),
    "sweep": (cmd_sweep, "Schur-averaged infidelity over an (N, lambda) grid"),
    "compare": (cmd_compare, "all applicable families at one (N, lambda) point"),
    "moments": (cmd_moments, "exact moments against their series"),
    "schur": (cmd_schur, "Schur-sampling outcome distribution"),
    "bounds": (cmd_bounds, "purity-of-coherence resources and infidelity bounds"),
    "perturb": (cmd_perturb, "perturbative protocol against the exact optimum"),
}


def build_parser() -> argparse.ArgumentParser:
    shared = _Parser(add_help=False)
    shared.add_argument("--n", type=int, help="number of input copies N")
    shared.add_argument("--nc", type=int, help="Schur outcome N_C (qubits kept)")
    shared.add_argument("--lambda", dest="lam", type=float, help="purity parameter in (0, 1]")
    shared.add_argument("--theta-in", type=float, default=90.0, help="input polar angle in degrees")
    shared.add_argument("--theta-out", type=float, default=90.0, help="target polar angle in degrees")
    shared.add_argument("--family", choices=FAMILIES, help="protocol family")
    shared.add_argument("--tol", type=float, default=1e-12, help="solver tolerance")
    shared.add_argument("--format", choices=("csv", "json"), default="csv")
    shared.add_argument("--out", help="output path (default: stdout)")
    shared.add_argument("--jobs", type=int, help="worker processes (default: $CLOCKFORGE_JOBS or CPU count)")

    parser = _Parser(prog="clockforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[shared], help=help_text, description=help_text)
        if name == "solve":
            p.add_argument("--exact-odd", action="store_true", help="use the odd-N_C closed form")
        if name in ("sweep", "compare"):
            p.add_argument("--n-list", help="comma list or start:stop:step of N values")
            p.add_argument("--lambda-list", help="comma list of lambda values")
            p.add_argument("--families", help="comma list of families")
        if name == "moments":
            p.add_argument("--alpha", type=int, choices=(0, 1), default=0, help="band row (0 diagonal, 1 off-diagonal)")
            p.add_argument("--p", type=int, default=2, help="moment order")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    func = COMMANDS[args.command][0]
    try:
        if args.tol <= 0:
            raise _UsageError("--tol must be positive")
        rows = func(args)
    except (_UsageError, DomainError) as exc:
        sys.stderr.write(f"clockforge {args.command}: {exc}\n")
        return EXIT_USAGE
    except (ClockforgeError, ArithmeticError, FloatingPointError, RuntimeError) as exc:
        sys.stderr.write(f"clockforge {args.command}: numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    text = render(args.command, rows, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
