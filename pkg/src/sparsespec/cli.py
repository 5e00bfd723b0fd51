"""Command-line front end.

Subcommands: ``validate``, ``certify``, ``scan``, ``shoot`` and ``oracle``.
Exit status: 0 success or positive verdict, 1 negative or inconclusive
verdict, 2 failed precondition or structure, 3 unreadable input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .bounds import DIVERGING, certify_zero_energy
from .potential import (Bump, InsufficientData, PotentialError, PotentialFormatError,
                        SparsePotential, example_potential, load_potential,
                        single_bump_potential, validate)
from .spectral import (dense_spectrum, shoot_negative_eigenvalue, sign_change_brackets,
                       theta_scan)
from .transfer import bump_closed_form, bump_propagator

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_PRECONDITION = 2
EXIT_PARSE = 3

BUILTINS = ("example", "free", "single-bump")
DEFAULT_N = {"validate": 8, "certify": 10, "scan": 10, "shoot": 2}
ORACLE_HALF_WIDTHS = (0.25, 0.5, 1.0, 2.0)


class CliError(Exception):
    def __init__(self, message: str, status: int):
        super().__init__(message)
        self.status = status


@dataclass
class RunConfig:
    command: str
    potential: str = "example"
    n_max: Optional[int] = None
    steps: Optional[int] = None
    grid_points: Optional[int] = None
    energies: list = field(default_factory=list)
    thetas: list = field(default_factory=list)
    lambdas: list = field(default_factory=list)
    seed: int = 42
    n_random: int = 100
    window: int = 4
    margin: float = 0.0
    compare_oracle: bool = False
    out: Optional[str] = None
    fmt: str = "csv"


def float_range(lo, hi, step, name: str) -> list:
    """Inclusive grid ``lo, lo + step, ...`` up to ``hi``; empty when ``lo > hi``."""
    if step is None or step <= 0:
        raise CliError(f"--{name}-step must be positive", EXIT_PRECONDITION)
    if lo > hi:
        return []
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + i * step, 12) for i in range(count)]


def _grid_from(args, name: str, default):
    lo, hi, step = (getattr(args, f"{name}_{k}") for k in ("min", "max", "step"))
    if lo is None and hi is None and step is None:
        return list(default), False
    if lo is None or hi is None:
        raise CliError(f"--{name}-min and --{name}-max go together", EXIT_PRECONDITION)
    return float_range(lo, hi, step if step is not None else 1.0, name), True


def resolve_potential(name: str, command: str, n: Optional[int]) -> SparsePotential:
    if name == "example":
        count = n if n is not None else DEFAULT_N.get(command, 8)
        if command == "certify":
            count += 1  # the sequence at n looks at the gap after bump n
        try:
            return example_potential(count)
        except ValueError as exc:
            raise CliError(str(exc), EXIT_PRECONDITION) from exc
    if name == "free":
        return SparsePotential((), "free")
    if name == "single-bump":
        return single_bump_potential()
    try:
        p = load_potential(name)
    except OSError as exc:
        raise CliError(f"cannot read {name}: {exc.strerror}", EXIT_PRECONDITION) from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"{name}: line {exc.lineno} column {exc.colno}: {exc.msg}",
                       EXIT_PARSE) from exc
    except PotentialFormatError as exc:
        raise CliError(f"{name}: {exc}", EXIT_PARSE) from exc
    except PotentialError as exc:
        raise CliError(f"{name}: {exc}", EXIT_PRECONDITION) from exc
    if n is not None and command != "certify":
        if n > len(p):
            raise CliError(f"--n {n} exceeds the {len(p)} bumps in {name}", EXIT_PRECONDITION)
        p = p.truncated(n)
    return p


# ---------------------------------------------------------------------------
# output helpers

def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def render(header: dict, columns: list, rows: list, fmt: str, extra: Optional[dict] = None) -> str:
    if fmt == "json":
        doc = dict(header)
        if extra:
            doc.update(extra)
        doc["rows"] = [dict(zip(columns, r)) for r in rows]
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    for k, v in header.items():
        buf.write(f"# {k}={_fmt(v)}\n")
    for k, v in (extra or {}).items():
        buf.write(f"# {k}={json.dumps(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def emit(text: str, cfg: RunConfig) -> None:
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands

def cmd_validate(cfg: RunConfig) -> int:
    p = resolve_potential(cfg.potential, "validate", cfg.n_max)
    try:
        report = validate(p)
    except InsufficientData as exc:
        raise CliError(str(exc), EXIT_PRECONDITION) from exc
    for line in report.lines():
        print(line)
    if cfg.out:
        rows = [(c.name, c.passed, c.index, c.message) for c in report.conditions]
        emit(render({"potential": p.name, "passed": report.passed},
                    ["condition", "passed", "index", "message"], rows, cfg.fmt), cfg)
    if report.passed:
        return EXIT_OK
    return EXIT_PRECONDITION if not report.structural_ok else EXIT_NEGATIVE


def cmd_certify(cfg: RunConfig) -> int:
    n = cfg.n_max if cfg.n_max is not None else DEFAULT_N["certify"]
    if n < 5:
        raise CliError("certify needs --n of at least 5", EXIT_PRECONDITION)
    p = resolve_potential(cfg.potential, "certify", n)
    try:
        report = certify_zero_energy(p, n, window=cfg.window, margin=cfg.margin)
    except (InsufficientData, PotentialError) as exc:
        raise CliError(str(exc), EXIT_PRECONDITION) from exc
    emit(report.to_json() + "\n" if cfg.fmt == "json" else report.to_csv(), cfg)
    print(f"verdict: {report.verdict}", file=sys.stderr)
    return EXIT_OK if report.verdict == DIVERGING else EXIT_NEGATIVE


def cmd_scan(cfg: RunConfig) -> int:
    if not cfg.thetas and not cfg.lambdas:
        raise CliError("scan grid is empty", EXIT_PRECONDITION)
    p = resolve_potential(cfg.potential, "scan", cfg.n_max)
    kw = {} if cfg.grid_points is None else {"grid_points": cfg.grid_points}
    try:
        rows = theta_scan(p, cfg.thetas, cfg.lambdas, n_random=cfg.n_random, seed=cfg.seed, **kw)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_PRECONDITION) from exc
    brackets = sign_change_brackets(rows)
    header = {"potential": p.name, "seed": cfg.seed, "n_random": cfg.n_random}
    table = [(r.kind, r.value, r.theta, r.form_value, r.verdict) for r in rows]
    emit(render(header, ["kind", "value", "theta", "form_value", "verdict"], table, cfg.fmt,
                {"sign_changes": [list(b) for b in brackets]}), cfg)
    return EXIT_OK


def cmd_shoot(cfg: RunConfig) -> int:
    if not cfg.energies:
        raise CliError("energy grid is empty", EXIT_PRECONDITION)
    bad = [e for e in cfg.energies if not e < 0.0]
    if bad:
        raise CliError(f"shooting needs negative energies, got {bad[0]!r}", EXIT_PRECONDITION)
    p = resolve_potential(cfg.potential, "shoot", cfg.n_max)
    columns = ["energy", "theta", "residual"]
    if cfg.compare_oracle:
        columns += ["oracle_eigenvalue", "oracle_delta", "oracle_negative_count"]
    rows = []
    for e in cfg.energies:
        try:
            res = shoot_negative_eigenvalue(p, e, steps=cfg.steps)
        except (PotentialError, OverflowError) as exc:
            raise CliError(str(exc), EXIT_PRECONDITION) from exc
        row = [e, res.theta, res.residual]
        if cfg.compare_oracle:
            kw = {} if cfg.grid_points is None else {"grid": cfg.grid_points}
            try:
                ds = dense_spectrum(p, res.theta, energy_hint=e, **kw)
            except OverflowError as exc:
                raise CliError(str(exc), EXIT_PRECONDITION) from exc
            near = ds.nearest(e)
            row += [near, abs(near - e), ds.n_negative]
        rows.append(row)
    emit(render({"potential": p.name}, columns, rows, cfg.fmt), cfg)
    return EXIT_OK


def oracle_grid(q_min=-100.0, q_max=100.0, q_step=10.0) -> list:
    qs = float_range(q_min, q_max, q_step, "energy")
    return [(q, a) for q in qs for a in ORACLE_HALF_WIDTHS]


def oracle_deviation(q: float, half_width: float, steps: int) -> float:
    """Max entry deviation between RK4 and the closed form for a constant bump
    with ``h - E = q``, relative to ``max(1, max |entry|)``."""
    h, e = (q, 0.0) if q >= 0 else (0.0, -q)
    b = Bump(1.0 + half_width, half_width, h)
    rk = bump_propagator(b, e, steps, method="rk4").to_array()
    exact = bump_closed_form(b, e).to_array()
    return float(np.max(np.abs(rk - exact)) / max(1.0, float(np.max(np.abs(exact)))))


def cmd_oracle(cfg: RunConfig) -> int:
    steps = cfg.steps or 16384
    if steps < 32:
        raise CliError("oracle needs --steps of at least 32", EXIT_PRECONDITION)
    grid = oracle_grid()
    rows = []
    worst, worst_half = 0.0, 0.0
    for q, a in grid:
        d = oracle_deviation(q, a, steps)
        d_half = oracle_deviation(q, a, steps // 2)
        worst, worst_half = max(worst, d), max(worst_half, d_half)
        rows.append((q, a, d, d_half))
    order = math.log2(worst_half / worst) if worst > 0 else math.inf
    header = {"steps": steps, "max_deviation": worst, "max_deviation_half_steps": worst_half,
              "richardson_order": order}
    emit(render(header, ["h_minus_E", "half_width", "deviation", "deviation_half_steps"],
                rows, cfg.fmt), cfg)
    return EXIT_OK if worst <= 1e-10 else EXIT_NEGATIVE


COMMANDS = {
    "validate": cmd_validate,
    "certify": cmd_certify,
    "scan": cmd_scan,
    "shoot": cmd_shoot,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--potential", default="example",
                        help="JSON file, or one of: " + ", ".join(BUILTINS))
    common.add_argument("--n", type=int, default=None, help="number of bumps / n_max")
    common.add_argument("--steps", type=int, default=None, help="RK4 steps per bump")
    common.add_argument("--grid", type=int, default=None, help="grid points")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    for name in ("energy", "theta", "lambda"):
        for k in ("min", "max", "step"):
            common.add_argument(f"--{name}-{k}", type=float, default=None)

    parser = argparse.ArgumentParser(prog="sparsespec", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check the sparse-potential conditions")
    c = sub.add_parser("certify", parents=[common], help="zero-energy divergence certificate")
    c.add_argument("--window", type=int, default=4)
    c.add_argument("--margin", type=float, default=0.0)
    s = sub.add_parser("scan", parents=[common], help="quadratic-form scan over angles and f_lambda")
    s.add_argument("--random", type=int, default=100, help="random test functions per angle")
    sh = sub.add_parser("shoot", parents=[common], help="boundary angle for negative energies")
    sh.add_argument("--compare-oracle", action="store_true",
                    help="add the dense finite-difference eigenvalue nearest to E")
    sub.add_parser("oracle", parents=[common], help="RK4 against closed-form bump propagators")
    return parser


def config_from_args(args) -> RunConfig:
    cfg = RunConfig(command=args.command, potential=args.potential, n_max=args.n,
                    steps=args.steps, grid_points=args.grid, seed=args.seed,
                    out=args.out, fmt=args.format)
    if args.command == "certify":
        cfg.window, cfg.margin = args.window, args.margin
    elif args.command == "scan":
        cfg.n_random = args.random
        cfg.thetas, explicit_t = _grid_from(args, "theta", (0.0, math.pi / 4, math.pi / 2))
        cfg.lambdas, explicit_l = _grid_from(args, "lambda", ())
        if (explicit_t and not cfg.thetas) or (explicit_l and not cfg.lambdas):
            raise CliError("scan grid is empty", EXIT_PRECONDITION)
        if explicit_l and not explicit_t:
            cfg.thetas = []
    elif args.command == "shoot":
        cfg.compare_oracle = args.compare_oracle
        cfg.energies, explicit = _grid_from(args, "energy", (-1.0,))
        if explicit and not cfg.energies:
            raise CliError("energy grid is empty", EXIT_PRECONDITION)
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        return COMMANDS[cfg.command](cfg)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.status


if __name__ == "__main__":
    sys.exit(main())
