"""Command-line surface: validate, bound, sweep, verify, example.

Data goes to stdout (or the requested output file), diagnostics to stderr.
Exit codes are stable: 0 success, 1 malformed input, 2 physically invalid
input, 3 verification gap, 64 usage error, 74 I/O error.  Sweeps write a CSV
(values always in bits) and render a PNG figure beside it unless --no-plot.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .entropy import Units
from .errors import GmurError, InputError
from .mur import Thresholds, c_inc_scalar, c_inc_vector
from .observables import noisy_position_then_momentum, observable_from_json, observable_to_json
from .states import PhysContext, ValidationFailure, state_from_json
from .verify import (verify_entropy_mc, verify_scalar_divergence,
                     verify_scalar_minimax, verify_scalar_state_bound,
                     verify_vector_minimax)

EX_OK = 0
EX_MALFORMED = 1
EX_INVALID = 2
EX_VERIFY_FAIL = 3
EX_USAGE = 64
EX_IO = 74


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage problems with exit code 64."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def directions_from_alpha(alpha: float) -> tuple[np.ndarray, np.ndarray, int]:
    """Canonical unit directions spanning the angle alpha.

    Parallel/antiparallel angles embed in n = 1; anything else uses the
    plane n = 2 with u on the first axis.
    """
    c = math.cos(alpha)
    if abs(abs(c) - 1.0) <= 1e-12:
        return np.array([1.0]), np.array([math.copysign(1.0, c)]), 1
    return np.array([1.0, 0.0]), np.array([c, math.sin(alpha)]), 2


def _scalar_bound(alpha: float, eps: Thresholds, hbar: float, units):
    u, v, n = directions_from_alpha(alpha)
    return c_inc_scalar(u, v, eps, PhysContext(hbar=hbar, n=n), units)


def cmd_validate(args) -> int:
    try:
        with open(args.input, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        print(f"cannot read {args.input}: {exc}", file=sys.stderr)
        return EX_IO
    except json.JSONDecodeError as exc:
        print(f"malformed JSON: {exc}", file=sys.stderr)
        return EX_MALFORMED
    if not isinstance(data, dict):
        print("malformed input: expected a JSON object", file=sys.stderr)
        return EX_MALFORMED

    try:
        if {"A", "B"} <= data.keys():
            kind = "state"
            result = state_from_json(data)
        elif {"mu", "V", "J"} <= data.keys() or {"u", "v", "V11", "V22"} <= data.keys():
            kind = "observable"
            result = observable_from_json(data)
        else:
            print("malformed input: not a state or observable schema", file=sys.stderr)
            return EX_MALFORMED
    except InputError as exc:
        print(f"malformed input: {exc}", file=sys.stderr)
        return EX_MALFORMED

    if isinstance(result, ValidationFailure):
        print(json.dumps({
            "kind": kind, "valid": False,
            "min_eigenvalue": result.min_eigenvalue,
            "tolerance": result.tolerance,
            "failed": list(result.failed),
        }, indent=2))
        return EX_INVALID
    print(json.dumps({"kind": kind, "valid": True}, indent=2))
    return EX_OK


def cmd_bound(args, parser) -> int:
    eps = _thresholds_or_usage(args, parser)
    units = Units(args.units)
    if args.kind == "scalar":
        if args.alpha is None:
            parser.error("bound scalar requires --alpha")
        report = _scalar_bound(args.alpha, eps, args.hbar, units)
    else:
        if args.n is None:
            parser.error("bound vector requires --n")
        report = c_inc_vector(args.n, eps, PhysContext(hbar=args.hbar, n=args.n), units)
    print(json.dumps(report.to_json(), indent=2))
    return EX_OK


def _thresholds_or_usage(args, parser) -> Thresholds:
    if args.eps1 is None or args.eps2 is None:
        parser.error("--eps1 and --eps2 are required")
    if args.eps1 <= 0 or args.eps2 <= 0 or args.hbar <= 0:
        parser.error("--eps1, --eps2 and --hbar must be positive")
    return Thresholds(eps1=args.eps1, eps2=args.eps2)


def _sweep_grid(args, parser) -> list[float]:
    if args.values:
        try:
            grid = [float(x) for x in args.values.split(",") if x.strip()]
        except ValueError:
            parser.error(f"cannot parse --values {args.values!r}")
        if not grid:
            parser.error("--values is empty")
        return grid
    if args.start is None or args.stop is None:
        parser.error("sweep requires either --values or --start/--stop/--count")
    if args.count < 1:
        parser.error("--count must be at least 1")
    if args.spacing == "log":
        if args.start <= 0 or args.stop <= 0:
            parser.error("log spacing requires positive endpoints")
        return list(np.geomspace(args.start, args.stop, args.count))
    return list(np.linspace(args.start, args.stop, args.count))


def cmd_sweep(args, parser) -> int:
    grid = _sweep_grid(args, parser)
    variable = args.variable
    if variable == "n":
        if any(abs(x - round(x)) > 1e-9 or x < 1 for x in grid):
            parser.error("--variable n requires positive integer grid values")
        grid = [int(round(x)) for x in grid]
    kind = args.kind
    if kind is None:
        kind = "scalar" if (variable == "alpha" or args.alpha is not None) else "vector"
    has_eps = args.eps1 is not None and args.eps2 is not None
    base_eps = Thresholds(args.eps1, args.eps2) if has_eps else None

    def evaluate(value):
        hbar, alpha, n = args.hbar, args.alpha, args.n
        eps = base_eps
        if variable == "alpha":
            alpha = value
        elif variable == "hbar":
            hbar = value
        elif variable == "n":
            n = value
        elif variable in ("eps_product", "eps_ratio"):
            if eps is None:
                raise InputError("eps_product/eps_ratio sweeps need --eps1/--eps2 for "
                                 "the fixed ratio or product")
            ratio = eps.eps1 / eps.eps2
            product = eps.product()
            if variable == "eps_product":
                product = value
            else:
                ratio = value
            eps = Thresholds(math.sqrt(product * ratio), math.sqrt(product / ratio))
        if eps is None:
            raise InputError("sweep needs --eps1/--eps2")
        if kind == "scalar":
            report = _scalar_bound(0.0 if alpha is None else alpha, eps, hbar, Units.BITS)
        else:
            report = c_inc_vector(1 if n is None else n, eps,
                                  PhysContext(hbar=hbar, n=1 if n is None else n),
                                  Units.BITS)
        return {"value": value, "value_bits": report.value,
                "regime": report.regime, "is_exact": report.is_exact}

    try:
        with ThreadPoolExecutor(max_workers=min(8, len(grid))) as pool:
            rows = list(pool.map(evaluate, grid))
    except (InputError, GmurError) as exc:
        parser.error(str(exc))

    out_path = Path(args.out)
    try:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["variable", "value_bits", "regime", "is_exact"])
            for row in rows:
                writer.writerow([row["value"], repr(row["value_bits"]),
                                 row["regime"], str(row["is_exact"]).lower()])
    except OSError as exc:
        print(f"cannot write {out_path}: {exc}", file=sys.stderr)
        return EX_IO
    print(f"wrote {len(rows)} rows to {out_path}", file=sys.stderr)

    if not args.no_plot:
        from .plots import render_sweep_figure
        fig_path = out_path.with_suffix(".png")
        try:
            render_sweep_figure(rows, variable, str(fig_path),
                                log_x=(args.spacing == "log"))
        except OSError as exc:
            print(f"cannot write {fig_path}: {exc}", file=sys.stderr)
            return EX_IO
        print(f"wrote figure to {fig_path}", file=sys.stderr)
    return EX_OK


def _verify_records(suite: str, seed: int, budget: int) -> list:
    records = []
    if suite in ("all", "scalar"):
        ctx = PhysContext(hbar=1.0, n=1)
        from .states import make_state_from_blocks
        rho_min = make_state_from_blocks([[0.5]], [[0.5]], ctx)
        rho_mixed = make_state_from_blocks([[0.8]], [[1.1]], ctx)
        eps = Thresholds(0.5, 0.5)
        records.append(verify_scalar_state_bound(rho_min, [1.0], [1.0],
                                                 budget=budget, seed=seed))
        records.append(verify_scalar_state_bound(rho_mixed, [1.0], [1.0],
                                                 budget=budget, seed=seed + 1))
        m_ref = noisy_position_then_momentum(0.5, [1.0], [1.0], ctx)
        records.append(verify_scalar_divergence(m_ref, eps, budget=budget, seed=seed + 2))
        records.append(verify_scalar_minimax([1.0], [1.0], eps, ctx,
                                             budget=budget, seed=seed + 3))
    if suite in ("all", "vector"):
        eps = Thresholds(0.5, 0.5)
        for n in (1, 2):
            records.append(verify_vector_minimax(n, eps, PhysContext(hbar=1.0, n=n),
                                                 budget=max(budget, 20000),
                                                 seed=seed + 10 + n))
    if suite in ("all", "entropy"):
        records.append(verify_entropy_mc(trials=100, n_samples=100000, seed=seed))
    return records


def cmd_verify(args) -> int:
    records = _verify_records(args.suite, args.seed, args.budget)
    lines = [json.dumps(record.to_json()) for record in records]
    text = "\n".join(lines) + "\n"
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"cannot write {args.out}: {exc}", file=sys.stderr)
            return EX_IO
    else:
        sys.stdout.write(text)
    bad = [record for record in records if not record.ok]
    if bad:
        print(f"verification failed for: {bad[0].to_json()}", file=sys.stderr)
        return EX_VERIFY_FAIL
    return EX_OK


def cmd_example(args) -> int:
    out = {}
    if args.kind in ("delta", "both"):
        u, v, n = directions_from_alpha(args.alpha)
        ctx = PhysContext(hbar=args.hbar, n=n)
        M = noisy_position_then_momentum(args.delta, u, v, ctx)
        out["noisy_position_then_momentum"] = observable_to_json(M)
    if args.kind in ("pvm", "both"):
        ctx = PhysContext(hbar=args.hbar, n=2)
        from .observables import ScalarCovariantObservable
        pvm = ScalarCovariantObservable(ctx=ctx, u=[1.0, 0.0], v=[0.0, 1.0])
        out["orthogonal_pvm"] = observable_to_json(pvm)
    print(json.dumps(out, indent=2))
    return EX_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="gmur",
                     description="Entropic uncertainty bounds for Gaussian "
                                 "position/momentum measurements")
    sub = parser.add_subparsers(dest="command", required=True)

    p_val = sub.add_parser("validate", help="validate a state or observable JSON file")
    p_val.add_argument("input", help="path to the JSON file")

    p_bound = sub.add_parser("bound", help="compute an incompatibility bound")
    p_bound.add_argument("kind", choices=["scalar", "vector"])
    p_bound.add_argument("--hbar", type=float, default=1.0)
    p_bound.add_argument("--eps1", type=float, help="position variance threshold")
    p_bound.add_argument("--eps2", type=float, help="momentum variance threshold")
    p_bound.add_argument("--alpha", type=float, help="angle between directions [rad]")
    p_bound.add_argument("--n", type=int, help="degrees of freedom (vector case)")
    p_bound.add_argument("--units", choices=["bits", "nats"], default="bits")

    p_sweep = sub.add_parser("sweep", help="sweep a parameter and write CSV (+ PNG)")
    p_sweep.add_argument("--variable", required=True,
                         choices=["alpha", "eps_product", "eps_ratio", "hbar", "n"])
    p_sweep.add_argument("--start", type=float)
    p_sweep.add_argument("--stop", type=float)
    p_sweep.add_argument("--count", type=int, default=50)
    p_sweep.add_argument("--spacing", choices=["linear", "log"], default="linear")
    p_sweep.add_argument("--values", help="explicit comma-separated grid")
    p_sweep.add_argument("--kind", choices=["scalar", "vector"])
    p_sweep.add_argument("--hbar", type=float, default=1.0)
    p_sweep.add_argument("--eps1", type=float)
    p_sweep.add_argument("--eps2", type=float)
    p_sweep.add_argument("--alpha", type=float)
    p_sweep.add_argument("--n", type=int)
    p_sweep.add_argument("--out", required=True, help="CSV output path")
    p_sweep.add_argument("--no-plot", action="store_true",
                         help="skip the PNG figure next to the CSV")

    p_ver = sub.add_parser("verify", help="run the numerical verification suite")
    p_ver.add_argument("--suite", choices=["all", "scalar", "vector", "entropy"],
                       default="all")
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--budget", type=int, default=20000)
    p_ver.add_argument("--out", help="JSONL output path (default stdout)")

    p_ex = sub.add_parser("example", help="print the worked example observables as JSON")
    p_ex.add_argument("--kind", choices=["delta", "pvm", "both"], default="both")
    p_ex.add_argument("--hbar", type=float, default=1.0)
    p_ex.add_argument("--alpha", type=float, default=math.pi / 3)
    p_ex.add_argument("--delta", type=float, default=0.5)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            return cmd_validate(args)
        if args.command == "bound":
            return cmd_bound(args, parser)
        if args.command == "sweep":
            return cmd_sweep(args, parser)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "example":
            return cmd_example(args)
    except BrokenPipeError:
        return EX_IO
    parser.error(f"unknown command {args.command!r}")
    return EX_USAGE


if __name__ == "__main__":
    sys.exit(main())
