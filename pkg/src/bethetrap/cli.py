"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 domain/solver error, 3 internal error.
"No bound state" is a normal answer for ``solve`` and ``gap`` and exits 0.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import re
import sys
from pathlib import Path

from . import __version__
from .adiabatic import GapUndefinedError, min_culling_time
from .capacity import Axis, BracketError, ThresholdQuery, ionization_threshold, trap_capacity
from .secular import (InvalidQuantumNumbers, QuantumNumbers, SolverSettings, Unbound,
                      solve, solve_tonks_limit)
from .spectrum import NoBoundStateError, energy_gap
from .sweep import (AxisSpec, GridSpec, Quantity, SweepGrid, render_csv, render_json_lines,
                    run_sweep, write_metadata)
from .units import (ConfigError, K_B, config_to_dict, energy_to_nk, joules_to_nk,
                    load_config, to_trap_units)

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


# -- unit literals ------------------------------------------------------------

_ENERGY_UNITS = {"J": 1.0, "K": K_B, "mK": 1e-3 * K_B, "uK": 1e-6 * K_B, "nK": 1e-9 * K_B}
_LENGTH_UNITS = {"m": 1.0, "mm": 1e-3, "um": 1e-6, "nm": 1e-9}
_INVERSE_LENGTH_UNITS = {"/m": 1.0, "/cm": 1e2, "/um": 1e6}
_UNITS = {
    "trap_depth": _ENERGY_UNITS,
    "trap_length": _LENGTH_UNITS,
    "interaction_strength": _INVERSE_LENGTH_UNITS,
}
_LITERAL = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z/]*)\s*$")


def parse_quantity(text: str, axis: str) -> float:
    """Parse ``'25nK'``, ``'5um'``, ``'1.7e6/m'`` or a bare SI number for ``axis``."""
    units = _UNITS[Axis(axis).value]
    match = _LITERAL.match(text)
    if not match:
        raise UsageError(f"cannot parse {axis} value {text!r}")
    number, suffix = float(match.group(1)), match.group(2)
    if not suffix:
        return number
    if suffix not in units:
        raise UsageError(f"unit {suffix!r} not valid for {axis}; use one of {sorted(units)}")
    return number * units[suffix]


def parse_axis(text: str) -> AxisSpec:
    """``name:low:high:count[:lin|log]``."""
    parts = text.split(":")
    if len(parts) not in (4, 5):
        raise UsageError(f"axis spec {text!r} must be name:low:high:count[:lin|log]")
    name = parts[0]
    if name not in _UNITS:
        raise UsageError(f"unknown axis {name!r}; choose from {sorted(_UNITS)}")
    scale = {"lin": "linear", "linear": "linear", "log": "log"}.get(
        parts[4] if len(parts) == 5 else "lin")
    if scale is None:
        raise UsageError(f"axis scale must be lin or log, got {parts[4]!r}")
    try:
        count = int(parts[3])
        return AxisSpec(name, parse_quantity(parts[1], name), parse_quantity(parts[2], name),
                        count, scale)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- output ---------------------------------------------------------------------------

def fmt(value):
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return float(format(value, ".12g"))
    return value


def render(records: list[dict], fmt_name: str) -> str:
    if fmt_name == "json-lines":
        return "".join(json.dumps({k: fmt(v) for k, v in r.items()}) + "\n" for r in records)
    columns: list[str] = []
    for r in records:
        columns += [k for k in r if k not in columns]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in records:
        row = []
        for c in columns:
            v = r.get(c)
            row.append("" if v is None else format(v, ".12g") if isinstance(v, float) else v)
        writer.writerow(row)
    return buf.getvalue()


def manifest_path(out: Path) -> Path:
    return out.with_name(out.name + ".manifest.json")


def write_manifest(out: Path, argv, args, config, settings, extra=None):
    manifest = {
        "command_line": list(argv),
        "config": None if config is None else config_to_dict(config),
        "solver_settings": settings.as_dict(),
        "tool_version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "output": str(out),
    }
    if extra:
        manifest.update(extra)
    manifest_path(out).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                  encoding="utf-8")


# -- commands ---------------------------------------------------------------------

def _config(args):
    if args.config is None:
        raise UsageError("--config is required")
    config, n = load_config(args.config)
    if args.trap_depth is not None:
        config = config.replace(trap_depth=parse_quantity(args.trap_depth, "trap_depth"))
    if args.trap_length is not None:
        config = config.replace(trap_length=parse_quantity(args.trap_length, "trap_length"))
    if getattr(args, "n", None) is not None:
        n = args.n
    return config, n


def _require_n(n):
    if n is None:
        raise UsageError("particle number needed: --n or n_particles in the config")
    return n


def cmd_solve(args, settings):
    config, n = _config(args)
    if args.quantum_numbers:
        numbers = QuantumNumbers.of(int(v) for v in args.quantum_numbers.split(","))
    else:
        numbers = QuantumNumbers.ground(_require_n(n))
    problem = to_trap_units(config, len(numbers))
    outcome = solve(problem, numbers, settings)
    if isinstance(outcome, Unbound):
        return [{"bound": False, "quantum_numbers": str(numbers),
                 "diagnostic": outcome.diagnostic}], config, {}
    records = []
    for j, (I, k, kappa, e) in enumerate(zip(numbers, outcome.k, outcome.kappa,
                                             outcome.e_single), 1):
        records.append({"j": j, "I": I, "k": float(k), "kappa": float(kappa),
                        "e_trap": float(e), "e_nK": float(energy_to_nk(e, config))})
    records.append({"j": "total", "e_trap": outcome.e_total,
                    "e_nK": float(energy_to_nk(outcome.e_total, config))})
    extra = {"c_hat": problem.c_hat, "k0_hat": problem.k0_hat,
             "residual_norm": outcome.residual_norm,
             "continuation_steps": outcome.continuation_steps}
    return records, config, extra


def cmd_gap(args, settings):
    config, n = _config(args)
    problem = to_trap_units(config, _require_n(n))
    try:
        result = energy_gap(problem, settings)
    except NoBoundStateError as exc:
        return [{"n": problem.n_particles, "bound": False, "diagnostic": str(exc)}], config, {}
    record = {"n": problem.n_particles,
              "ground_e_trap": result.ground.e_total,
              "excited_e_trap": None if result.excited is None else result.excited.e_total,
              "gap_trap": result.gap,
              "gap_nK": None if result.gap is None else float(energy_to_nk(result.gap, config))}
    if result.gap is None:
        record["diagnostic"] = result.excited_diagnostic
    return [record], config, {}


def cmd_capacity(args, settings):
    config, _ = _config(args)
    return [{"n_max": args.n_max, "capacity": trap_capacity(config, args.n_max, settings)}], \
        config, {}


def cmd_threshold(args, settings):
    config, n = _config(args)
    parts = args.bracket.split(",")
    if len(parts) != 2:
        raise UsageError("--bracket expects low,high")
    bracket = tuple(parse_quantity(p, args.axis) for p in parts)
    query = ThresholdQuery(config, _require_n(n), Axis(args.axis), bracket)
    result = ionization_threshold(query, args.rel_tol, settings)
    record = {"axis": result.axis.value, "n": result.n, "threshold_si": result.value,
              "unit": result.axis.si_unit, "bound_value_si": result.bound_value,
              "bisection_width_si": result.bisection_width,
              "capacity_below": result.capacity_below, "capacity_above": result.capacity_above}
    if result.axis is Axis.TRAP_DEPTH:
        record["threshold_nK"] = joules_to_nk(result.value)
    return [record], config, {}


def cmd_culling(args, settings):
    config, n = _config(args)
    estimate = min_culling_time(config, _require_n(n), parse_quantity(args.v_start, "trap_depth"),
                                parse_quantity(args.v_end, "trap_depth"), args.samples,
                                args.inset, settings)
    records = [{"V0_nK": v, "gap_nK": g} for v, g in estimate.rows_nk()]
    return records, config, {"t_min_s": estimate.t_min}


def cmd_verify(args, settings):
    from .oracles import FdGridSpec, richardson_two_body_energy
    from .units import TrapUnitsProblem

    # At c_hat = 1e6 the exact roots sit O(N/c_hat) below the Tonks roots; the
    # reference carries the first-order shift -2(N-1) k / (c_hat (1 + 2/kappa)).
    c_hat = 1e6
    records = []
    for n in range(1, 7):
        for k0 in (10.0, 20.0, 50.0):
            numbers = QuantumNumbers.ground(n)
            sol = solve(TrapUnitsProblem(c_hat, k0, n), numbers, settings)
            ref = solve_tonks_limit(numbers, k0)
            if isinstance(sol, Unbound) or isinstance(ref, Unbound):
                err, ok = None, isinstance(sol, Unbound) and isinstance(ref, Unbound)
            else:
                kappa = (k0 * k0 - ref * ref) ** 0.5
                ref = ref - 2.0 * (n - 1) * ref / (c_hat * (1.0 + 2.0 / kappa))
                err = float(max(abs(sol.k / ref - 1.0)))
                ok = err <= 1e-8
            records.append({"check": "tonks_first_order", "case": f"N={n} k0={k0:g}",
                            "error": err, "tolerance": 1e-8, "pass": ok})
    for c in (0.1, 1.0, 10.0, 100.0):
        problem = TrapUnitsProblem(c, 20.0, 2)
        sol = solve(problem, QuantumNumbers.ground(2), settings)
        ref, _, _ = richardson_two_body_energy(problem, FdGridSpec(args.fd_points, 0.75))
        err = abs(sol.e_total - ref) / abs(ref)
        records.append({"check": "fd_two_body", "case": f"c_hat={c:g} k0=20", "error": err,
                        "tolerance": 1e-2, "pass": err <= 1e-2})
    return records, None, {"all_pass": all(r["pass"] for r in records)}


def cmd_sweep(args, settings):
    config, n = _config(args)
    x_axis = parse_axis(args.x)
    y_axis = parse_axis(args.y) if args.y else None
    numbers = None
    if args.quantum_numbers:
        numbers = QuantumNumbers.of(int(v) for v in args.quantum_numbers.split(",")).values
    try:
        spec = GridSpec(x_axis, config, Quantity(args.quantity), y_axis, n, args.n_max, numbers,
                        args.shift_to_bottom, args.energy_unit)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return run_sweep(spec, settings, args.workers), config, {}


# -- parser --------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value trap description")
    common.add_argument("--out", help="output file; a .manifest.json sibling is written")
    common.add_argument("--format", choices=("csv", "json-lines"), default="csv")
    common.add_argument("--tol", type=float, default=1e-10, help="Newton residual tolerance")
    common.add_argument("--steps", type=int, default=40, help="continuation steps")
    common.add_argument("--trap-depth", help="override depth, e.g. 25nK")
    common.add_argument("--trap-length", help="override length, e.g. 5um")

    parser = _Parser(prog="bethetrap", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", parents=[common], help="wave numbers and energies of one state")
    p.add_argument("--quantum-numbers", help="comma separated, e.g. 1,2,3,4")
    p.add_argument("--n", type=int)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("gap", parents=[common], help="ground / first-excited gap")
    p.add_argument("--n", type=int)
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("capacity", parents=[common], help="trap capacity")
    p.add_argument("--n-max", type=int, default=10)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("threshold", parents=[common], help="ionization threshold by bisection")
    p.add_argument("--n", type=int)
    p.add_argument("--axis", choices=[a.value for a in Axis], default="trap_depth")
    p.add_argument("--bracket", required=True, help="low,high with optional unit suffixes")
    p.add_argument("--rel-tol", type=float, default=1e-4)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("sweep", parents=[common], help="1D/2D grid of capacity, energy or gap")
    p.add_argument("--x", required=True, help="name:low:high:count[:lin|log]")
    p.add_argument("--y")
    p.add_argument("--quantity", choices=[q.value for q in Quantity], default="capacity")
    p.add_argument("--n", type=int)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--quantum-numbers")
    p.add_argument("--shift-to-bottom", action="store_true")
    p.add_argument("--energy-unit", choices=("nK", "trap"), default="nK")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("culling-time", parents=[common], help="minimum adiabatic ramp time")
    p.add_argument("--n", type=int)
    p.add_argument("--v-start", required=True, help="start depth, e.g. 20nK")
    p.add_argument("--v-end", required=True, help="end depth, e.g. 12nK")
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--inset", type=float, default=0.01)
    p.set_defaults(func=cmd_culling)

    p = sub.add_parser("verify", parents=[common], help="cross-check against the oracles")
    p.add_argument("--fd-points", type=int, default=120)
    p.set_defaults(func=cmd_verify)
    return parser


def _emit(args, argv, result, config, settings, extra):
    out = Path(args.out) if args.out else None
    if isinstance(result, SweepGrid):
        text = render_json_lines(result) if args.format == "json-lines" else render_csv(result)
        if out is None:
            sys.stdout.write(text)
            return
        out.write_text(text, encoding="utf-8")
        meta = out.with_name(out.name + ".meta.json")
        write_metadata(result, meta)
        write_manifest(out, argv, args, config, settings, {"metadata_file": meta.name})
        return
    text = render(result, args.format)
    if out is None:
        sys.stdout.write(text)
        for key, value in extra.items():
            sys.stdout.write(f"# {key} = {fmt(value)}\n")
    else:
        out.write_text(text, encoding="utf-8")
        write_manifest(out, argv, args, config, settings, {k: fmt(v) for k, v in extra.items()})


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    settings = SolverSettings(tol=args.tol, steps=args.steps)
    try:
        result, config, extra = args.func(args, settings)
        _emit(args, argv, result, config, settings, extra)
    except (UsageError, ConfigError, InvalidQuantumNumbers, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BracketError, NoBoundStateError, GapUndefinedError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    if args.command == "verify" and not extra.get("all_pass", True):
        return EXIT_DOMAIN
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
