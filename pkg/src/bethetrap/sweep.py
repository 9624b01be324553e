"""Capacity, energy and gap maps over 1D/2D parameter grids.

Every cell is solved from scratch (no warm start from neighbours), so a grid
is identical whatever the evaluation order or the number of workers.
"""

from __future__ import annotations

import csv
import enum
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .capacity import Axis, trap_capacity, with_axis_value
from .secular import DEFAULT_SETTINGS, QuantumNumbers, SolverSettings, Unbound, solve
from .spectrum import NoBoundStateError, energy_gap
from .units import PhysicalTrapConfig, config_to_dict, energy_to_nk, to_trap_units


class Quantity(str, enum.Enum):
    CAPACITY = "capacity"
    E_TOTAL = "e_total"
    E_SINGLE_MAX = "e_single_max"
    GAP = "gap"


@dataclass(frozen=True)
class AxisSpec:
    name: Axis
    low: float
    high: float
    count: int
    scale: str = "linear"   # "linear" | "log"

    def __post_init__(self):
        object.__setattr__(self, "name", Axis(self.name))
        if self.count < 1:
            raise ValueError("axis count must be >= 1")
        if self.count >= 2 and not self.low < self.high:
            raise ValueError(f"axis {self.name.value}: need low < high")
        if self.scale not in ("linear", "log"):
            raise ValueError(f"unknown axis scale {self.scale!r}")
        if self.scale == "log" and self.low <= 0:
            raise ValueError("log axis needs low > 0")

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.low])
        if self.scale == "log":
            return np.geomspace(self.low, self.high, self.count)
        return np.linspace(self.low, self.high, self.count)

    def as_dict(self) -> dict:
        return {"name": self.name.value, "low": self.low, "high": self.high,
                "count": self.count, "scale": self.scale}


@dataclass(frozen=True)
class GridSpec:
    x_axis: AxisSpec
    fixed: PhysicalTrapConfig
    quantity: Quantity
    y_axis: AxisSpec | None = None
    n_particles: int | None = None        # required for energies and gaps
    n_max: int = 10                       # capacity ceiling
    quantum_numbers: tuple[int, ...] | None = None  # energies only; default ground
    shift_to_bottom: bool = False         # energy zero at the trap bottom
    energy_unit: str = "nK"               # "nK" | "trap"

    def __post_init__(self):
        object.__setattr__(self, "quantity", Quantity(self.quantity))
        if self.y_axis is not None and self.y_axis.name == self.x_axis.name:
            raise ValueError("x and y axes must differ")
        if self.quantity is not Quantity.CAPACITY:
            n = self.n_particles
            if self.quantum_numbers is not None:
                n = len(self.quantum_numbers)
                object.__setattr__(self, "n_particles", n)
            if n is None or n < 1:
                raise ValueError(f"quantity {self.quantity.value} needs n_particles")
        if self.energy_unit not in ("nK", "trap"):
            raise ValueError("energy_unit must be 'nK' or 'trap'")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.x_axis.count, 1 if self.y_axis is None else self.y_axis.count)

    def as_dict(self) -> dict:
        return {
            "x_axis": self.x_axis.as_dict(),
            "y_axis": None if self.y_axis is None else self.y_axis.as_dict(),
            "fixed": config_to_dict(self.fixed),
            "quantity": self.quantity.value,
            "n_particles": self.n_particles,
            "n_max": self.n_max,
            "quantum_numbers": None if self.quantum_numbers is None
            else list(self.quantum_numbers),
            "shift_to_bottom": self.shift_to_bottom,
            "energy_unit": self.energy_unit,
        }


@dataclass
class SweepGrid:
    spec: GridSpec
    values: np.ndarray               # object array of shape spec.shape; None = absent
    diagnostics: dict = field(default_factory=dict)   # (i, j) -> text
    provenance: dict = field(default_factory=dict)

    def rows(self):
        xs = self.spec.x_axis.values()
        ys = None if self.spec.y_axis is None else self.spec.y_axis.values()
        for i, x in enumerate(xs):
            if ys is None:
                yield float(x), None, self.values[i, 0]
            else:
                for j, y in enumerate(ys):
                    yield float(x), float(y), self.values[i, j]


def _cell_config(spec: GridSpec, x: float, y: float | None) -> PhysicalTrapConfig:
    config = with_axis_value(spec.fixed, spec.x_axis.name, x)
    if y is not None:
        config = with_axis_value(config, spec.y_axis.name, y)
    return config


def _scale_energy(e: float, spec: GridSpec, config: PhysicalTrapConfig) -> float:
    return float(energy_to_nk(e, config)) if spec.energy_unit == "nK" else float(e)


def evaluate_cell(spec: GridSpec, x: float, y: float | None,
                  settings: SolverSettings = DEFAULT_SETTINGS):
    """Value of one grid cell, or ``(None, diagnostic)`` when the state does not exist."""
    config = _cell_config(spec, x, y)
    if spec.quantity is Quantity.CAPACITY:
        return trap_capacity(config, spec.n_max, settings), None
    problem = to_trap_units(config, spec.n_particles)
    if spec.quantity is Quantity.GAP:
        try:
            result = energy_gap(problem, settings)
        except NoBoundStateError as exc:
            return None, str(exc)
        if result.gap is None:
            return None, f"first excited state unbound: {result.excited_diagnostic}"
        return _scale_energy(result.gap, spec, config), None
    numbers = (QuantumNumbers.ground(spec.n_particles) if spec.quantum_numbers is None
               else QuantumNumbers.of(spec.quantum_numbers))
    outcome = solve(problem, numbers, settings)
    if isinstance(outcome, Unbound):
        return None, outcome.diagnostic
    if spec.quantity is Quantity.E_TOTAL:
        e = outcome.e_total
        if spec.shift_to_bottom:
            e += 0.5 * spec.n_particles * problem.k0_hat**2
    else:
        e = outcome.e_single_max
        if spec.shift_to_bottom:
            e += 0.5 * problem.k0_hat**2
    return _scale_energy(e, spec, config), None


def _cell_task(args):
    spec, settings, index, x, y = args
    try:
        value, diagnostic = evaluate_cell(spec, x, y, settings)
    except Exception as exc:  # one bad cell must not abort the sweep
        value, diagnostic = None, f"{type(exc).__name__}: {exc}"
    return index, value, diagnostic


def run_sweep(spec: GridSpec, settings: SolverSettings = DEFAULT_SETTINGS,
              workers: int | None = 1) -> SweepGrid:
    """Evaluate every cell; ``workers > 1`` uses a process pool."""
    xs = spec.x_axis.values()
    ys = [None] if spec.y_axis is None else list(spec.y_axis.values())
    tasks = [(spec, settings, (i, j), float(x), None if y is None else float(y))
             for i, x in enumerate(xs) for j, y in enumerate(ys)]
    if workers is not None and workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_cell_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        results = [_cell_task(t) for t in tasks]
    values = np.empty(spec.shape, dtype=object)
    diagnostics = {}
    for index, value, diagnostic in results:
        values[index] = value
        if diagnostic is not None:
            diagnostics[index] = diagnostic
    provenance = {"tool_version": __version__, "solver_settings": settings.as_dict()}
    return SweepGrid(spec, values, diagnostics, provenance)


def spectrum_trace(spec: GridSpec, quantum_numbers, settings: SolverSettings = DEFAULT_SETTINGS,
                   workers: int | None = 1) -> SweepGrid:
    """1D energy trace (e_total or e_single_max) for a fixed quantum-number set."""
    if spec.y_axis is not None:
        raise ValueError("spectrum_trace takes a 1D spec")
    if spec.quantity not in (Quantity.E_TOTAL, Quantity.E_SINGLE_MAX):
        raise ValueError("spectrum_trace needs quantity e_total or e_single_max")
    numbers = QuantumNumbers.of(quantum_numbers)
    traced = GridSpec(spec.x_axis, spec.fixed, spec.quantity, None, len(numbers), spec.n_max,
                      numbers.values, spec.shift_to_bottom, spec.energy_unit)
    return run_sweep(traced, settings, workers)


# -- output -----------------------------------------------------------------------

def format_number(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".12g")


def value_column(spec: GridSpec) -> str:
    if spec.quantity is Quantity.CAPACITY:
        return "capacity"
    return f"{spec.quantity.value}_{'nK' if spec.energy_unit == 'nK' else 'trap_units'}"


def header(spec: GridSpec) -> list[str]:
    cols = [f"{spec.x_axis.name.value}_{spec.x_axis.name.si_unit.replace('1/m', 'per_m')}"]
    if spec.y_axis is not None:
        cols.append(f"{spec.y_axis.name.value}_{spec.y_axis.name.si_unit.replace('1/m', 'per_m')}")
    cols.append(value_column(spec))
    return cols


def render_csv(grid: SweepGrid) -> str:
    """One row per cell; absent cells are empty fields."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header(grid.spec))
    for x, y, value in grid.rows():
        row = [format_number(x)]
        if y is not None:
            row.append(format_number(y))
        row.append(format_number(value))
        writer.writerow(row)
    return buf.getvalue()


def render_json_lines(grid: SweepGrid) -> str:
    cols = header(grid.spec)
    lines = []
    for x, y, value in grid.rows():
        record = {cols[0]: x}
        if y is not None:
            record[cols[1]] = y
        record[cols[-1]] = None if value is None else (
            int(value) if isinstance(value, (int, np.integer)) else float(value))
        lines.append(json.dumps(record) + "\n")
    return "".join(lines)


def write_csv(grid: SweepGrid, path) -> None:
    Path(path).write_text(render_csv(grid), encoding="utf-8")


def write_json_lines(grid: SweepGrid, path) -> None:
    Path(path).write_text(render_json_lines(grid), encoding="utf-8")


def metadata(grid: SweepGrid) -> dict:
    return {
        "grid_spec": grid.spec.as_dict(),
        "provenance": grid.provenance,
        "absent_cells": {f"{i},{j}": text for (i, j), text in sorted(grid.diagnostics.items())},
    }


def write_metadata(grid: SweepGrid, path) -> None:
    Path(path).write_text(json.dumps(metadata(grid), indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")
