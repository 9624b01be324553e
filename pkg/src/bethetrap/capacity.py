"""Trap capacity and ionization thresholds."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .secular import DEFAULT_SETTINGS, SolverSettings, Unbound
from .spectrum import ground_state
from .units import PhysicalTrapConfig, scattering_length_for, to_trap_units


class Axis(str, enum.Enum):
    TRAP_DEPTH = "trap_depth"              # J
    TRAP_LENGTH = "trap_length"            # m
    INTERACTION_STRENGTH = "interaction_strength"  # 1/m

    @property
    def si_unit(self) -> str:
        return {"trap_depth": "J", "trap_length": "m", "interaction_strength": "1/m"}[self.value]


class BracketError(ValueError):
    pass


def axis_value(config: PhysicalTrapConfig, axis) -> float:
    axis = Axis(axis)
    if axis is Axis.TRAP_DEPTH:
        return config.trap_depth
    if axis is Axis.TRAP_LENGTH:
        return config.trap_length
    return config.interaction_strength


def with_axis_value(config: PhysicalTrapConfig, axis, value: float) -> PhysicalTrapConfig:
    """Copy of ``config`` with one axis moved; couplings are set via the scattering length."""
    axis = Axis(axis)
    if axis is Axis.TRAP_DEPTH:
        return config.replace(trap_depth=value)
    if axis is Axis.TRAP_LENGTH:
        return config.replace(trap_length=value)
    a = scattering_length_for(value, config.omega_perp, config.atom_mass)
    return config.replace(scattering_length=a)


def exists_bound_state(config: PhysicalTrapConfig, n: int,
                       settings: SolverSettings = DEFAULT_SETTINGS) -> bool:
    return not isinstance(ground_state(to_trap_units(config, n), settings), Unbound)


def trap_capacity(config: PhysicalTrapConfig, n_max: int,
                  settings: SolverSettings = DEFAULT_SETTINGS) -> int:
    """Largest n <= n_max with a bound n-boson ground state (upward scan, stops at the first gap)."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    capacity = 0
    for n in range(1, n_max + 1):
        if not exists_bound_state(config, n, settings):
            break
        capacity = n
    return capacity


@dataclass(frozen=True)
class ThresholdQuery:
    base_config: PhysicalTrapConfig
    n: int
    axis: Axis
    bracket: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "axis", Axis(self.axis))
        low, high = self.bracket
        if not (0 < low < high):
            raise BracketError(f"bracket must satisfy 0 < low < high, got {self.bracket}")


@dataclass(frozen=True)
class ThresholdResult:
    axis: Axis
    n: int
    value: float            # midpoint of the final bracket
    bound_value: float      # end of the final bracket where the n-boson state exists
    unbound_value: float
    capacity_below: int
    capacity_above: int
    bisection_width: float
    evaluations: int

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["axis"] = self.axis.value
        return d


def ionization_threshold(query: ThresholdQuery, tol: float = 1e-4,
                         settings: SolverSettings = DEFAULT_SETTINGS,
                         n_max: int | None = None) -> ThresholdResult:
    """Bisect the axis until the bracket width is <= ``tol`` relative to its upper end.

    Capacities are evaluated at both final bracket ends with ``n_max``
    (default ``query.n``) as the ceiling.
    """
    axis, n = query.axis, query.n

    def exists(value):
        return exists_bound_state(with_axis_value(query.base_config, axis, value), n, settings)

    low, high = query.bracket
    at_low, at_high = exists(low), exists(high)
    evaluations = 2
    if at_low == at_high:
        raise BracketError(f"{n}-boson state {'exists' if at_low else 'is absent'} at both "
                           f"ends of the {axis.value} bracket {query.bracket}")
    while high - low > tol * high:
        # geometric midpoint: brackets may span decades
        mid = math.sqrt(low * high)
        if mid <= low or mid >= high:
            break
        if exists(mid) == at_low:
            low = mid
        else:
            high = mid
        evaluations += 1
    ceiling = n if n_max is None else n_max
    below = trap_capacity(with_axis_value(query.base_config, axis, low), ceiling, settings)
    above = trap_capacity(with_axis_value(query.base_config, axis, high), ceiling, settings)
    bound_value, unbound_value = (low, high) if at_low else (high, low)
    return ThresholdResult(axis, n, 0.5 * (low + high), bound_value, unbound_value,
                           below, above, high - low, evaluations)
