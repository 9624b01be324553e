"""Ground state, first excited state and the excitation gap."""

from __future__ import annotations

from dataclasses import dataclass

from .secular import (DEFAULT_SETTINGS, BetheSolution, QuantumNumbers, SolverSettings,
                      Unbound, solve)
from .units import TrapUnitsProblem


class NoBoundStateError(RuntimeError):
    pass


@dataclass(frozen=True)
class GapResult:
    ground: BetheSolution
    excited: BetheSolution | None
    gap: float | None
    excited_diagnostic: str | None = None

    def as_dict(self) -> dict:
        return {
            "ground_e_total": self.ground.e_total,
            "excited_e_total": None if self.excited is None else self.excited.e_total,
            "gap": self.gap,
            "excited_diagnostic": self.excited_diagnostic,
        }


def ground_state(problem: TrapUnitsProblem, settings: SolverSettings = DEFAULT_SETTINGS):
    return solve(problem, QuantumNumbers.ground(problem.n_particles), settings)


def first_excited(problem: TrapUnitsProblem, settings: SolverSettings = DEFAULT_SETTINGS):
    return solve(problem, QuantumNumbers.first_excited(problem.n_particles), settings)


def energy_gap(problem: TrapUnitsProblem,
               settings: SolverSettings = DEFAULT_SETTINGS) -> GapResult:
    """Gap E({1..N-1,N+1}) - E({1..N}); ``gap`` is None when the excited state is unbound."""
    ground = ground_state(problem, settings)
    if isinstance(ground, Unbound):
        raise NoBoundStateError(f"no bound {problem.n_particles}-boson ground state: "
                                f"{ground.diagnostic}")
    excited = first_excited(problem, settings)
    if isinstance(excited, Unbound):
        return GapResult(ground, None, None, excited.diagnostic)
    return GapResult(ground, excited, excited.e_total - ground.e_total)
