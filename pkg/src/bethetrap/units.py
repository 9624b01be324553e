"""Physical constants, unit systems and the effective 1D coupling.

Two dimensionless systems are used:

* trap units: length ``L`` (the well width), energy ``hbar**2 / (m L**2)``;
  all solving happens here.
* coupling units: length ``1/c``, energy ``hbar**2 c**2 / m``; kept only as a
  pure conversion for cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

from scipy import constants as _sc

# CODATA 2018 via scipy.constants.
HBAR = _sc.hbar
K_B = _sc.k
ATOMIC_MASS_UNIT = _sc.atomic_mass

# Atomic masses in u (NIST Atomic Weights and Isotopic Compositions).
ATOM_MASSES = {
    "Na23": 22.98976928 * ATOMIC_MASS_UNIT,
    "Rb87": 86.909180531 * ATOMIC_MASS_UNIT,
}
ATOM_ALIASES = {"na": "Na23", "na23": "Na23", "sodium": "Na23",
                "rb": "Rb87", "rb87": "Rb87", "87rb": "Rb87", "rubidium": "Rb87"}

# Empirical constant of the confinement-induced correction.
OLSHANII_C = 1.4603

# Reported zero-field couplings at omega_perp = 2 pi x 150 kHz, in 1/m.
REFERENCE_OMEGA_PERP = 2.0 * math.pi * 150e3
REFERENCE_COUPLINGS = {
    "Na23": 16863.6e2,
    "Rb87": 92391.6e2,
}


class ConfinementResonanceError(ValueError):
    """Raised when a/a_perp >= 1/C, where the coupling formula breaks down."""


class ConfigError(ValueError):
    pass


def resolve_atom(name: str) -> str:
    key = ATOM_ALIASES.get(name.strip().lower(), name.strip())
    if key not in ATOM_MASSES:
        raise ConfigError(f"unknown atom {name!r}; known: {sorted(ATOM_MASSES)}")
    return key


@dataclass(frozen=True)
class PhysicalTrapConfig:
    """SI description of atom and trap.

    ``omega_perp`` is an angular frequency (rad/s); ``trap_depth`` is in J.
    """

    atom_mass: float
    scattering_length: float
    omega_perp: float
    trap_length: float
    trap_depth: float

    def __post_init__(self):
        for name in ("atom_mass", "scattering_length", "omega_perp", "trap_length", "trap_depth"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")
        ratio = self.scattering_length / transverse_length(self.omega_perp, self.atom_mass)
        if ratio * OLSHANII_C >= 1.0:
            raise ConfinementResonanceError(
                f"a/a_perp = {ratio:.6g} is at or beyond the confinement resonance 1/C")

    @property
    def trap_depth_nk(self) -> float:
        return self.trap_depth / K_B * 1e9

    @property
    def interaction_strength(self) -> float:
        return interaction_strength(self.scattering_length, self.omega_perp, self.atom_mass)

    def replace(self, **changes) -> "PhysicalTrapConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class TrapUnitsProblem:
    """Dimensionless problem in trap units.

    ``c_hat = c L`` and ``k0_hat = L sqrt(2 m V0) / hbar``.
    """

    c_hat: float
    k0_hat: float
    n_particles: int

    def __post_init__(self):
        if not (math.isfinite(self.c_hat) and self.c_hat > 0):
            raise ValueError(f"c_hat must be > 0, got {self.c_hat!r}")
        if not (math.isfinite(self.k0_hat) and self.k0_hat > 0):
            raise ValueError(f"k0_hat must be > 0, got {self.k0_hat!r}")
        if int(self.n_particles) != self.n_particles or self.n_particles < 1:
            raise ValueError(f"n_particles must be a positive integer, got {self.n_particles!r}")

    def with_particles(self, n: int) -> "TrapUnitsProblem":
        return replace(self, n_particles=n)


def _check_positive(**values):
    for name, value in values.items():
        if not (math.isfinite(value) and value > 0):
            raise ValueError(f"{name} must be finite and > 0, got {value!r}")


def transverse_length(omega_perp: float, atom_mass: float) -> float:
    """Transverse oscillator length sqrt(2 hbar / (m omega_perp))."""
    _check_positive(omega_perp=omega_perp, atom_mass=atom_mass)
    return math.sqrt(2.0 * HBAR / (atom_mass * omega_perp))


def interaction_strength(scattering_length: float, omega_perp: float, atom_mass: float,
                         correction: float = OLSHANII_C) -> float:
    """Effective 1D coupling c in 1/m for a delta potential (hbar^2 c / m) delta(x)."""
    _check_positive(scattering_length=scattering_length)
    a_perp = transverse_length(omega_perp, atom_mass)
    ratio = scattering_length / a_perp
    denominator = 1.0 - correction * ratio
    if denominator <= 0.0:
        raise ConfinementResonanceError(
            f"a/a_perp = {ratio:.6g} >= 1/C = {1.0 / correction:.6g}")
    return 4.0 * scattering_length / a_perp**2 / denominator


def scattering_length_for(coupling: float, omega_perp: float, atom_mass: float,
                          correction: float = OLSHANII_C) -> float:
    """Inverse of :func:`interaction_strength` in closed form."""
    _check_positive(coupling=coupling)
    a_perp = transverse_length(omega_perp, atom_mass)
    return coupling / (4.0 / a_perp**2 + coupling * correction / a_perp)


def reference_scattering_length(atom: str, omega_perp: float = REFERENCE_OMEGA_PERP) -> float:
    """Scattering length reproducing the reported zero-field coupling for ``atom``."""
    key = resolve_atom(atom)
    return scattering_length_for(REFERENCE_COUPLINGS[key], omega_perp, ATOM_MASSES[key])


def well_wavenumber(trap_length: float, atom_mass: float, trap_depth: float) -> float:
    """L sqrt(2 m V0) / hbar; zero depth gives zero."""
    if trap_depth < 0:
        raise ValueError("trap_depth must be >= 0")
    return trap_length * math.sqrt(2.0 * atom_mass * trap_depth) / HBAR


def energy_unit(config: PhysicalTrapConfig) -> float:
    """hbar^2 / (m L^2) in J."""
    return HBAR**2 / (config.atom_mass * config.trap_length**2)


def to_trap_units(config: PhysicalTrapConfig, n: int) -> TrapUnitsProblem:
    c_hat = config.interaction_strength * config.trap_length
    k0_hat = well_wavenumber(config.trap_length, config.atom_mass, config.trap_depth)
    return TrapUnitsProblem(c_hat=c_hat, k0_hat=k0_hat, n_particles=n)


def from_trap_units(problem: TrapUnitsProblem, atom_mass: float, omega_perp: float,
                    trap_length: float) -> PhysicalTrapConfig:
    """Rebuild the SI config; mass, omega_perp and L are not carried by the problem."""
    coupling = problem.c_hat / trap_length
    depth = (HBAR * problem.k0_hat / trap_length) ** 2 / (2.0 * atom_mass)
    return PhysicalTrapConfig(
        atom_mass=atom_mass,
        scattering_length=scattering_length_for(coupling, omega_perp, atom_mass),
        omega_perp=omega_perp,
        trap_length=trap_length,
        trap_depth=depth,
    )


def energy_to_physical(e, config: PhysicalTrapConfig):
    """Trap-units energy to J. Works elementwise on arrays."""
    return e * energy_unit(config)


def energy_to_nk(e, config: PhysicalTrapConfig):
    """Trap-units energy to nK (energy / k_B)."""
    return energy_to_physical(e, config) / K_B * 1e9


def joules_to_nk(energy):
    return energy / K_B * 1e9


def nk_to_joules(temperature_nk):
    return temperature_nk * 1e-9 * K_B


def to_coupling_units(problem: TrapUnitsProblem) -> tuple[float, float]:
    """Return (x0, k0) in 1/c length units: x0 = c L, k0 = k0_hat / c_hat."""
    return problem.c_hat, problem.k0_hat / problem.c_hat


def coupling_energy_to_trap(e_coupling, problem: TrapUnitsProblem):
    """Energy in hbar^2 c^2 / m units to trap units."""
    return e_coupling * problem.c_hat**2


# -- config files -----------------------------------------------------------

CONFIG_KEYS = ("atom", "mass_kg", "scattering_length_m", "omega_perp_hz",
               "trap_length_m", "trap_depth_nk", "n_particles")


def parse_config_text(text: str) -> tuple[PhysicalTrapConfig, int | None]:
    """Parse flat ``key = value`` text. ``#`` starts a comment."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, value = line.split("=", 1)
        elif ":" in line:
            key, value = line.split(":", 1)
        else:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = key.strip(), value.strip()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value

    if "mass_kg" in raw:
        mass = float(raw["mass_kg"])
    elif "atom" in raw:
        mass = ATOM_MASSES[resolve_atom(raw["atom"])]
    else:
        raise ConfigError("one of 'atom' or 'mass_kg' is required")
    for key in ("scattering_length_m", "omega_perp_hz", "trap_length_m", "trap_depth_nk"):
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")
    try:
        config = PhysicalTrapConfig(
            atom_mass=mass,
            scattering_length=float(raw["scattering_length_m"]),
            omega_perp=2.0 * math.pi * float(raw["omega_perp_hz"]),
            trap_length=float(raw["trap_length_m"]),
            trap_depth=nk_to_joules(float(raw["trap_depth_nk"])),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    n = None
    if "n_particles" in raw:
        n = int(raw["n_particles"])
        if n < 1:
            raise ConfigError("n_particles must be >= 1")
    return config, n


def load_config(path) -> tuple[PhysicalTrapConfig, int | None]:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


def config_to_dict(config: PhysicalTrapConfig) -> dict:
    return {
        "mass_kg": config.atom_mass,
        "scattering_length_m": config.scattering_length,
        "omega_perp_hz": config.omega_perp / (2.0 * math.pi),
        "trap_length_m": config.trap_length,
        "trap_depth_nk": config.trap_depth_nk,
        "interaction_strength_per_m": config.interaction_strength,
    }
