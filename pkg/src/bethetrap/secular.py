"""Secular equations for N bosons in a finite square well, in trap units.

For quantum numbers ``I`` the wave numbers satisfy, for every j,

    F_j = k_j - pi I_j + 2 asin(k_j / k0)
          + sum_{l != j} [atan((k_j + k_l) / c) + atan((k_j - k_l) / c)] = 0

with ``k0 = k0_hat`` and ``c = c_hat``. See ``docs/secular_derivation.md``
for how this follows from the 1/c-unit form by rescaling.

Newton iterations run on the angles ``theta_j = asin(k_j / k0)``. The
residual is the same function, but its derivative ``k0 cos(theta) + ...``
stays finite at the ionization edge ``k_j -> k0`` where dF/dk diverges.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from .units import TrapUnitsProblem

log = logging.getLogger(__name__)

HALF_PI = 0.5 * math.pi


class InvalidQuantumNumbers(ValueError):
    pass


class OutOfWellError(ValueError):
    """Some k_j lies at or beyond k0: the state is not bound."""


class SingularJacobianError(ValueError):
    """kappa_j = 0, the state sits exactly on an ionization edge."""


@dataclass(frozen=True)
class QuantumNumberViolation:
    kind: str  # "empty" | "non_integer" | "non_positive" | "duplicate"
    message: str
    values: tuple = ()


def validate_quantum_numbers(values) -> QuantumNumberViolation | None:
    """Return ``None`` for a valid set, otherwise a description of the problem."""
    values = list(values)
    if not values:
        return QuantumNumberViolation("empty", "quantum-number set is empty")
    bad = [v for v in values if isinstance(v, bool) or int(v) != v]
    if bad:
        return QuantumNumberViolation("non_integer", f"non-integer entries {bad}", tuple(bad))
    ints = [int(v) for v in values]
    bad = sorted(v for v in ints if v < 1)
    if bad:
        return QuantumNumberViolation("non_positive", f"entries must be >= 1, got {bad}",
                                      tuple(bad))
    seen, dup = set(), set()
    for v in ints:
        (dup if v in seen else seen).add(v)
    if dup:
        return QuantumNumberViolation("duplicate", f"duplicate entries {sorted(dup)}",
                                      tuple(sorted(dup)))
    return None


@dataclass(frozen=True)
class QuantumNumbers:
    """Sorted, distinct, positive integers labelling a Bethe state."""

    values: tuple[int, ...]

    def __post_init__(self):
        violation = validate_quantum_numbers(self.values)
        if violation is not None:
            raise InvalidQuantumNumbers(violation.message)
        if list(self.values) != sorted(self.values):
            raise InvalidQuantumNumbers("values must be ascending; use QuantumNumbers.of()")

    @classmethod
    def of(cls, values) -> "QuantumNumbers":
        values = list(values)
        violation = validate_quantum_numbers(values)
        if violation is not None:
            raise InvalidQuantumNumbers(violation.message)
        return cls(tuple(sorted(int(v) for v in values)))

    @classmethod
    def ground(cls, n: int) -> "QuantumNumbers":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def first_excited(cls, n: int) -> "QuantumNumbers":
        return cls(tuple(range(1, n)) + (n + 1,))

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __str__(self):
        return ",".join(map(str, self.values))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class SolverSettings:
    tol: float = 1e-10
    steps: int = 40
    max_newton: int = 50
    min_rel_step: float = 1e-6
    c_start_floor: float = 1e6
    c_start_factor: float = 1e3
    edge_slack: float = 1e-12

    def as_dict(self) -> dict:
        return dict(self.__dict__)


DEFAULT_SETTINGS = SolverSettings()


@dataclass(frozen=True)
class BetheSolution:
    quantum_numbers: QuantumNumbers
    problem: TrapUnitsProblem
    k: np.ndarray
    kappa: np.ndarray
    e_single: np.ndarray
    e_total: float
    residual_norm: float
    newton_iterations: int
    continuation_steps: int
    warnings: tuple[str, ...] = ()

    bound = True

    @property
    def e_single_max(self) -> float:
        return float(self.e_single[-1])

    def as_dict(self) -> dict:
        return {
            "bound": True,
            "quantum_numbers": list(self.quantum_numbers.values),
            "c_hat": self.problem.c_hat,
            "k0_hat": self.problem.k0_hat,
            "k": self.k.tolist(),
            "kappa": self.kappa.tolist(),
            "e_single": self.e_single.tolist(),
            "e_total": self.e_total,
            "residual_norm": self.residual_norm,
            "newton_iterations": self.newton_iterations,
            "continuation_steps": self.continuation_steps,
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True)
class Unbound:
    """No bound Bethe state; ``last_parameter`` is the last continuation value reached."""

    diagnostic: str
    last_parameter: float | None = None
    quantum_numbers: QuantumNumbers | None = None

    bound = False

    def as_dict(self) -> dict:
        return {
            "bound": False,
            "quantum_numbers": None if self.quantum_numbers is None
            else list(self.quantum_numbers.values),
            "diagnostic": self.diagnostic,
            "last_parameter": self.last_parameter,
        }


SolveOutcome = BetheSolution | Unbound


# -- residual and Jacobian ----------------------------------------------------

def _pair_sums(k: np.ndarray, c: float) -> np.ndarray:
    plus = np.arctan((k[:, None] + k[None, :]) / c)
    minus = np.arctan((k[:, None] - k[None, :]) / c)
    s = plus + minus
    np.fill_diagonal(s, 0.0)
    return s.sum(axis=1)


def _pair_derivatives(k: np.ndarray, c: float) -> tuple[np.ndarray, np.ndarray]:
    plus = c / (c * c + (k[:, None] + k[None, :]) ** 2)
    minus = c / (c * c + (k[:, None] - k[None, :]) ** 2)
    np.fill_diagonal(plus, 0.0)
    np.fill_diagonal(minus, 0.0)
    return plus, minus


def _check_shapes(k, quantum_numbers, problem):
    if len(k) != len(quantum_numbers) or len(k) != problem.n_particles:
        raise ValueError(f"expected {problem.n_particles} wave numbers and quantum numbers, "
                         f"got {len(k)} and {len(quantum_numbers)}")


def residual(k, quantum_numbers: QuantumNumbers, problem: TrapUnitsProblem,
             edge_slack: float = 1e-12) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    _check_shapes(k, quantum_numbers, problem)
    if np.isnan(k).any():
        raise ValueError("NaN wave number")
    ratio = k / problem.k0_hat
    if (np.abs(ratio) > 1.0 + edge_slack).any():
        raise OutOfWellError(f"|k|/k0 = {np.abs(ratio).max():.17g} exceeds 1")
    ratio = np.clip(ratio, -1.0, 1.0)
    return (k - math.pi * quantum_numbers.as_array() + 2.0 * np.arcsin(ratio)
            + _pair_sums(k, problem.c_hat))


def jacobian(k, quantum_numbers: QuantumNumbers, problem: TrapUnitsProblem) -> np.ndarray:
    """Analytic dF/dk."""
    k = np.asarray(k, dtype=float)
    _check_shapes(k, quantum_numbers, problem)
    kappa_sq = problem.k0_hat**2 - k**2
    if (kappa_sq <= 0).any():
        raise SingularJacobianError("kappa_j = 0 (or imaginary): derivative of asin diverges")
    plus, minus = _pair_derivatives(k, problem.c_hat)
    jac = plus - minus
    np.fill_diagonal(jac, 1.0 + 2.0 / np.sqrt(kappa_sq) + plus.sum(axis=1) + minus.sum(axis=1))
    return jac


def _angle_residual(theta, I, c, k0):
    k = k0 * np.sin(theta)
    return k - math.pi * I + 2.0 * theta + _pair_sums(k, c)


def _angle_jacobian(theta, c, k0):
    k = k0 * np.sin(theta)
    dk = k0 * np.cos(theta)
    plus, minus = _pair_derivatives(k, c)
    jac = (plus - minus) * dk[None, :]
    np.fill_diagonal(jac, (1.0 + plus.sum(axis=1) + minus.sum(axis=1)) * dk + 2.0)
    return jac


# -- Tonks limit ----------------------------------------------------------------

def single_particle_wavenumber(n: int, k0_hat: float, xtol: float = 1e-14) -> float | None:
    """Root of k + 2 asin(k/k0) = pi n on (0, k0), or None if there is none."""
    target = math.pi * n
    if not target < k0_hat + math.pi:
        return None
    return bisect(lambda k: k + 2.0 * math.asin(min(k / k0_hat, 1.0)) - target,
                  0.0, k0_hat, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=400)


def solve_tonks_limit(quantum_numbers: QuantumNumbers, k0_hat: float):
    """Infinite-coupling wave numbers: each k_j is an independent single-particle root."""
    roots = []
    for n in quantum_numbers:
        k = single_particle_wavenumber(n, k0_hat)
        if k is None:
            return Unbound(f"no Tonks-limit root for I_j = {n}: pi*{n} >= k0 + pi "
                           f"with k0 = {k0_hat:.12g}", None, quantum_numbers)
        roots.append(k)
    return np.asarray(roots)


# -- continuation solver ------------------------------------------------------------

class _NewtonFailure(Exception):
    pass


def _newton(theta, I, c, k0, settings):
    f = _angle_residual(theta, I, c, k0)
    norm = np.abs(f).max()
    for it in range(settings.max_newton + 1):
        if norm <= settings.tol:
            return theta, norm, it
        if it == settings.max_newton:
            break
        try:
            step = np.linalg.solve(_angle_jacobian(theta, c, k0), f)
        except np.linalg.LinAlgError:
            raise _NewtonFailure("singular Jacobian") from None
        damping = 1.0
        while True:
            trial = theta - damping * step
            f_trial = _angle_residual(trial, I, c, k0)
            norm_trial = np.abs(f_trial).max()
            if norm_trial < norm or damping < 1e-6:
                break
            damping *= 0.5
        if not np.isfinite(norm_trial) or norm_trial >= norm:
            raise _NewtonFailure(f"residual stalled at {norm:.3e}")
        theta, f, norm = trial, f_trial, norm_trial
    raise _NewtonFailure(f"no convergence in {settings.max_newton} iterations "
                         f"(residual {norm:.3e})")


@dataclass
class _Tracker:
    newton_iterations: int = 0
    steps: int = 0
    warnings: list = field(default_factory=list)


def _continue(theta, I, path, settings, tracker, monitor=None):
    """Follow ``path(s) -> (c, k0)`` for s in [0, 1] in ``settings.steps`` nominal
    steps, halving a step whenever Newton fails. ``path(1)`` must be the exact target."""
    s = 0.0
    nominal = 1.0 / settings.steps
    while s < 1.0:
        h = min(nominal, 1.0 - s)
        while True:
            s_next = 1.0 if s + h >= 1.0 else s + h
            c, k0 = path(s_next)
            try:
                new, _, its = _newton(theta, I, c, k0, settings)
                tracker.newton_iterations += its
                if (np.diff(new) <= 0).any():
                    raise _NewtonFailure("wave-number ordering lost")
                break
            except _NewtonFailure as exc:
                h *= 0.5
                if h < settings.min_rel_step:
                    return None, path(s), f"continuation stalled after {path(s)}: {exc}"
        theta, s = new, s_next
        tracker.steps += 1
        if monitor is not None:
            monitor(theta, c, k0)
        if theta[-1] >= HALF_PI * (1.0 - settings.edge_slack):
            return None, (c, k0), f"k_N reached k0 at (c_hat, k0_hat) = ({c:.12g}, {k0:.12g})"
    return theta, path(1.0), None


def _log_path(start, end):
    a, b = math.log(start), math.log(end)
    return lambda s: end if s >= 1.0 else math.exp(a + (b - a) * s)


def _energy(theta, k0):
    k = k0 * np.sin(theta)
    return 0.5 * float(np.sum(k**2 - k0**2))


def solve(problem: TrapUnitsProblem, quantum_numbers: QuantumNumbers,
          settings: SolverSettings = DEFAULT_SETTINGS):
    """Solve the secular equations by continuation from the Tonks limit.

    The coupling is lowered from ``max(c_start_floor, c_start_factor * c_hat)``
    to ``c_hat`` in log-spaced steps. If the Tonks start does not exist at the
    requested depth, the coupling sweep is done in a deeper well and the depth
    is then lowered to the target; losing the state on the way means Unbound.
    """
    if not isinstance(quantum_numbers, QuantumNumbers):
        quantum_numbers = QuantumNumbers.of(quantum_numbers)
    if len(quantum_numbers) != problem.n_particles:
        raise ValueError(f"{len(quantum_numbers)} quantum numbers for "
                         f"{problem.n_particles} particles")
    I = quantum_numbers.as_array()
    c_target, k0_target = problem.c_hat, problem.k0_hat

    k0_start = k0_target
    tonks = solve_tonks_limit(quantum_numbers, k0_target)
    if isinstance(tonks, Unbound):
        k0_start = max(2.0 * k0_target, 2.0 * math.pi * quantum_numbers.values[-1])
        tonks = solve_tonks_limit(quantum_numbers, k0_start)
    theta = np.arcsin(np.asarray(tonks) / k0_start)
    tracker = _Tracker()

    c_start = max(settings.c_start_floor, settings.c_start_factor * c_target)
    coupling = _log_path(c_start, c_target)
    energy_trace = []

    def monitor(th, c, k0):
        energy_trace.append((c, _energy(th, k0)))

    theta, last, failure = _continue(
        theta, I, lambda s: (coupling(s), k0_start), settings, tracker, monitor)
    if failure is not None:
        return Unbound(failure, last[0], quantum_numbers)

    # Energy should not increase while the coupling is lowered.
    for (c_a, e_a), (c_b, e_b) in zip(energy_trace, energy_trace[1:]):
        if e_b > e_a + 1e-9 * max(1.0, abs(e_a)):
            msg = (f"e_total rose from {e_a:.12g} to {e_b:.12g} as c_hat fell "
                   f"from {c_a:.6g} to {c_b:.6g}")
            log.warning(msg)
            tracker.warnings.append(msg)
            break

    if k0_start != k0_target:
        depth = _log_path(k0_start, k0_target)
        theta, last, failure = _continue(
            theta, I, lambda s: (c_target, depth(s)), settings, tracker)
        if failure is not None:
            return Unbound(failure, c_target, quantum_numbers)

    if theta[0] <= 0.0 or theta[-1] >= HALF_PI * (1.0 - settings.edge_slack):
        return Unbound("wave numbers outside (0, k0)", c_target, quantum_numbers)
    return _build_solution(theta, quantum_numbers, problem, tracker, settings)


def _build_solution(theta, quantum_numbers, problem, tracker, settings):
    k0 = problem.k0_hat
    k = k0 * np.sin(theta)
    kappa = k0 * np.cos(theta)
    norm = float(np.abs(_angle_residual(theta, quantum_numbers.as_array(),
                                        problem.c_hat, k0)).max())
    return BetheSolution(
        quantum_numbers=quantum_numbers,
        problem=problem,
        k=k,
        kappa=kappa,
        e_single=-0.5 * kappa**2,
        e_total=0.5 * float(np.sum(k**2 - k0**2)),
        residual_norm=norm,
        newton_iterations=tracker.newton_iterations,
        continuation_steps=tracker.steps,
        warnings=tuple(tracker.warnings),
    )


# -- 1/c-unit form, for cross-checks ------------------------------------------

def coupling_units_residual(k, quantum_numbers: QuantumNumbers, x0: float, k0: float):
    """Secular equations with 1/c as length unit (well width x0 = c L)."""
    k = np.asarray(k, dtype=float)
    ratio = np.clip(k / k0, -1.0, 1.0)
    return (x0 * k - math.pi * quantum_numbers.as_array() + 2.0 * np.arcsin(ratio)
            + _pair_sums(k, 1.0))
