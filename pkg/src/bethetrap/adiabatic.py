"""Minimum adiabatic culling time along a trap-depth ramp.

The ramp speed is held at the adiabatic bound |dV0/dt| = gap(V0)**2 / hbar,
so the time spent is the integral of hbar / gap**2 over depth. This is a
saturating-speed estimate: a real ramp must be slower still.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .secular import DEFAULT_SETTINGS, SolverSettings
from .spectrum import NoBoundStateError, energy_gap
from .units import HBAR, PhysicalTrapConfig, energy_to_physical, joules_to_nk, to_trap_units


class GapUndefinedError(RuntimeError):
    def __init__(self, depth: float, reason: str):
        self.depth = depth
        super().__init__(f"gap undefined at V0 = {depth:.12g} J "
                         f"({joules_to_nk(depth):.6g} nK): {reason}")


@dataclass(frozen=True)
class CullingEstimate:
    v_start: float
    v_end: float
    samples: tuple[tuple[float, float], ...]   # (V0 in J, gap in J)
    t_min: float                               # s

    def rows_nk(self):
        return [(joules_to_nk(v), joules_to_nk(g)) for v, g in self.samples]


def culling_time_from_profile(depths, gaps) -> float:
    """Trapezoidal integral of hbar / gap**2 over |dV0| (SI units)."""
    depths = np.asarray(depths, dtype=float)
    gaps = np.asarray(gaps, dtype=float)
    if (gaps <= 0).any():
        raise ValueError("gaps must be positive")
    order = np.argsort(depths)
    return float(trapezoid(HBAR / gaps[order] ** 2, depths[order]))


def gap_at_depth(config: PhysicalTrapConfig, n: int, depth: float,
                 settings: SolverSettings = DEFAULT_SETTINGS) -> float:
    cfg = config.replace(trap_depth=depth)
    try:
        result = energy_gap(to_trap_units(cfg, n), settings)
    except NoBoundStateError as exc:
        raise GapUndefinedError(depth, str(exc)) from None
    if result.gap is None:
        raise GapUndefinedError(depth, f"first excited state unbound ({result.excited_diagnostic})")
    return float(energy_to_physical(result.gap, cfg))


def min_culling_time(config: PhysicalTrapConfig, n: int, v_start: float, v_end: float,
                     sample_count: int = 64, inset: float = 0.01,
                     settings: SolverSettings = DEFAULT_SETTINGS,
                     workers: int = 1) -> CullingEstimate:
    """Culling time for the n-particle system lowered from ``v_start`` to ``v_end`` (J).

    Gaps close at ionization thresholds, so both endpoints are moved inward
    by ``inset`` times the ramp width before sampling.
    """
    if not v_start > v_end > 0:
        raise ValueError("need v_start > v_end > 0")
    if sample_count < 8:
        raise ValueError("sample_count must be >= 8")
    if not 0 <= inset < 0.5:
        raise ValueError("inset must lie in [0, 0.5)")
    width = v_start - v_end
    depths = np.linspace(v_end + inset * width, v_start - inset * width, sample_count)

    def one(depth):
        return gap_at_depth(config, n, float(depth), settings)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            gaps = list(pool.map(one, depths))
    else:
        gaps = [one(d) for d in depths]
    t_min = culling_time_from_profile(depths, gaps)
    samples = tuple((float(v), float(g)) for v, g in zip(depths[::-1], gaps[::-1]))
    return CullingEstimate(v_start, v_end, samples, t_min)
