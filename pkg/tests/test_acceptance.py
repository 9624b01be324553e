"""Acceptance criteria, each at its stated tolerance.

Every test records one ``PASS``/``FAIL`` line; the lines are printed in the
terminal summary (and immediately with ``-s``). Nothing here is loosened to
turn a red criterion green; see the README for the criteria that are known
to fail and why.
"""

import math
import time

import numpy as np
import pytest

from bethetrap.adiabatic import GapUndefinedError, min_culling_time
from bethetrap.capacity import Axis, ThresholdQuery, ionization_threshold, with_axis_value
from bethetrap.oracles import FdGridSpec, richardson_two_body_energy
from bethetrap.secular import (InvalidQuantumNumbers, QuantumNumbers, Unbound, jacobian, residual,
                               single_particle_wavenumber, solve, solve_tonks_limit)
from bethetrap.spectrum import NoBoundStateError, energy_gap, first_excited, ground_state
from bethetrap.sweep import AxisSpec, GridSpec, Quantity, render_csv, run_sweep
from bethetrap.units import (ATOM_MASSES, REFERENCE_COUPLINGS, REFERENCE_OMEGA_PERP,
                             TrapUnitsProblem, energy_to_nk, interaction_strength, nk_to_joules,
                             scattering_length_for, to_trap_units)

from conftest import ACCEPTANCE_LINES, sodium_config


def report(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def depth_threshold(config, n, bracket_nk=(0.5, 60.0), tol=1e-4):
    query = ThresholdQuery(config, n, Axis.TRAP_DEPTH,
                           (nk_to_joules(bracket_nk[0]), nk_to_joules(bracket_nk[1])))
    return ionization_threshold(query, tol)


def test_criterion_01_tonks_limit():
    start = time.perf_counter()
    worst, mismatched = 0.0, []
    for n in range(1, 7):
        numbers = QuantumNumbers.ground(n)
        for k0 in (10.0, 20.0, 50.0):
            expected = solve_tonks_limit(numbers, k0)
            got = solve(TrapUnitsProblem(1e6, k0, n), numbers)
            if isinstance(expected, Unbound) or isinstance(got, Unbound):
                if isinstance(expected, Unbound) != isinstance(got, Unbound):
                    mismatched.append((n, k0))
                continue
            rel = float(np.max(np.abs(got.k - expected) / expected))
            worst = max(worst, rel)
    elapsed = time.perf_counter() - start
    ok = worst < 1e-6 and not mismatched and elapsed < 1.0
    report(1, ok, f"max rel |k - k_tonks| = {worst:.3e} (tol 1e-6), "
                  f"bound/unbound mismatches {mismatched}, runtime {elapsed:.2f} s")


def test_criterion_02_non_interacting_limit():
    worst = 0.0
    for n in (2, 3, 4):
        for k0 in (10.0, 20.0, 50.0):
            sol = solve(TrapUnitsProblem(1e-6, k0, n), QuantumNumbers.ground(n))
            assert not isinstance(sol, Unbound)
            k1 = single_particle_wavenumber(1, k0)
            worst = max(worst, float(np.max(np.abs(sol.k - k1) / k1)))
    report(2, worst < 1e-4, f"max rel |k_j - k_1| at c_hat = 1e-6 = {worst:.3e} (tol 1e-4)")


def test_criterion_03_two_body_brute_force():
    start = time.perf_counter()
    worst, details = 0.0, []
    for c_hat in (0.1, 1.0, 5.0, 20.0, 100.0):
        problem = TrapUnitsProblem(c_hat, 20.0, 2)
        bethe = solve(problem, QuantumNumbers.ground(2)).e_total
        fd, _, _ = richardson_two_body_energy(problem, FdGridSpec(120))
        rel = abs(bethe - fd) / abs(fd)
        worst = max(worst, rel)
        details.append(f"{c_hat:g}:{rel:.1e}")
    elapsed = time.perf_counter() - start
    report(3, worst < 1e-2 and elapsed < 120,
           f"max rel |E_bethe - E_fd| = {worst:.3e} (tol 1e-2) [{' '.join(details)}], "
           f"runtime {elapsed:.1f} s")


def test_criterion_04_quantum_number_rule():
    rejected = 0
    for bad in ([1, 1], [2, 3, 3], [0, 1], [-2, 1, 4], [1.5, 2]):
        try:
            QuantumNumbers.of(bad)
        except InvalidQuantumNumbers:
            rejected += 1
    rng = np.random.default_rng(2024)
    failures = []
    problem_k0 = 60.0       # 12 pi < 60: every entry <= 12 fits in the well
    for _ in range(20):
        n = int(rng.integers(1, 6))
        values = rng.choice(np.arange(1, 13), size=n, replace=False)
        c_hat = float(10 ** rng.uniform(-1, 3))
        numbers = QuantumNumbers.of(values.tolist())
        outcome = solve(TrapUnitsProblem(c_hat, problem_k0, n), numbers)
        if isinstance(outcome, Unbound) or outcome.residual_norm > 1e-10:
            failures.append((numbers.values, c_hat))
    report(4, rejected == 5 and not failures,
           f"{rejected}/5 invalid sets rejected, {20 - len(failures)}/20 random sets converged")


def test_criterion_05_level_ordering():
    base = sodium_config()
    depths = np.linspace(nk_to_joules(2.0), nk_to_joules(80.0), 10)
    couplings = np.geomspace(1e5, 1e8, 10)
    compared, violations = 0, []
    for n in range(2, 6):
        for depth in depths:
            for c in couplings:
                config = with_axis_value(with_axis_value(base, Axis.TRAP_DEPTH, depth),
                                         Axis.INTERACTION_STRENGTH, c)
                problem = to_trap_units(config, n)
                g, e = ground_state(problem), first_excited(problem)
                if isinstance(g, Unbound) or isinstance(e, Unbound):
                    continue
                compared += 1
                if not g.e_total < e.e_total:
                    violations.append((n, depth, c))
    report(5, compared > 0 and not violations,
           f"{compared} grid points with both states bound, {len(violations)} ordering violations")


def test_criterion_06_coupling_fixtures():
    details, ok = [], True
    for atom in ("Na23", "Rb87"):
        mass, target = ATOM_MASSES[atom], REFERENCE_COUPLINGS[atom]
        a = scattering_length_for(target, REFERENCE_OMEGA_PERP, mass)
        back = interaction_strength(a, REFERENCE_OMEGA_PERP, mass)
        rel = abs(back - target) / target
        ok &= 1e-9 <= a <= 1e-8 and rel < 1e-10
        details.append(f"{atom} a = {a * 1e9:.4f} nm, round trip {rel:.1e}")
    report(6, ok, "; ".join(details))


def test_criterion_07_maximum_coupling():
    n = 4
    shallow, deep = sodium_config(25.0), sodium_config(40.0)
    c_max = 1e6 / shallow.trap_length               # c_hat = 1e6 in 1/m
    c_na = shallow.interaction_strength

    def bound(config, c):
        cfg = with_axis_value(config, Axis.INTERACTION_STRENGTH, c)
        return not isinstance(ground_state(to_trap_units(cfg, n)), Unbound)

    shallow_ok = bound(shallow, c_na) and not bound(shallow, c_max)
    detail = "25 nK: no sign change"
    if shallow_ok:
        result = ionization_threshold(
            ThresholdQuery(shallow, n, Axis.INTERACTION_STRENGTH, (c_na, c_max)))
        detail = f"25 nK: bound up to c_hat* = {result.value * shallow.trap_length:.4g}"
    grid = np.geomspace(c_na, c_max, 25)
    persists = all(bound(deep, c) for c in grid)
    report(7, shallow_ok and persists,
           f"{detail}; 40 nK: bound on all 25 points up to c_hat = 1e6: {persists}")


def test_criterion_08_threshold_structure():
    config = sodium_config()
    values, edge = [], []
    for n in range(2, 7):
        result = depth_threshold(config, n)
        bound_cfg = with_axis_value(config, Axis.TRAP_DEPTH, result.bound_value)
        sol = ground_state(to_trap_units(bound_cfg, n))
        values.append(result.value)
        edge.append(abs(sol.e_single_max))
    increasing = all(b > a for a, b in zip(values, values[1:]))
    ok = increasing and max(edge) < 1e-3
    listing = ", ".join(f"N={n}: {v / 1.380649e-23 * 1e9:.3f} nK" for n, v in
                        zip(range(2, 7), values))
    report(8, ok, f"{listing}; max |e_N| at threshold = {max(edge):.2e} (tol 1e-3)")


def test_criterion_09_culling_time():
    config = sodium_config()
    v3 = depth_threshold(config, 3).value
    v2 = depth_threshold(config, 2).value
    try:
        estimate = min_culling_time(config, 3, v3, v2)
    except GapUndefinedError as exc:
        report(9, False, f"n = 3 gap undefined between V_3 and V_2: {exc}")
        return
    t = estimate.t_min
    report(9, 1e-4 <= t <= 9e-4, f"t_min = {t * 1e3:.4f} ms (window 0.1-0.9 ms)")


def test_criterion_10_gap_magnitude():
    config = sodium_config()
    depths = np.linspace(nk_to_joules(1.0), nk_to_joules(100.0), 60)
    lo, hi, count = math.inf, 0.0, 0
    for n in range(2, 7):
        for depth in depths:
            cfg = with_axis_value(config, Axis.TRAP_DEPTH, depth)
            try:
                result = energy_gap(to_trap_units(cfg, n))
            except NoBoundStateError:
                continue
            if result.gap is None:
                continue
            gap_nk = float(energy_to_nk(result.gap, cfg))
            lo, hi, count = min(lo, gap_nk), max(hi, gap_nk), count + 1
    report(10, count > 0 and 1.0 <= lo and hi <= 200.0,
           f"{count} defined gaps, range {lo:.3f}-{hi:.3f} nK (window 1-200 nK)")


def test_criterion_11_sweep_determinism():
    spec = GridSpec(AxisSpec(Axis.TRAP_DEPTH, nk_to_joules(2), nk_to_joules(60), 8),
                    sodium_config(), Quantity.GAP,
                    y_axis=AxisSpec(Axis.TRAP_LENGTH, 3e-6, 7e-6, 4), n_particles=3)
    first = render_csv(run_sweep(spec, workers=1))
    second = render_csv(run_sweep(spec, workers=1))
    parallel = render_csv(run_sweep(spec, workers=4))
    report(11, first == second == parallel,
           f"serial repeat identical: {first == second}, parallel identical: {first == parallel}")


def test_criterion_12_jacobian():
    rng = np.random.default_rng(12)
    worst, h = 0.0, 1e-6
    for _ in range(100):
        n = int(rng.integers(1, 7))
        k0 = float(rng.uniform(3.0, 40.0))
        problem = TrapUnitsProblem(float(10 ** rng.uniform(-1, 2)), k0, n)
        numbers = QuantumNumbers.ground(n)
        k = np.sort(rng.uniform(0.05 * k0, 0.95 * k0, n))
        fd = np.empty((n, n))
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            fd[:, i] = (residual(k + e, numbers, problem)
                        - residual(k - e, numbers, problem)) / (2 * h)
        worst = max(worst, float(np.abs(jacobian(k, numbers, problem) - fd).max()))
    report(12, worst < 1e-6, f"max |J - J_fd| over 100 points = {worst:.2e} (tol 1e-6)")
