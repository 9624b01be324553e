import numpy as np
import pytest

from bethetrap.capacity import (Axis, BracketError, ThresholdQuery, axis_value,
                                exists_bound_state, ionization_threshold, trap_capacity,
                                with_axis_value)
from bethetrap.spectrum import ground_state
from bethetrap.units import nk_to_joules, to_trap_units

from conftest import sodium_config


def test_single_atom_always_bound():
    for depth in (0.01, 0.5, 5.0):
        assert exists_bound_state(sodium_config(depth), 1)


def test_four_atoms_need_minimum_depth():
    assert not exists_bound_state(sodium_config(3.0), 4)
    assert exists_bound_state(sodium_config(25.0), 4)


def test_deep_well_holds_up_to_six():
    config = sodium_config(400.0)
    for n in range(1, 7):
        assert exists_bound_state(config, n)


def test_capacity_clamp_and_near_zero_depth():
    assert trap_capacity(sodium_config(25.0), 1) == 1
    assert trap_capacity(sodium_config(1e-3), 6) == 1
    with pytest.raises(ValueError):
        trap_capacity(sodium_config(), 0)


def test_capacity_monotone_in_depth_length_and_coupling():
    depths = [1, 3, 6, 10, 16, 24, 32]
    caps = [trap_capacity(sodium_config(d), 8) for d in depths]
    assert caps == sorted(caps) and caps[-1] > caps[0]

    lengths = np.linspace(2e-6, 9e-6, 6)
    caps = [trap_capacity(sodium_config(10.0, L), 8) for L in lengths]
    assert caps == sorted(caps)

    base = sodium_config(20.0)
    couplings = np.geomspace(1e4, 1e9, 7)
    caps = [trap_capacity(with_axis_value(base, Axis.INTERACTION_STRENGTH, c), 8)
            for c in couplings]
    assert caps == sorted(caps, reverse=True)


def test_existence_in_n_is_nested():
    for depth in (2.0, 9.0, 17.0, 30.0):
        flags = [exists_bound_state(sodium_config(depth), n) for n in range(1, 8)]
        first_false = flags.index(False) if False in flags else len(flags)
        assert not any(flags[first_false:])


def test_axis_helpers_round_trip():
    base = sodium_config()
    for axis, value in ((Axis.TRAP_DEPTH, 1e-31), (Axis.TRAP_LENGTH, 3e-6),
                        (Axis.INTERACTION_STRENGTH, 3e6)):
        assert axis_value(with_axis_value(base, axis, value), axis) == pytest.approx(value,
                                                                                     rel=1e-12)


def test_depth_threshold_four_atoms():
    query = ThresholdQuery(sodium_config(), 4, Axis.TRAP_DEPTH,
                           (nk_to_joules(1.0), nk_to_joules(40.0)))
    result = ionization_threshold(query, tol=1e-5)
    assert result.bisection_width <= 1e-5 * nk_to_joules(40.0)
    assert result.capacity_below == 3 and result.capacity_above == 4
    assert result.bound_value > result.unbound_value
    # the top particle is barely bound at the threshold
    sol = ground_state(to_trap_units(sodium_config().replace(trap_depth=result.bound_value), 4))
    assert -1e-3 < sol.e_single_max < 0


def test_coupling_threshold_between_sodium_and_ten_times():
    base = sodium_config(25.0)
    c_na = base.interaction_strength
    result = ionization_threshold(
        ThresholdQuery(base, 4, Axis.INTERACTION_STRENGTH, (c_na, 10 * c_na)))
    assert c_na < result.value < 10 * c_na
    # bound below the threshold coupling
    assert result.bound_value < result.unbound_value
    assert result.capacity_below >= result.capacity_above + 1


def test_bracket_error():
    query = ThresholdQuery(sodium_config(), 2, Axis.TRAP_DEPTH,
                           (nk_to_joules(30.0), nk_to_joules(40.0)))
    with pytest.raises(BracketError):
        ionization_threshold(query)
    with pytest.raises(BracketError):
        ThresholdQuery(sodium_config(), 2, Axis.TRAP_DEPTH, (2.0, 1.0))
