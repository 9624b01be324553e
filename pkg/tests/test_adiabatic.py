import numpy as np
import pytest

from bethetrap.adiabatic import (GapUndefinedError, culling_time_from_profile, gap_at_depth,
                                 min_culling_time)
from bethetrap.units import HBAR, nk_to_joules

from conftest import sodium_config


def test_constant_gap_closed_form():
    gap = nk_to_joules(10.0)
    depths = np.linspace(nk_to_joules(5), nk_to_joules(15), 9)
    width = depths[-1] - depths[0]
    t = culling_time_from_profile(depths, np.full(9, gap))
    assert t == pytest.approx(HBAR * width / gap**2, rel=1e-14)


def test_integrand_monotone_in_gap():
    depths = np.linspace(1e-31, 3e-31, 11)
    gaps = np.linspace(1e-31, 2e-31, 11)
    assert culling_time_from_profile(depths, 1.5 * gaps) < culling_time_from_profile(depths, gaps)


def test_profile_rejects_non_positive_gap():
    with pytest.raises(ValueError):
        culling_time_from_profile([1, 2], [1.0, 0.0])


def test_input_validation():
    config = sodium_config()
    with pytest.raises(ValueError):
        min_culling_time(config, 2, nk_to_joules(10), nk_to_joules(20))
    with pytest.raises(ValueError):
        min_culling_time(config, 2, nk_to_joules(20), nk_to_joules(10), sample_count=4)


def test_estimate_on_defined_gap_range():
    config = sodium_config()
    est = min_culling_time(config, 2, nk_to_joules(30), nk_to_joules(15), sample_count=16)
    assert est.t_min > 0
    assert len(est.samples) == 16
    assert all(g > 0 for _, g in est.samples)
    assert est.samples[0][0] > est.samples[-1][0]     # ordered from start to end of the ramp
    # gaps of ~10 nK over ~15 nK of ramp: of order a millisecond
    assert 1e-5 < est.t_min < 1e-2


def test_additive_over_split():
    config = sodium_config()
    a, b, c = nk_to_joules(30), nk_to_joules(22), nk_to_joules(15)
    whole = min_culling_time(config, 2, a, c, 33, inset=0.0).t_min
    parts = (min_culling_time(config, 2, a, b, 33, inset=0.0).t_min
             + min_culling_time(config, 2, b, c, 33, inset=0.0).t_min)
    assert parts == pytest.approx(whole, rel=1e-3)


def test_undefined_gap_names_depth():
    config = sodium_config()
    with pytest.raises(GapUndefinedError, match="nK"):
        gap_at_depth(config, 2, nk_to_joules(5.0))
    with pytest.raises(GapUndefinedError):
        min_culling_time(config, 3, nk_to_joules(30), nk_to_joules(5), sample_count=8)


def test_threaded_samples_equal_serial():
    config = sodium_config()
    args = (config, 2, nk_to_joules(30), nk_to_joules(15), 8)
    assert min_culling_time(*args, workers=4) == min_culling_time(*args, workers=1)
