import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from auvaet.acoustics import AcousticConfig, harvest_power_at
from auvaet.duplex import (
    BETA_HI,
    BETA_LO,
    BetaStatus,
    TddSplit,
    bisect_increasing,
    fdd_energies,
    g_of_beta,
    g_slope,
    h_of_d,
    solve_beta_star,
    tdd_energies,
    tdd_feasible,
)
from auvaet.uplink import UplinkConfig, required_energy_exact

UP = UplinkConfig()
AC = AcousticConfig()


def test_g_at_half():
    expected = -math.log10(2 ** (100 / (12.5 * 3000)) - 1)
    assert g_of_beta(0.5, UP) == pytest.approx(expected, rel=1e-12)
    assert g_of_beta(0.5, UP) == pytest.approx(2.7329, abs=1e-3)


def test_g_ordering():
    assert g_of_beta(0.9, UP) > g_of_beta(0.5, UP) > g_of_beta(0.1, UP)


def test_g_strictly_increasing_dense():
    b = np.linspace(BETA_LO, BETA_HI, 10_000)
    assert np.all(np.diff(g_of_beta(b, UP)) > 0)


@given(st.floats(0.05, 0.95))
def test_g_slope_matches_finite_difference(beta):
    h = 1e-6
    fd = (g_of_beta(beta + h, UP) - g_of_beta(beta - h, UP)) / (2 * h)
    assert g_slope(beta, UP) == pytest.approx(fd, rel=1e-5)
    assert g_slope(beta, UP) > 0


@pytest.mark.parametrize("beta", [0.0, 1.0, -0.2, 1.5])
def test_g_domain(beta):
    with pytest.raises(ValueError):
        g_of_beta(beta, UP)


def test_h_increasing_in_distance_and_frequency():
    assert h_of_d(200, 40, UP, AC) > h_of_d(100, 40, UP, AC)
    d = np.linspace(10, 1000, 1000)
    assert np.all(np.diff(h_of_d(d, 40, UP, AC)) > 0)
    vals = [h_of_d(300, f, UP, AC) for f in (10, 40, 60)]
    assert vals[0] < vals[1] < vals[2]


def test_h_meets_g_at_beta_star():
    sol = solve_beta_star(100, 40, UP, AC)
    assert sol.status is BetaStatus.ROOT
    assert g_of_beta(sol.beta, UP) == pytest.approx(h_of_d(100, 40, UP, AC), abs=1e-8)
    # the oracle: the energy budget balances at beta*
    e_harv, e_req = tdd_energies(100, sol.beta, UP, AC)
    assert e_harv == pytest.approx(e_req, rel=1e-7)
    assert tdd_feasible(100, sol.beta + 1e-4, UP, AC)
    assert not tdd_feasible(100, sol.beta - 1e-4, UP, AC)


def test_feasible_close_and_slow():
    e_harv, e_req = tdd_energies(100, 0.9, UP, AC)
    assert e_harv == pytest.approx(100.7, abs=0.5)
    assert e_req == pytest.approx(62.3, abs=0.2)
    assert tdd_feasible(100, 0.9, UP, AC)


@pytest.mark.parametrize("d", [1, 100, 500, 900])
def test_no_charging_time_is_infeasible(d):
    assert not tdd_feasible(d, 0.0, UP, AC)
    assert not tdd_feasible(d, 1e-9, UP, AC)


def test_far_and_short_is_infeasible():
    e_harv, e_req = tdd_energies(900, 0.1, UP, AC)
    # 0.299 W for 2.5 s
    assert e_harv == pytest.approx(0.747, abs=0.01)
    assert e_req == pytest.approx(929.8, rel=5e-3)
    assert not tdd_feasible(900, 0.1, UP, AC)


@pytest.mark.parametrize("f", [10.0, 20.0, 40.0, 60.0])
def test_sign_equivalence(f):
    rng = np.random.default_rng(int(f))
    d = rng.uniform(100, 1000, 1000)
    beta = rng.uniform(0.01, 0.99, 1000)
    for di, bi in zip(d, beta):
        e_harv, e_req = tdd_energies(di, bi, UP, AC, f_khz=f)
        gh = g_of_beta(bi, UP) - h_of_d(di, f, UP, AC)
        assert np.sign(gh) == np.sign(e_harv - e_req)


def test_bisection_matches_grid_scan():
    grid = np.linspace(BETA_LO, BETA_HI, 1_000_000)
    g = g_of_beta(grid, UP)
    for d in (100, 120, 140):
        h = h_of_d(d, 40, UP, AC)
        sol = solve_beta_star(d, 40, UP, AC)
        assert sol.status is BetaStatus.ROOT
        assert abs(sol.beta - grid[np.argmin(np.abs(g - h))]) < 1e-5


def test_boundary_distance_gives_lower_cap():
    target = g_of_beta(BETA_LO, UP)
    d = bisect_increasing(lambda x: h_of_d(x, 40, UP, AC) - target, 1.0, 1000.0, tol=1e-13)
    sol = solve_beta_star(d, 40, UP, AC)
    assert sol.beta == pytest.approx(BETA_LO, abs=1e-6)


def test_sentinels():
    assert solve_beta_star(1.0, 40, UP, AC) == (BETA_LO, BetaStatus.ALWAYS_FEASIBLE)
    far = solve_beta_star(5000.0, 40, UP, AC)
    assert far.status is BetaStatus.INFEASIBLE and far.beta == BETA_HI


@pytest.mark.parametrize("d", [100.0, 110.0, 130.0])
def test_higher_frequency_needs_more_charging(d):
    assert solve_beta_star(d, 60, UP, AC).beta >= solve_beta_star(d, 10, UP, AC).beta


@pytest.mark.parametrize("f", [10.0, 20.0, 40.0, 60.0])
def test_beta_star_non_decreasing_in_distance(f):
    betas = [solve_beta_star(d, f, UP, AC).beta for d in np.arange(1, 1001, 5.0)]
    assert np.all(np.diff(betas) >= 0)


def test_fdd_energies_use_both_bands():
    e_harv, e_req = fdd_energies(100, 100, UP, AC)
    assert e_harv == pytest.approx(harvest_power_at(100, 40, AC) * 25, rel=1e-12)
    assert e_req == pytest.approx(required_energy_exact(100, 0.0, UP, AC, f_khz=30), rel=1e-12)
    assert e_req < required_energy_exact(100, 0.0, UP, AC, f_khz=40)  # 30 kHz absorbs less


def test_tdd_split():
    s = TddSplit(0.4, 25.0)
    assert s.charging_time == pytest.approx(10.0)
    assert s.data_time == pytest.approx(15.0)
    for bad in (0.05, 0.95):
        with pytest.raises(ValueError):
            TddSplit(bad, 25.0)
