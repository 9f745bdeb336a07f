import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from auvaet.acoustics import (
    AcousticConfig,
    AttenuationMode,
    attenuation,
    harvest_power_at,
    harvested_energy,
    harvested_power,
    harvested_power_chain,
    received_level,
    source_level,
    thorp_absorption,
)

CFG = AcousticConfig()


def thorp_oracle(f):
    f2 = f * f
    return 0.11 * f2 / (1 + f2) + 44 * f2 / (4100 + f2) + 2.75e-4 * f2 + 0.003


# --- absorption ---------------------------------------------------------------

def test_thorp_40khz():
    assert thorp_absorption(40) == pytest.approx(12.9038, abs=5e-4)


def test_thorp_10khz():
    expected = 0.11 * 100 / 101 + 44 * 100 / 4200 + 0.0275 + 0.003
    assert thorp_absorption(10) == pytest.approx(expected, rel=1e-12)
    assert thorp_absorption(10) == pytest.approx(1.1872, abs=5e-4)


def test_thorp_low_frequency_floor():
    assert thorp_absorption(1e-6) == pytest.approx(0.003, abs=1e-9)


@pytest.mark.parametrize("f", [0.0, -3.0])
def test_thorp_rejects_nonpositive(f):
    with pytest.raises(ValueError):
        thorp_absorption(f)


def test_thorp_increasing_from_1khz():
    f = np.linspace(1, 200, 5000)
    a = thorp_absorption(f)
    assert np.all(np.diff(a) > 0)


@given(st.floats(0.01, 500))
def test_thorp_matches_formula(f):
    assert thorp_absorption(f) == pytest.approx(thorp_oracle(f), rel=1e-12)


# --- source level ---------------------------------------------------------------

def test_source_level_table_values():
    assert source_level(CFG) == pytest.approx(220.8, abs=1e-9)


def test_source_level_unit_power():
    assert source_level(AcousticConfig(p_elec=1.0, eta=1.0, di=0.0)) == pytest.approx(170.8, abs=1e-12)


def test_source_level_without_directivity():
    assert source_level(AcousticConfig(di=0.0)) == pytest.approx(200.8, abs=1e-9)


# --- attenuation ---------------------------------------------------------------

def test_attenuation_100m():
    assert attenuation(100, 40, CFG) == pytest.approx(4.2904, abs=5e-3)


def test_attenuation_1m_is_absorption_only():
    assert attenuation(1, 40, CFG) == pytest.approx(thorp_oracle(40) / 1000, rel=1e-12)
    assert attenuation(1, 40, CFG) == pytest.approx(0.013, abs=1e-3)


def test_attenuation_900m():
    assert attenuation(900, 40, CFG) == pytest.approx(16.045, abs=0.02)


def test_attenuation_main_text_form():
    cfg = AcousticConfig(attenuation_mode="main_text")
    assert cfg.attenuation_mode is AttenuationMode.MAIN_TEXT
    expected = 1.5 * 10 * math.log10(100) + 100 * 10 * math.log10(thorp_oracle(40))
    assert attenuation(100, 40, cfg) == pytest.approx(expected, rel=1e-12)
    # printed form is unusable for link budgets: far beyond any sensible AL
    assert attenuation(100, 40, cfg) > 1000


def test_attenuation_clamps_short_distances():
    assert attenuation(0.0, 40, CFG) == attenuation(1.0, 40, CFG)
    assert attenuation(0.3, 40, CFG) == attenuation(1.0, 40, CFG)


@pytest.mark.parametrize("mode", list(AttenuationMode))
def test_attenuation_increasing_in_distance(mode):
    cfg = AcousticConfig(attenuation_mode=mode)
    d = np.linspace(1.001, 2000, 4000)
    assert np.all(np.diff(attenuation(d, 40, cfg)) > 0)


# --- received level and power -------------------------------------------------

def test_received_level_100m():
    lb = received_level(100, 40, CFG)
    assert lb.rl == pytest.approx(186.51, abs=0.01)
    assert lb.sl == pytest.approx(220.8, abs=1e-9)


def test_received_level_900m():
    assert received_level(900, 40, CFG).rl == pytest.approx(174.755, abs=0.02)


@given(st.floats(1.0, 5000.0), st.sampled_from([10.0, 20.0, 30.0, 40.0, 60.0]))
def test_received_level_identity(d, f):
    lb = received_level(d, f, CFG)
    assert lb.rl == lb.sl - lb.al - CFG.nl
    assert lb.p_harv >= 0


def test_received_level_zero_attenuation_limit():
    # ks = 1 with absorption suppressed at 1 m leaves only the absorption term
    lb = received_level(1.0, 1e-6, AcousticConfig(ks=1.0))
    assert lb.rl == pytest.approx(lb.sl - CFG.nl, abs=1e-5)


def test_harvested_power_100m():
    assert harvested_power(186.51, CFG) == pytest.approx(4.478, abs=0.01)


def test_harvested_power_unit_exponent():
    assert harvested_power(-CFG.rvs, CFG) == pytest.approx(CFG.eta / (4 * CFG.rp), rel=1e-15)


def test_harvested_power_900m():
    assert harvested_power(174.755, CFG) == pytest.approx(0.2990, abs=0.002)


@settings(max_examples=300)
@given(st.floats(-50.0, 260.0))
def test_chain_equals_collapsed_form(rl):
    # pressure -> induced voltage -> available power -> efficiency, step by step
    p = 10 ** (rl / 20)
    m = 10 ** (CFG.rvs / 20)
    v = p * m
    oracle = CFG.eta * v * v / (4 * CFG.rp)
    assert harvested_power_chain(rl, CFG) == pytest.approx(oracle, rel=1e-12)
    assert harvested_power(rl, CFG) == pytest.approx(oracle, rel=1e-12)


def test_harvested_power_decreasing_in_distance():
    d = np.linspace(1.5, 3000, 3000)
    p = harvest_power_at(d, 40, CFG)
    assert np.all(np.diff(p) < 0)


# --- energy -----------------------------------------------------------------------

def test_harvested_energy_examples():
    assert harvested_energy(4.478, 0.5 * 25) == pytest.approx(55.97, abs=0.2)
    assert harvested_energy(4.478, 0.0) == 0.0
    assert harvested_energy(4.478, 25) == pytest.approx(111.94, abs=0.3)


def test_harvested_energy_rejects_negative_time():
    with pytest.raises(ValueError):
        harvested_energy(1.0, -1.0)


@pytest.mark.parametrize(
    "kw",
    [dict(eta=0.0), dict(eta=1.5), dict(p_elec=0.0), dict(rp=-1.0), dict(ks=0.5), dict(ks=2.5),
     dict(f_charging_khz=0.0), dict(f_data_khz=-1.0), dict(attenuation_mode="bogus")],
)
def test_config_invariants(kw):
    with pytest.raises(ValueError):
        AcousticConfig(**kw)
