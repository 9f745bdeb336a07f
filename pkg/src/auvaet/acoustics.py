"""Underwater acoustic link budget and energy-harvesting chain.

All levels are in dB, distances in metres, frequencies in kHz. Functions
accept scalars or numpy arrays and broadcast.
"""
import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

# Distances below this are clamped before taking log10.
D_MIN = 1.0


class AttenuationMode(str, enum.Enum):
    # k_s*10*log10(d) + d*10*log10(alpha), as printed in the channel model
    MAIN_TEXT = "main_text"
    # k_s*log10(d) + (alpha/1000)*d, the form that reproduces the energy table
    APPENDIX_FIT = "appendix_fit"


@dataclass(frozen=True)
class AcousticConfig:
    p_elec: float = 2000.0  # W
    eta: float = 0.5
    di: float = 20.0  # dB
    rvs: float = -150.0  # dB re V/uPa
    nl: float = 30.0  # dB
    ks: float = 1.5
    rp: float = 125.0  # ohm
    f_charging_khz: float = 40.0
    f_data_khz: float = 30.0
    attenuation_mode: AttenuationMode = AttenuationMode.APPENDIX_FIT

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"eta must be in (0, 1], got {self.eta}")
        if self.p_elec <= 0.0:
            raise ValueError(f"p_elec must be positive, got {self.p_elec}")
        if self.rp <= 0.0:
            raise ValueError(f"rp must be positive, got {self.rp}")
        if not 1.0 <= self.ks <= 2.0:
            raise ValueError(f"ks must be in [1, 2], got {self.ks}")
        if self.f_charging_khz <= 0.0 or self.f_data_khz <= 0.0:
            raise ValueError("frequencies must be positive")
        # accept plain strings from config files
        object.__setattr__(self, "attenuation_mode", AttenuationMode(self.attenuation_mode))


@dataclass(frozen=True)
class LinkBudget:
    sl: float
    al: float
    rl: float
    p_harv: float


def thorp_absorption(f_khz):
    """Thorp absorption coefficient in dB/km for a frequency in kHz."""
    f = np.asarray(f_khz, dtype=float)
    if np.any(f <= 0.0):
        raise ValueError("frequency must be positive")
    f2 = f * f
    alpha = 0.11 * f2 / (f2 + 1.0) + 44.0 * f2 / (f2 + 4100.0) + 2.75e-4 * f2 + 0.003
    return alpha if alpha.ndim else float(alpha)


def source_level(cfg):
    return 170.8 + 10.0 * math.log10(cfg.p_elec) + 10.0 * math.log10(cfg.eta) + cfg.di


def attenuation(d, f_khz, cfg):
    """Total attenuation level AL(d) in dB.

    Distances below ``D_MIN`` are clamped.
    """
    d = np.asarray(d, dtype=float)
    if np.any(d < D_MIN):
        log.debug("clamping %d distance(s) below %.1f m", int(np.sum(d < D_MIN)), D_MIN)
        d = np.maximum(d, D_MIN)
    alpha = thorp_absorption(f_khz)
    if cfg.attenuation_mode is AttenuationMode.APPENDIX_FIT:
        al = cfg.ks * np.log10(d) + alpha / 1000.0 * d
    else:
        al = cfg.ks * 10.0 * np.log10(d) + d * 10.0 * np.log10(alpha)
    return al if al.ndim else float(al)


def harvested_power(rl, cfg):
    """Harvestable electrical power (W) for a received level ``rl`` in dB."""
    return cfg.eta * 10.0 ** ((np.asarray(rl, dtype=float) + cfg.rvs) / 10.0) / (4.0 * cfg.rp)


def harvested_power_chain(rl, cfg):
    """Same as :func:`harvested_power`, step by step through pressure and voltage."""
    p = 10.0 ** (rl / 20.0)  # pressure, uPa
    m = 10.0 ** (cfg.rvs / 20.0)  # sensitivity, V/uPa
    v_ind = p * m
    p_available = v_ind**2 / (4.0 * cfg.rp)
    return cfg.eta * p_available


def received_level(d, f_khz, cfg):
    sl = source_level(cfg)
    al = attenuation(d, f_khz, cfg)
    rl = sl - al - cfg.nl
    return LinkBudget(sl=sl, al=al, rl=rl, p_harv=float(harvested_power(rl, cfg)))


def harvested_energy(p_harv, tau_charging):
    if np.any(np.asarray(tau_charging) < 0.0):
        raise ValueError("charging duration must be non-negative")
    return p_harv * tau_charging


def harvest_power_at(d, f_khz, cfg):
    """Vectorised distance -> harvested power shortcut used by the environment."""
    rl = source_level(cfg) - attenuation(d, f_khz, cfg) - cfg.nl
    return harvested_power(rl, cfg)
